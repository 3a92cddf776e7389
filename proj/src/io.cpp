// Copyright 2026 The lcpkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcpkit/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace lcpkit::io {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::size_t> schema_permutation(const CsvTable& table,
                                            const AttributeSchema& schema,
                                            const std::string& path) {
  if (table.columns.size() != schema.size()) {
    throw Error(ErrorCode::kDimension,
                path + ": " + std::to_string(table.columns.size()) +
                    " attribute columns, schema '" + schema.name() + "' has " +
                    std::to_string(schema.size()));
  }
  // perm[schema_index] = file column
  std::vector<std::size_t> perm(schema.size(), schema.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    auto idx = schema.index_of(table.columns[c]);
    if (!idx) {
      throw Error(ErrorCode::kFormat, path + ": column '" + table.columns[c] +
                                          "' is not an attribute of schema '" +
                                          schema.name() + "'");
    }
    if (perm[*idx] != schema.size()) {
      throw Error(ErrorCode::kFormat,
                  path + ": duplicate column '" + table.columns[c] + "'");
    }
    perm[*idx] = c;
  }
  return perm;
}

ScoreMatrix reorder(const CsvTable& table, const std::vector<std::size_t>& perm) {
  const auto& src = table.data.values;
  Matrix<double> values(src.rows(), perm.size());
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t k = 0; k < perm.size(); ++k) values(r, k) = src(r, perm[k]);
  }
  return {table.data.row_ids, std::move(values)};
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view origin) {
  CsvTable table;
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (!have_header) {
      if (trim(fields[0]) != "id") {
        throw Error(ErrorCode::kFormat, std::string(origin) +
                                            ": header must start with 'id'");
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        table.columns.emplace_back(trim(fields[i]));
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size() + 1) {
      throw Error(ErrorCode::kFormat,
                  std::string(origin) + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(table.columns.size() + 1) +
                      " fields, found " + std::to_string(fields.size()));
    }
    table.data.row_ids.emplace_back(trim(fields[0]));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto f = trim(fields[i]);
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorCode::kFormat,
                    std::string(origin) + ":" + std::to_string(line_no) +
                        ": column '" + table.columns[i - 1] +
                        "': not a number: '" + std::string(f) + "'");
      }
      values.push_back(x);
    }
  }
  if (!have_header) {
    throw Error(ErrorCode::kFormat, std::string(origin) + ": empty file");
  }
  table.data.values = Matrix<double>(table.data.row_ids.size(),
                                     table.columns.size(), std::move(values));
  return table;
}

CsvTable read_csv(const std::string& path) {
  return parse_csv(read_file(path), path);
}

ScoreMatrix read_scores(const std::string& path, const AttributeSchema& schema) {
  auto table = read_csv(path);
  return reorder(table, schema_permutation(table, schema, path));
}

BinaryMatrix read_binary(const std::string& path,
                         const AttributeSchema& schema) {
  auto scores = read_scores(path, schema);
  BinaryMatrix out{scores.row_ids, BitMatrix(scores.rows(), scores.cols())};
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      double x = scores.values(r, c);
      if (x != 0.0 && x != 1.0) {
        throw Error(ErrorCode::kFormat,
                    path + ": row '" + scores.row_ids[r] + "', column '" +
                        schema.attribute(c) + "': expected 0 or 1");
      }
      out.values(r, c) = x == 1.0 ? 1 : 0;
    }
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_csv(const std::vector<std::string>& columns,
                       const ScoreMatrix& data) {
  std::string out = "id";
  for (const auto& c : columns) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out += data.row_ids[r];
    for (double x : data.values.row(r)) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

std::string format_csv(const std::vector<std::string>& columns,
                       const BinaryMatrix& data) {
  std::string out = "id";
  for (const auto& c : columns) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out += data.row_ids[r];
    for (auto b : data.values.row(r)) out += b ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  if (target.has_parent_path()) {
    std::error_code dir_ec;
    fs::create_directories(target.parent_path(), dir_ec);
  }
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignore;
      fs::remove(tmp, ignore);
      throw Error(ErrorCode::kIo, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw Error(ErrorCode::kIo,
                "cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace lcpkit::io
