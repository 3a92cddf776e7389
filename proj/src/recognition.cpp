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

#include "lcpkit/recognition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "lcpkit/error.hpp"
#include "lcpkit/io.hpp"
#include "lcpkit/kernels.hpp"
#include "parallel.hpp"

namespace lcpkit {

namespace {

constexpr std::string_view kMagic = "EMB1";

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) {
      v |= static_cast<std::uint16_t>(
          static_cast<std::uint8_t>(bytes_[pos_++]) << (8 * i));
    }
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
           << (8 * i);
    }
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  void set_record(std::size_t r) { record_ = r; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kFormat,
                  "truncated embedding file: record " + std::to_string(record_) +
                      " ends inside " + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::size_t record_ = 0;
};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, const std::string& s, const char* what) {
  if (s.size() > 0xFFFF) {
    throw Error(ErrorCode::kInput, std::string(what) + " longer than 65535 bytes");
  }
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

bool valid_confidence(float c) { return c >= 0.0f && c <= 1.0f; }

std::string with_commas(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  return {out.rbegin(), out.rend()};
}

// "(CA,CS)" -> "CA_CS" so the field needs no quoting.
std::string csv_category(PairCategory c) {
  std::string out;
  for (char ch : pair_category_name(c)) {
    if (ch == ',') out.push_back('_');
    else if (ch != '(' && ch != ')') out.push_back(ch);
  }
  return out;
}

}  // namespace

std::string_view beard_area_name(BeardArea a) noexcept {
  switch (a) {
    case BeardArea::kCleanShaven: return "CS";
    case BeardArea::kChinArea: return "CA";
    case BeardArea::kSideToSide: return "S2S";
  }
  return "?";
}

PairCategory pair_category(BeardArea a, BeardArea b) noexcept {
  // Name order is CA < CS < S2S.
  auto rank = [](BeardArea x) {
    switch (x) {
      case BeardArea::kChinArea: return 0;
      case BeardArea::kCleanShaven: return 1;
      case BeardArea::kSideToSide: return 2;
    }
    return 0;
  };
  int lo = std::min(rank(a), rank(b));
  int hi = std::max(rank(a), rank(b));
  static constexpr PairCategory table[3][3] = {
      {PairCategory::kCaCa, PairCategory::kCaCs, PairCategory::kCaS2s},
      {PairCategory::kCaCs, PairCategory::kCsCs, PairCategory::kCsS2s},
      {PairCategory::kCaS2s, PairCategory::kCsS2s, PairCategory::kS2sS2s}};
  return table[lo][hi];
}

std::string_view pair_category_name(PairCategory c) noexcept {
  switch (c) {
    case PairCategory::kCaCa: return "(CA,CA)";
    case PairCategory::kCaCs: return "(CA,CS)";
    case PairCategory::kCaS2s: return "(CA,S2S)";
    case PairCategory::kCsCs: return "(CS,CS)";
    case PairCategory::kCsS2s: return "(CS,S2S)";
    case PairCategory::kS2sS2s: return "(S2S,S2S)";
  }
  return "?";
}

std::string demographic_name(std::uint8_t code) {
  static constexpr std::array<std::string_view, 4> kNames = {"WM", "BM", "IM",
                                                             "AM"};
  if (code < kNames.size()) return std::string(kNames[code]);
  return "D" + std::to_string(code);
}

std::optional<std::uint8_t> demographic_code(std::string_view name) {
  for (int c = 0; c < 256; ++c) {
    if (demographic_name(static_cast<std::uint8_t>(c)) == name) {
      return static_cast<std::uint8_t>(c);
    }
  }
  return std::nullopt;
}

std::string encode_embeddings(const EmbeddingSet& set) {
  std::string out(kMagic);
  put_u32(out, static_cast<std::uint32_t>(set.records.size()));
  put_u32(out, set.dim);
  for (std::size_t r = 0; r < set.records.size(); ++r) {
    const auto& rec = set.records[r];
    if (rec.features.size() != set.dim) {
      throw Error(ErrorCode::kDimension,
                  "record " + std::to_string(r) + " has dimension " +
                      std::to_string(rec.features.size()) + ", set has " +
                      std::to_string(set.dim));
    }
    if (!valid_confidence(rec.confidence)) {
      throw Error(ErrorCode::kInput, "record " + std::to_string(r) +
                                         ": confidence outside [0, 1]");
    }
    put_str(out, rec.image_id, "image id");
    put_str(out, rec.subject_id, "subject id");
    out.push_back(static_cast<char>(rec.demographic));
    out.push_back(static_cast<char>(rec.area));
    put_u32(out, std::bit_cast<std::uint32_t>(rec.confidence));
    for (float x : rec.features) put_u32(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

EmbeddingSet decode_embeddings(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kFormat, "not an embedding file (bad magic)");
  }
  Reader in(bytes.substr(kMagic.size()));
  EmbeddingSet set;
  std::uint32_t count = in.u32("header");
  set.dim = in.u32("header");
  if (set.dim == 0) throw Error(ErrorCode::kFormat, "embedding dimension is 0");
  set.records.reserve(std::min<std::size_t>(count, bytes.size() / 4));
  for (std::uint32_t r = 0; r < count; ++r) {
    in.set_record(r);
    EmbeddingRecord rec;
    rec.image_id = in.str(in.u16("id length"), "image id");
    rec.subject_id = in.str(in.u16("subject length"), "subject id");
    rec.demographic = in.u8("demographic code");
    std::uint8_t area = in.u8("beard category");
    if (area > 2) {
      throw Error(ErrorCode::kFormat, "record " + std::to_string(r) +
                                          ": unknown beard category code " +
                                          std::to_string(area));
    }
    rec.area = static_cast<BeardArea>(area);
    rec.confidence = in.f32("confidence");
    if (!valid_confidence(rec.confidence)) {
      throw Error(ErrorCode::kFormat, "record " + std::to_string(r) +
                                          ": confidence outside [0, 1]");
    }
    rec.features.resize(set.dim);
    for (auto& x : rec.features) x = in.f32("feature vector");
    set.records.push_back(std::move(rec));
  }
  if (!in.done()) {
    throw Error(ErrorCode::kFormat, "trailing bytes after " +
                                        std::to_string(count) + " records");
  }
  return set;
}

EmbeddingSet load_embeddings(const std::string& path) {
  return decode_embeddings(io::read_file(path));
}

void save_embeddings(const std::string& path, const EmbeddingSet& set) {
  io::write_file_atomic(path, encode_embeddings(set));
}

EmbeddingSet filter_high_confidence(const EmbeddingSet& set, double min_conf) {
  if (!(min_conf >= 0.0 && min_conf <= 1.0)) {
    throw Error(ErrorCode::kInput, "min_conf must lie in [0, 1]");
  }
  EmbeddingSet out{set.dim, {}};
  for (const auto& rec : set.records) {
    if (static_cast<double>(rec.confidence) >= min_conf) out.records.push_back(rec);
  }
  return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  double ab = kernels::dot(a, b);
  double aa = kernels::dot(a, a);
  double bb = kernels::dot(b, b);
  if (aa == 0.0 || bb == 0.0) {
    throw Error(ErrorCode::kInput, "cosine similarity of a zero vector");
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

std::vector<std::uint8_t> demographics_in(const EmbeddingSet& set) {
  std::vector<std::uint8_t> out;
  for (const auto& r : set.records) out.push_back(r.demographic);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PairScores pair_scores(const EmbeddingSet& set, std::uint8_t demographic,
                       unsigned threads) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    if (set.records[i].demographic == demographic) idx.push_back(i);
  }
  if (idx.size() < 2) {
    throw Error(ErrorCode::kInput, "demographic " + demographic_name(demographic) +
                                       " has fewer than 2 records");
  }
  std::vector<double> inv_norm(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& f = set.records[idx[i]].features;
    double nn = kernels::dot(std::span<const float>(f), std::span<const float>(f));
    if (nn == 0.0) {
      throw Error(ErrorCode::kInput,
                  "record '" + set.records[idx[i]].image_id + "' has a zero vector");
    }
    inv_norm[i] = 1.0 / std::sqrt(nn);
  }

  std::vector<PairScores> shards(std::max(1u, threads));
  detail::run_sharded(
      idx.size(), threads, [&](std::size_t s, std::size_t begin, std::size_t end) {
        auto& out = shards[s];
        for (std::size_t i = begin; i < end; ++i) {
          const auto& a = set.records[idx[i]];
          for (std::size_t j = i + 1; j < idx.size(); ++j) {
            const auto& b = set.records[idx[j]];
            double cos = kernels::dot(std::span<const float>(a.features),
                                      std::span<const float>(b.features)) *
                         inv_norm[i] * inv_norm[j];
            ScoredPair p{idx[i], idx[j], pair_category(a.area, b.area),
                         std::clamp(cos, -1.0, 1.0)};
            (a.subject_id == b.subject_id ? out.genuine : out.impostor).push_back(p);
          }
        }
      });

  PairScores result;
  result.demographic = demographic;
  for (auto& s : shards) {
    result.genuine.insert(result.genuine.end(), s.genuine.begin(), s.genuine.end());
    result.impostor.insert(result.impostor.end(), s.impostor.begin(),
                           s.impostor.end());
  }
  return result;
}

Calibration calibrate_threshold(std::span<const double> impostor_scores,
                                double target_fmr) {
  const std::size_t n = impostor_scores.size();
  if (!(target_fmr > 0.0 && target_fmr <= 1.0)) {
    throw Error(ErrorCode::kCalibration, "target FMR must lie in (0, 1]");
  }
  // Allowed number of scores at or above the threshold.
  double allowed_real = target_fmr * static_cast<double>(n);
  if (n == 0 || allowed_real < 1.0 - 1e-9) {
    throw Error(ErrorCode::kCalibration,
                "need at least " +
                    std::to_string(static_cast<std::size_t>(std::ceil(1.0 / target_fmr))) +
                    " impostor scores for target FMR " + io::format_double(target_fmr) +
                    ", got " + std::to_string(n));
  }
  auto allowed = static_cast<std::size_t>(std::floor(allowed_real + 1e-9));

  std::vector<double> desc(impostor_scores.begin(), impostor_scores.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());

  Calibration c;
  c.target_fmr = target_fmr;
  c.n_scores = n;
  if (allowed >= n) {
    c.threshold = desc.back();
    c.n_at_or_above = n;
  } else {
    // Largest k < allowed where desc[k] is the last copy of its value.
    std::size_t k = allowed;  // one past the candidate
    while (k > 0 && desc[k - 1] == desc[k]) --k;
    if (k == 0) {
      c.threshold = std::nextafter(desc.front(), HUGE_VAL);
      c.n_at_or_above = 0;
    } else {
      c.threshold = desc[k - 1];
      c.n_at_or_above = k;
    }
  }
  c.achieved_fmr = static_cast<double>(c.n_at_or_above) / static_cast<double>(n);
  return c;
}

Calibration calibrate_threshold(const PairScores& reference, double target_fmr) {
  std::vector<double> scores;
  scores.reserve(reference.impostor.size());
  for (const auto& p : reference.impostor) scores.push_back(p.score);
  return calibrate_threshold(scores, target_fmr);
}

const FmrCell& FmrReport::cell(std::uint8_t demographic,
                               PairCategory category) const {
  for (const auto& c : cells) {
    if (c.demographic == demographic && c.category == category) return c;
  }
  throw Error(ErrorCode::kInput, "no FMR cell for demographic " +
                                     demographic_name(demographic));
}

FmrReport fmr_by_category(const std::vector<PairScores>& per_demographic,
                          const Calibration& calibration,
                          std::uint8_t reference_demographic,
                          std::string matcher) {
  FmrReport rep;
  rep.matcher = std::move(matcher);
  rep.threshold = calibration.threshold;
  rep.target_fmr = calibration.target_fmr;
  rep.reference_fmr = calibration.achieved_fmr;
  rep.reference_demographic = reference_demographic;
  for (const auto& ps : per_demographic) {
    rep.demographics.push_back(ps.demographic);
    std::array<std::size_t, 6> pairs{};
    std::array<std::size_t, 6> hits{};
    for (const auto& p : ps.impostor) {
      auto c = static_cast<std::size_t>(p.category);
      ++pairs[c];
      if (p.score >= calibration.threshold) ++hits[c];
    }
    for (auto cat : kPairCategories) {
      auto c = static_cast<std::size_t>(cat);
      FmrCell cell{ps.demographic, cat, pairs[c], hits[c], std::nullopt};
      if (pairs[c] > 0) {
        cell.fmr = static_cast<double>(hits[c]) / static_cast<double>(pairs[c]);
      }
      rep.cells.push_back(cell);
    }
  }
  return rep;
}

std::string fmr_report_json(const FmrReport& report, int indent) {
  nlohmann::ordered_json j;
  j["matcher"] = report.matcher;
  j["threshold"] = report.threshold;
  j["reference_demographic"] = demographic_name(report.reference_demographic);
  j["target_fmr"] = report.target_fmr;
  j["reference_fmr"] = report.reference_fmr;
  auto demos = nlohmann::ordered_json::array();
  for (auto d : report.demographics) {
    nlohmann::ordered_json dj;
    dj["demographic"] = demographic_name(d);
    auto cats = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
      if (cell.demographic != d) continue;
      nlohmann::ordered_json cj;
      cj["category"] = pair_category_name(cell.category);
      cj["n_pairs"] = cell.n_pairs;
      cj["n_false_matches"] = cell.n_false_matches;
      cj["fmr"] = cell.fmr ? nlohmann::ordered_json(*cell.fmr)
                           : nlohmann::ordered_json(nullptr);
      cats.push_back(std::move(cj));
    }
    dj["categories"] = std::move(cats);
    demos.push_back(std::move(dj));
  }
  j["demographics"] = std::move(demos);
  return j.dump(indent);
}

std::string fmr_table(std::span<const FmrReport> reports) {
  if (reports.empty()) return {};
  const auto& first = reports.front();
  std::ostringstream os;
  char buf[64];
  os << "category  ";
  for (auto d : first.demographics) {
    std::snprintf(buf, sizeof buf, " | %13s | %7s", "N_pairs",
                  demographic_name(d).c_str());
    os << buf;
  }
  os << '\n';
  for (auto cat : kPairCategories) {
    for (std::size_t m = 0; m < reports.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%-10s",
                    m == 0 ? std::string(pair_category_name(cat)).c_str() : "");
      os << buf;
      for (auto d : first.demographics) {
        const auto& cell = reports[m].cell(d, cat);
        std::string n = m == 0 ? with_commas(first.cell(d, cat).n_pairs) : "";
        std::string f = "-";
        if (cell.fmr) {
          std::snprintf(buf, sizeof buf, "%.4f", *cell.fmr);
          f = buf;
        }
        std::snprintf(buf, sizeof buf, " | %13s | %7s", n.c_str(), f.c_str());
        os << buf;
      }
      os << '\n';
    }
  }
  std::snprintf(buf, sizeof buf, "%.6f", first.threshold);
  os << "threshold " << buf << " (target FMR "
     << io::format_double(first.target_fmr) << " on "
     << demographic_name(first.reference_demographic) << ")\n";
  return os.str();
}

std::vector<Histogram> distribution_histograms(const PairScores& scores,
                                               std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::kInput, "histograms need at least 2 bins");
  std::vector<Histogram> out;
  for (bool genuine : {true, false}) {
    const auto& stream = genuine ? scores.genuine : scores.impostor;
    std::array<Histogram, 6> hs;
    for (auto cat : kPairCategories) {
      auto& h = hs[static_cast<std::size_t>(cat)];
      h.demographic = scores.demographic;
      h.genuine = genuine;
      h.category = cat;
      h.counts.assign(bins, 0);
    }
    for (const auto& p : stream) {
      double pos = (p.score + 1.0) / 2.0 * static_cast<double>(bins);
      auto b = static_cast<std::ptrdiff_t>(std::floor(pos));
      b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
      ++hs[static_cast<std::size_t>(p.category)].counts[static_cast<std::size_t>(b)];
    }
    for (auto& h : hs) out.push_back(std::move(h));
  }
  return out;
}

std::string histograms_csv(const std::vector<Histogram>& histograms) {
  std::string out = "demographic,kind,category,bin_low,bin_high,count\n";
  for (const auto& h : histograms) {
    const std::size_t bins = h.counts.size();
    for (std::size_t b = 0; b < bins; ++b) {
      double lo = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins);
      double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / static_cast<double>(bins);
      out += demographic_name(h.demographic);
      out += h.genuine ? ",genuine," : ",impostor,";
      out += csv_category(h.category);
      out += ',' + io::format_double(lo) + ',' + io::format_double(hi) + ',' +
             std::to_string(h.counts[b]) + '\n';
    }
  }
  return out;
}

}  // namespace lcpkit
