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

#include "lcpkit/schema.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lcpkit/error.hpp"

namespace lcpkit {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

void check_rule_list(const std::vector<RuleDecl>& rules, const char* kind,
                     const std::unordered_set<std::string>& declared,
                     std::vector<Violation>& out) {
  for (const auto& rule : rules) {
    if (!declared.count(rule.subject)) {
      out.push_back({ViolationKind::kUndeclared,
                     std::string(kind) + " rule subject '" + rule.subject +
                         "' is not a declared attribute"});
    }
    if (rule.targets.empty()) {
      out.push_back({ViolationKind::kGroupSize, std::string(kind) +
                                                    " rule for '" +
                                                    rule.subject +
                                                    "' has no targets"});
    }
    std::unordered_set<std::string> seen;
    for (const auto& t : rule.targets) {
      if (!declared.count(t)) {
        out.push_back({ViolationKind::kUndeclared,
                       std::string(kind) + " rule for '" + rule.subject +
                           "' references undeclared attribute '" + t + "'"});
      }
      if (t == rule.subject) {
        out.push_back({ViolationKind::kSelfReference,
                       std::string(kind) + " rule for '" + rule.subject +
                           "' references its own subject"});
      }
      if (!seen.insert(t).second) {
        out.push_back({ViolationKind::kDuplicate,
                       std::string(kind) + " rule for '" + rule.subject +
                           "' lists '" + t + "' twice"});
      }
    }
  }
}

std::vector<std::size_t> to_indices(
    const std::vector<std::string>& names,
    const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index.at(n));
  return out;
}

std::vector<std::string> to_names(const std::vector<std::size_t>& indices,
                                  const std::vector<std::string>& attrs) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(attrs[i]);
  return out;
}

// Directed exclusion pairs implied by exclusive groups.
std::set<std::pair<std::size_t, std::size_t>> group_exclusion_pairs(
    const std::vector<AttributeGroup>& groups) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& g : groups) {
    if (!g.exclusive) continue;
    for (auto a : g.members) {
      for (auto b : g.members) {
        if (a != b) pairs.emplace(a, b);
      }
    }
  }
  return pairs;
}

}  // namespace

std::vector<Violation> validate_schema(const SchemaDraft& draft) {
  std::vector<Violation> out;
  if (draft.name.empty()) {
    out.push_back({ViolationKind::kEmptyName, "schema name is empty"});
  }

  std::unordered_set<std::string> declared;
  for (const auto& a : draft.attributes) {
    if (a.empty()) {
      out.push_back({ViolationKind::kEmptyName, "empty attribute name"});
      continue;
    }
    if (!declared.insert(a).second) {
      out.push_back(
          {ViolationKind::kDuplicate, "attribute '" + a + "' declared twice"});
    }
  }

  std::unordered_set<std::string> group_names;
  for (const auto& g : draft.groups) {
    if (g.name.empty()) {
      out.push_back({ViolationKind::kEmptyName, "empty group name"});
    } else if (!group_names.insert(g.name).second) {
      out.push_back(
          {ViolationKind::kDuplicate, "group '" + g.name + "' declared twice"});
    }
    if (!g.exclusive && !g.exhaustive) {
      out.push_back({ViolationKind::kMissingFlags,
                     "group '" + g.name +
                         "' is neither exclusive nor exhaustive"});
    }
    if (g.members.size() < 2) {
      out.push_back({ViolationKind::kGroupSize,
                     "group '" + g.name + "' has " +
                         std::to_string(g.members.size()) +
                         " member(s); at least 2 required"});
    }
    std::unordered_set<std::string> seen;
    for (const auto& m : g.members) {
      if (!declared.count(m)) {
        out.push_back({ViolationKind::kUndeclared,
                       "group '" + g.name +
                           "' references undeclared attribute '" + m + "'"});
      }
      if (!seen.insert(m).second) {
        out.push_back({ViolationKind::kDuplicate,
                       "group '" + g.name + "' lists '" + m + "' twice"});
      }
    }
  }

  check_rule_list(draft.exclusions, "exclusion", declared, out);
  check_rule_list(draft.dependencies, "dependency", declared, out);
  return out;
}

AttributeSchema AttributeSchema::build(const SchemaDraft& draft) {
  auto violations = validate_schema(draft);
  if (!violations.empty()) {
    std::string msg = "invalid schema '" + draft.name + "':";
    for (const auto& v : violations) msg += " " + v.message + ";";
    msg.pop_back();
    throw Error(ErrorCode::kSchemaInvalid, msg);
  }

  AttributeSchema s;
  s.name_ = draft.name;
  s.attributes_ = draft.attributes;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.attributes_.size(); ++i) {
    index.emplace(s.attributes_[i], i);
  }

  for (const auto& g : draft.groups) {
    AttributeGroup group{g.name, to_indices(g.members, index), g.exclusive,
                         g.exhaustive};
    if (group.exhaustive) s.exhaustive_.push_back(group);
    s.groups_.push_back(std::move(group));
  }

  std::vector<std::set<std::size_t>> excluded(s.attributes_.size());
  for (auto [a, b] : group_exclusion_pairs(s.groups_)) excluded[a].insert(b);
  for (const auto& rule : draft.exclusions) {
    auto subject = index.at(rule.subject);
    for (const auto& t : rule.targets) excluded[subject].insert(index.at(t));
  }
  for (std::size_t a = 0; a < excluded.size(); ++a) {
    if (excluded[a].empty()) continue;
    s.exclusions_.push_back(
        {a, std::vector<std::size_t>(excluded[a].begin(), excluded[a].end())});
  }

  for (const auto& rule : draft.dependencies) {
    s.dependencies_.push_back(
        {index.at(rule.subject), to_indices(rule.targets, index)});
  }
  return s;
}

std::optional<std::size_t> AttributeSchema::index_of(
    std::string_view attribute) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), attribute);
  if (it == attributes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes_.begin());
}

SchemaDraft AttributeSchema::draft() const {
  SchemaDraft d;
  d.name = name_;
  d.attributes = attributes_;
  for (const auto& g : groups_) {
    d.groups.push_back(
        {g.name, to_names(g.members, attributes_), g.exclusive, g.exhaustive});
  }
  auto implied = group_exclusion_pairs(groups_);
  for (const auto& rule : exclusions_) {
    std::vector<std::size_t> extra;
    for (auto b : rule.excluded) {
      if (!implied.count({rule.subject, b})) extra.push_back(b);
    }
    if (!extra.empty()) {
      d.exclusions.push_back(
          {attributes_[rule.subject], to_names(extra, attributes_)});
    }
  }
  for (const auto& rule : dependencies_) {
    d.dependencies.push_back(
        {attributes_[rule.subject], to_names(rule.any_of, attributes_)});
  }
  return d;
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
  return name_ == other.name_ && attributes_ == other.attributes_ &&
         groups_ == other.groups_ && exclusions_ == other.exclusions_ &&
         dependencies_ == other.dependencies_;
}

// ---------------------------------------------------------------------------
// DSL parser

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == ':') {
      tokens.push_back({line.substr(i, 1), i + 1});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != ':' && line[i] != '#') {
      ++i;
    }
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

class Parser {
 public:
  AttributeSchema run(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      line_ = line_no;
      parse_line(tokenize(text.substr(pos, end - pos)));
      pos = end + 1;
    }
    if (!have_schema_) {
      throw ParseError(ErrorCode::kSchemaSyntax, 1, 1,
                       "missing 'schema <name>' directive");
    }
    return AttributeSchema::build(draft_);
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const Token& at,
                         const std::string& msg) const {
    throw ParseError(code, line_, at.column, msg);
  }

  void expect_identifier(const Token& t) const {
    if (!is_identifier(t.text)) {
      fail(ErrorCode::kSchemaSyntax, t,
           "expected identifier, found '" + std::string(t.text) + "'");
    }
  }

  void expect_declared(const Token& t) const {
    expect_identifier(t);
    if (!declared_.count(std::string(t.text))) {
      fail(ErrorCode::kSchemaUndeclared, t,
           "reference to undeclared attribute '" + std::string(t.text) +
               "' on line " + std::to_string(line_));
    }
  }

  // Parses "<ident>... " after a ':' token at `colon`; at least one entry.
  std::vector<std::string> parse_list(const std::vector<Token>& tokens,
                                      std::size_t from,
                                      const std::string& owner) const {
    if (from >= tokens.size()) {
      fail(ErrorCode::kSchemaSyntax, tokens[from - 1],
           "expected attribute list after ':'");
    }
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = from; i < tokens.size(); ++i) {
      expect_declared(tokens[i]);
      std::string name(tokens[i].text);
      if (name == owner) {
        fail(ErrorCode::kSchemaSelfReference, tokens[i],
             "'" + name + "' references itself");
      }
      if (!seen.insert(name).second) {
        fail(ErrorCode::kSchemaDuplicate, tokens[i],
             "'" + name + "' listed twice");
      }
      out.push_back(std::move(name));
    }
    return out;
  }

  std::size_t find_colon(const std::vector<Token>& tokens,
                         std::size_t from) const {
    for (std::size_t i = from; i < tokens.size(); ++i) {
      if (tokens[i].text == ":") return i;
    }
    fail(ErrorCode::kSchemaSyntax, tokens.back(), "expected ':'");
  }

  void parse_line(const std::vector<Token>& tokens) {
    if (tokens.empty()) return;
    const auto& head = tokens.front();
    if (head.text == "schema") {
      if (have_schema_) {
        fail(ErrorCode::kSchemaSyntax, head, "duplicate 'schema' directive");
      }
      if (tokens.size() != 2) {
        fail(ErrorCode::kSchemaSyntax, head, "expected 'schema <name>'");
      }
      expect_identifier(tokens[1]);
      draft_.name = std::string(tokens[1].text);
      have_schema_ = true;
      return;
    }
    if (!have_schema_) {
      fail(ErrorCode::kSchemaSyntax, head,
           "expected 'schema <name>' before other directives");
    }
    if (head.text == "attrs") {
      parse_attrs(tokens);
    } else if (head.text == "group") {
      parse_group(tokens);
    } else if (head.text == "require" || head.text == "exclude") {
      parse_rule(tokens);
    } else {
      fail(ErrorCode::kSchemaSyntax, head,
           "unknown directive '" + std::string(head.text) + "'");
    }
  }

  void parse_attrs(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) {
      fail(ErrorCode::kSchemaSyntax, tokens[0], "expected attribute names");
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      expect_identifier(tokens[i]);
      std::string name(tokens[i].text);
      if (!declared_.insert(name).second) {
        fail(ErrorCode::kSchemaDuplicate, tokens[i],
             "duplicate attribute '" + name + "'");
      }
      draft_.attributes.push_back(std::move(name));
    }
  }

  void parse_group(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) {
      fail(ErrorCode::kSchemaSyntax, tokens[0], "expected group name");
    }
    const auto& name_tok = tokens[1];
    expect_identifier(name_tok);
    std::string name(name_tok.text);
    if (!group_names_.insert(name).second) {
      fail(ErrorCode::kSchemaDuplicate, name_tok,
           "duplicate group '" + name + "'");
    }
    auto colon = find_colon(tokens, 2);
    GroupDecl group{name, {}, false, false};
    for (std::size_t i = 2; i < colon; ++i) {
      bool* flag = nullptr;
      if (tokens[i].text == "exclusive") flag = &group.exclusive;
      if (tokens[i].text == "exhaustive") flag = &group.exhaustive;
      if (flag == nullptr || *flag) {
        fail(ErrorCode::kSchemaSyntax, tokens[i],
             "expected 'exclusive' or 'exhaustive', found '" +
                 std::string(tokens[i].text) + "'");
      }
      *flag = true;
    }
    if (!group.exclusive && !group.exhaustive) {
      fail(ErrorCode::kSchemaSyntax, tokens[colon],
           "group needs 'exclusive' and/or 'exhaustive'");
    }
    group.members = parse_list(tokens, colon + 1, "");
    if (group.members.size() < 2) {
      fail(ErrorCode::kSchemaGroupSize, name_tok,
           "group '" + name + "' has fewer than 2 members");
    }
    draft_.groups.push_back(std::move(group));
  }

  void parse_rule(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) {
      fail(ErrorCode::kSchemaSyntax, tokens[0], "expected subject attribute");
    }
    const auto& subject_tok = tokens[1];
    expect_declared(subject_tok);
    if (tokens.size() < 3 || tokens[2].text != ":") {
      fail(ErrorCode::kSchemaSyntax,
           tokens.size() < 3 ? subject_tok : tokens[2],
           "expected ':' after subject");
    }
    std::string subject(subject_tok.text);
    RuleDecl rule{subject, parse_list(tokens, 3, subject)};
    if (tokens[0].text == "require") {
      draft_.dependencies.push_back(std::move(rule));
    } else {
      draft_.exclusions.push_back(std::move(rule));
    }
  }

  std::size_t line_ = 0;
  bool have_schema_ = false;
  SchemaDraft draft_;
  std::unordered_set<std::string> declared_;
  std::unordered_set<std::string> group_names_;
};

void write_list(std::ostringstream& os, const std::vector<std::string>& xs) {
  for (const auto& x : xs) os << ' ' << x;
}

}  // namespace

AttributeSchema parse_schema(std::string_view text) {
  return Parser{}.run(text);
}

std::string serialize(const AttributeSchema& schema) {
  auto d = schema.draft();
  std::ostringstream os;
  os << "schema " << d.name << '\n';
  constexpr std::size_t kPerLine = 6;
  for (std::size_t i = 0; i < d.attributes.size(); i += kPerLine) {
    os << "attrs";
    for (std::size_t j = i; j < std::min(i + kPerLine, d.attributes.size());
         ++j) {
      os << ' ' << d.attributes[j];
    }
    os << '\n';
  }
  for (const auto& g : d.groups) {
    os << "group " << g.name;
    if (g.exclusive) os << " exclusive";
    if (g.exhaustive) os << " exhaustive";
    os << " :";
    write_list(os, g.members);
    os << '\n';
  }
  for (const auto& r : d.exclusions) {
    os << "exclude " << r.subject << " :";
    write_list(os, r.targets);
    os << '\n';
  }
  for (const auto& r : d.dependencies) {
    os << "require " << r.subject << " :";
    write_list(os, r.targets);
    os << '\n';
  }
  return os.str();
}

const AttributeSchema& fh37k_default() {
  static const AttributeSchema schema = [] {
    SchemaDraft d;
    d.name = "fh37k";
    d.attributes = {
        "clean_shaven",         "chin_area",
        "side_to_side",         "beard_area_info_not_vis",
        "five_oclock_shadow",   "short",
        "medium",               "long",
        "beard_length_info_not_vis",
        "mustache_none",        "mustache_isolated",
        "mustache_connected_to_beard",
        "mustache_info_not_vis",
        "sideburns_none",       "sideburns_present",
        "sideburns_connected_to_beard",
        "sideburns_info_not_vis",
        "bald_false",           "bald_top_only",
        "bald_sides_only",      "bald_top_and_sides",
        "bald_info_not_vis",
    };
    auto group = [](std::string name, std::vector<std::string> members) {
      return GroupDecl{std::move(name), std::move(members), true, true};
    };
    d.groups = {
        group("beard_area", {"clean_shaven", "chin_area", "side_to_side",
                             "beard_area_info_not_vis"}),
        group("beard_length",
              {"clean_shaven", "five_oclock_shadow", "short", "medium", "long",
               "beard_length_info_not_vis"}),
        group("mustache", {"mustache_none", "mustache_isolated",
                           "mustache_connected_to_beard",
                           "mustache_info_not_vis"}),
        group("sideburns", {"sideburns_none", "sideburns_present",
                            "sideburns_connected_to_beard",
                            "sideburns_info_not_vis"}),
        group("bald", {"bald_false", "bald_top_only", "bald_sides_only",
                       "bald_top_and_sides", "bald_info_not_vis"}),
    };
    const std::vector<std::string> beard = {"chin_area", "side_to_side"};
    d.dependencies = {
        {"mustache_connected_to_beard", beard},
        {"sideburns_connected_to_beard", {"side_to_side"}},
        {"five_oclock_shadow", beard},
        {"short", beard},
        {"medium", beard},
        {"long", beard},
    };
    return AttributeSchema::build(d);
  }();
  return schema;
}

AttributeSchema load_schema(std::string_view spec) {
  if (spec == "builtin:fh37k") return fh37k_default();
  std::ifstream in{std::string(spec), std::ios::binary};
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open schema file '" +
                                    std::string(spec) + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

}  // namespace lcpkit
