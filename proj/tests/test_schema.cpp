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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "lcpkit/error.hpp"
#include "lcpkit/schema.hpp"
#include "oracles.hpp"

using namespace lcpkit;

namespace {

ErrorCode parse_error_code(std::string_view text, std::size_t* line = nullptr,
                           std::string* message = nullptr) {
  try {
    parse_schema(text);
  } catch (const ParseError& e) {
    if (line) *line = e.line();
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("minimal document: one exclusive exhaustive pair") {
  auto s = parse_schema(
      "schema tiny\n"
      "attrs a b\n"
      "group ab exclusive exhaustive : a b\n");
  CHECK(s.name() == "tiny");
  CHECK(s.attributes() == std::vector<std::string>{"a", "b"});
  REQUIRE(s.exclusion_rules().size() == 2);
  CHECK(s.exclusion_rules()[0] == ExclusionRule{0, {1}});
  CHECK(s.exclusion_rules()[1] == ExclusionRule{1, {0}});
  REQUIRE(s.exhaustive_groups().size() == 1);
  CHECK(s.exhaustive_groups()[0].members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("comments, blank lines and split attrs lines") {
  auto s = parse_schema(
      "# header comment\n"
      "\n"
      "schema s   # trailing\n"
      "attrs a b\n"
      "attrs c\n"
      "require c: a b\n"
      "exclude a : c\n");
  CHECK(s.size() == 3);
  REQUIRE(s.dependency_rules().size() == 1);
  CHECK(s.dependency_rules()[0] == DependencyRule{2, {0, 1}});
  REQUIRE(s.exclusion_rules().size() == 1);
  CHECK(s.exclusion_rules()[0] == ExclusionRule{0, {2}});
}

TEST_CASE("undeclared reference names the attribute and its line") {
  std::size_t line = 0;
  std::string msg;
  auto code = parse_error_code(
      "schema s\nattrs a b\nrequire a : c\n", &line, &msg);
  CHECK(code == ErrorCode::kSchemaUndeclared);
  CHECK(line == 3);
  CHECK(msg.find("'c'") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("each parse error class is reported with its position") {
  std::size_t line = 0;
  CHECK(parse_error_code("schema s\nattrs a b\nfrobnicate a\n", &line) ==
        ErrorCode::kSchemaSyntax);
  CHECK(line == 3);
  CHECK(parse_error_code("attrs a\n") == ErrorCode::kSchemaSyntax);
  CHECK(parse_error_code("") == ErrorCode::kSchemaSyntax);
  CHECK(parse_error_code("schema s\nattrs a b\nrequire a b\n") ==
        ErrorCode::kSchemaSyntax);
  CHECK(parse_error_code("schema s\nattrs a 9b\n") == ErrorCode::kSchemaSyntax);
  CHECK(parse_error_code("schema s\nattrs a b\ngroup g : a b\n") ==
        ErrorCode::kSchemaSyntax);
  CHECK(parse_error_code("schema s\nattrs a b\ngroup g exclusive exclusive : a b\n") ==
        ErrorCode::kSchemaSyntax);

  CHECK(parse_error_code("schema s\nattrs a b\nattrs a\n", &line) ==
        ErrorCode::kSchemaDuplicate);
  CHECK(line == 3);
  CHECK(parse_error_code("schema s\nattrs a b c\ngroup g exclusive : a b\n"
                         "group g exhaustive : b c\n") ==
        ErrorCode::kSchemaDuplicate);

  CHECK(parse_error_code("schema s\nattrs a b\nexclude a : a\n") ==
        ErrorCode::kSchemaSelfReference);
  CHECK(parse_error_code("schema s\nattrs a b\nrequire b : a b\n") ==
        ErrorCode::kSchemaSelfReference);

  CHECK(parse_error_code("schema s\nattrs a b\ngroup g exhaustive : a\n", &line) ==
        ErrorCode::kSchemaGroupSize);
  CHECK(line == 3);
}

TEST_CASE("column points at the offending token") {
  try {
    parse_schema("schema s\nattrs a b\nrequire a :   b zz\n");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 17);
  }
}

TEST_CASE("built-in schema shape") {
  const auto& s = fh37k_default();
  CHECK(s.size() == 22);
  CHECK(s.exhaustive_groups().size() == 5);
  CHECK(validate_schema(s.draft()).empty());

  std::size_t bald = 0;
  for (const auto& g : s.exhaustive_groups()) {
    if (g.name == "bald") bald = g.members.size();
    CHECK(g.exclusive);
  }
  CHECK(bald == 5);
  CHECK(s.size() - bald == 17);

  auto cs = *s.index_of("clean_shaven");
  auto in_groups = std::count_if(
      s.exhaustive_groups().begin(), s.exhaustive_groups().end(), [&](const auto& g) {
        return std::count(g.members.begin(), g.members.end(), cs) > 0;
      });
  CHECK(in_groups == 2);
  CHECK(s.dependency_rules().size() == 6);
}

TEST_CASE("serialize then parse is the identity on the built-in schema") {
  const auto& s = fh37k_default();
  auto text = serialize(s);
  CHECK(parse_schema(text) == s);
  CHECK(serialize(parse_schema(text)) == text);
}

TEST_CASE("validate_schema reports violations as data") {
  SchemaDraft d;
  d.name = "bad";
  d.attributes = {"x", "y"};
  d.exclusions = {{"x", {"x"}}};
  auto v = validate_schema(d);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kSelfReference);

  SchemaDraft g;
  g.name = "bad";
  g.attributes = {"x", "y"};
  g.groups = {{"solo", {"x"}, true, true}};
  v = validate_schema(g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kGroupSize);

  SchemaDraft u;
  u.name = "bad";
  u.attributes = {"x", "x", ""};
  u.dependencies = {{"x", {"nope"}}};
  v = validate_schema(u);
  CHECK(v.size() == 3);
  CHECK_THROWS_AS(AttributeSchema::build(u), Error);
}

TEST_CASE("property: random schemas round-trip and group exclusions are symmetric") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<std::size_t> n(2, 10);
    auto draft = oracle::random_draft(rng, n(rng));
    auto schema = AttributeSchema::build(draft);
    CHECK(parse_schema(serialize(schema)) == schema);

    auto no_explicit = draft;
    no_explicit.exclusions.clear();
    auto sym = AttributeSchema::build(no_explicit);
    std::vector<std::vector<std::uint8_t>> adj(sym.size(),
                                               std::vector<std::uint8_t>(sym.size()));
    for (const auto& r : sym.exclusion_rules()) {
      for (auto b : r.excluded) adj[r.subject][b] = 1;
    }
    for (std::size_t a = 0; a < sym.size(); ++a) {
      CHECK(adj[a][a] == 0);
      for (std::size_t b = 0; b < sym.size(); ++b) CHECK(adj[a][b] == adj[b][a]);
    }
  }
}

TEST_CASE("parsing is deterministic and keeps declaration order") {
  const char* text =
      "schema s\nattrs z y x\ngroup g exclusive : x z\nrequire y : z\n";
  auto a = parse_schema(text);
  auto b = parse_schema(text);
  CHECK(a == b);
  CHECK(a.attributes() == std::vector<std::string>{"z", "y", "x"});
  CHECK(*a.index_of("x") == 2);
  CHECK_FALSE(a.index_of("w").has_value());
}
