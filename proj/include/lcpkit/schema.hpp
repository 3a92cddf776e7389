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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lcpkit {

// Unvalidated, name-based description of a schema. This is what the DSL
// parser produces and what validate_schema() inspects.
struct GroupDecl {
  std::string name;
  std::vector<std::string> members;
  bool exclusive = false;
  bool exhaustive = false;

  bool operator==(const GroupDecl&) const = default;
};

struct RuleDecl {
  std::string subject;
  std::vector<std::string> targets;

  bool operator==(const RuleDecl&) const = default;
};

struct SchemaDraft {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<GroupDecl> groups;
  // Directed: subject may not co-occur with any target.
  std::vector<RuleDecl> exclusions;
  // Subject positive requires at least one target positive.
  std::vector<RuleDecl> dependencies;
};

enum class ViolationKind {
  kEmptyName,
  kDuplicate,
  kUndeclared,
  kSelfReference,
  kGroupSize,
  kMissingFlags,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

std::vector<Violation> validate_schema(const SchemaDraft& draft);

struct ExclusionRule {
  std::size_t subject;
  std::vector<std::size_t> excluded;  // ascending

  bool operator==(const ExclusionRule&) const = default;
};

struct DependencyRule {
  std::size_t subject;
  std::vector<std::size_t> any_of;

  bool operator==(const DependencyRule&) const = default;
};

struct AttributeGroup {
  std::string name;
  std::vector<std::size_t> members;
  bool exclusive = false;
  bool exhaustive = false;

  bool operator==(const AttributeGroup&) const = default;
};

// Validated attribute universe and constraints, indexed by column. Immutable
// once built.
//
// Exclusions are stored per subject: one rule per attribute that excludes
// anything, merging group-derived and explicit exclusions. Dependency rules
// keep declaration order and are never merged, since two `require` lines on
// one subject are two separate conditions.
class AttributeSchema {
 public:
  // Throws Error(kSchemaInvalid) listing every violation.
  static AttributeSchema build(const SchemaDraft& draft);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& attributes() const noexcept {
    return attributes_;
  }
  std::size_t size() const noexcept { return attributes_.size(); }
  const std::string& attribute(std::size_t i) const { return attributes_[i]; }
  std::optional<std::size_t> index_of(std::string_view attribute) const;

  const std::vector<ExclusionRule>& exclusion_rules() const noexcept {
    return exclusions_;
  }
  const std::vector<DependencyRule>& dependency_rules() const noexcept {
    return dependencies_;
  }
  // Every declared group, exclusive and/or exhaustive.
  const std::vector<AttributeGroup>& groups() const noexcept { return groups_; }
  // The subset of groups() that are collectively exhaustive, in order.
  const std::vector<AttributeGroup>& exhaustive_groups() const noexcept {
    return exhaustive_;
  }

  // Name-based form; serialize() and build(draft()) round-trip.
  SchemaDraft draft() const;

  // Canonical-form equality.
  bool operator==(const AttributeSchema& other) const;

 private:
  std::string name_;
  std::vector<std::string> attributes_;
  std::vector<AttributeGroup> groups_;
  std::vector<AttributeGroup> exhaustive_;
  std::vector<ExclusionRule> exclusions_;
  std::vector<DependencyRule> dependencies_;
};

// Parses the line-oriented constraint DSL. Throws ParseError.
AttributeSchema parse_schema(std::string_view text);

// Canonical DSL text. Exclusions implied by exclusive groups are not
// repeated as `exclude` lines.
std::string serialize(const AttributeSchema& schema);

// The built-in 22-attribute facial-hair schema: five groups, each mutually
// exclusive and collectively exhaustive, with clean_shaven shared by the
// beard-area and beard-length groups. The dependency rules are a
// reconstruction from the attribute definitions, not a published rule list.
const AttributeSchema& fh37k_default();

// "builtin:fh37k" or a path to a DSL file.
AttributeSchema load_schema(std::string_view spec);

}  // namespace lcpkit
