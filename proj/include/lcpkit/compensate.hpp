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

#include <cstdint>
#include <span>
#include <vector>

#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit {

// Label compensation. For each exhaustive group in declaration order, if no
// member is positive, sets the member with the highest raw score (lowest
// index on ties). Emptiness is re-checked per group, so a fill of a shared
// attribute counts for every later group containing it. Only 0 -> 1 flips.
void compensate_in_place(const AttributeSchema& schema,
                         std::span<const double> scores,
                         std::span<std::uint8_t> row);

std::vector<std::uint8_t> compensate_vector(const AttributeSchema& schema,
                                            std::span<const double> scores,
                                            std::span<const std::uint8_t> row);

// binarize() followed by compensation of every row.
BinaryMatrix compensate_dataset(const AttributeSchema& schema,
                                const ScoreMatrix& scores, double threshold);

}  // namespace lcpkit
