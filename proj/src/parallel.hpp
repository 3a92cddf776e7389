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

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace lcpkit::detail {

// Splits [0, n) into at most `threads` contiguous shards and runs
// fn(shard_index, begin, end) on each. Shard boundaries depend only on n and
// the shard count, so callers that merge per-shard results in shard order get
// the same answer for any thread count when the merge is order-independent.
template <typename Fn>
std::size_t run_sharded(std::size_t n, unsigned threads, Fn&& fn) {
  std::size_t shards = std::max<std::size_t>(
      1, std::min<std::size_t>(threads == 0 ? 1 : threads, n));
  std::size_t chunk = (n + shards - 1) / std::max<std::size_t>(shards, 1);
  if (shards == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return 1;
  }
  std::vector<std::thread> workers;
  workers.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    std::size_t begin = std::min(n, s * chunk);
    std::size_t end = std::min(n, begin + chunk);
    workers.emplace_back([&fn, s, begin, end] { fn(s, begin, end); });
  }
  for (auto& w : workers) w.join();
  return shards;
}

inline unsigned default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace lcpkit::detail
