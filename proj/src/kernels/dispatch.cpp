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

#include "lcpkit/kernels.hpp"

#include <string>

#include "lcpkit/error.hpp"

namespace lcpkit::kernels {

namespace {

struct Table {
  double (*dot_f64)(const double*, const double*, std::size_t);
  double (*dot_f32)(const float*, const float*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*threshold_greater)(const double*, double, std::uint8_t*, std::size_t);
  std::size_t (*find_non_finite)(const double*, std::size_t);
};

constexpr Table kScalarTable{scalar::dot, scalar::dot, scalar::axpy,
                             scalar::threshold_greater,
                             scalar::find_non_finite};

#if defined(LCPKIT_HAVE_AVX2)
constexpr Table kAvx2Table{avx2::dot, avx2::dot, avx2::axpy,
                           avx2::threshold_greater, avx2::find_non_finite};
#endif

bool cpu_has_avx2() noexcept {
#if defined(LCPKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Isa isa) noexcept {
#if defined(LCPKIT_HAVE_AVX2)
  if (isa == Isa::kAvx2) return &kAvx2Table;
#endif
  (void)isa;
  return &kScalarTable;
}

struct Dispatch {
  Isa isa;
  const Table* table;
};

Dispatch& dispatch() noexcept {
  static Dispatch d = [] {
    Isa isa = detected_isa();
    return Dispatch{isa, table_for(isa)};
  }();
  return d;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimension, std::string(what) + ": length " +
                                           std::to_string(a) + " vs " +
                                           std::to_string(b));
  }
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

Isa detected_isa() noexcept {
  static const Isa isa = cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
  return isa;
}

Isa active_isa() noexcept { return dispatch().isa; }

bool select_isa(Isa isa) noexcept {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2) return false;
  dispatch() = Dispatch{isa, table_for(isa)};
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  return dispatch().table->dot_f64(a.data(), b.data(), a.size());
}

double dot(std::span<const float> a, std::span<const float> b) {
  check_sizes(a.size(), b.size(), "dot");
  return dispatch().table->dot_f32(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  dispatch().table->axpy(alpha, x.data(), y.data(), x.size());
}

void threshold_greater(std::span<const double> x, double threshold,
                       std::span<std::uint8_t> out) {
  check_sizes(x.size(), out.size(), "threshold_greater");
  dispatch().table->threshold_greater(x.data(), threshold, out.data(),
                                      x.size());
}

std::size_t find_non_finite(std::span<const double> x) {
  return dispatch().table->find_non_finite(x.data(), x.size());
}

}  // namespace lcpkit::kernels
