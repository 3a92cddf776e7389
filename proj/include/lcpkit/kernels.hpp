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
#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant; the variant is chosen once
// at startup from CPUID and may be overridden for testing.
namespace lcpkit::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa) noexcept;

// Best instruction set supported by this CPU and build.
Isa detected_isa() noexcept;

// Instruction set currently used by the dispatching entry points.
Isa active_isa() noexcept;

// Returns false (and leaves the selection unchanged) if `isa` is not
// supported here. Not thread-safe; call before starting workers.
bool select_isa(Isa isa) noexcept;

// Sum of a[i] * b[i]. Lengths must match.
double dot(std::span<const double> a, std::span<const double> b);

// Float inputs, double accumulation.
double dot(std::span<const float> a, std::span<const float> b);

// y[i] += alpha * x[i]. Bitwise identical across variants (no FMA).
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// out[i] = x[i] > threshold ? 1 : 0. Bitwise identical across variants.
void threshold_greater(std::span<const double> x, double threshold,
                       std::span<std::uint8_t> out);

// Index of the first non-finite entry, or x.size() if all are finite.
std::size_t find_non_finite(std::span<const double> x);

// Per-variant entry points, exposed for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot(const float* a, const float* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void threshold_greater(const double* x, double threshold, std::uint8_t* out,
                       std::size_t n);
std::size_t find_non_finite(const double* x, std::size_t n);
}  // namespace scalar

#if defined(LCPKIT_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double dot(const float* a, const float* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void threshold_greater(const double* x, double threshold, std::uint8_t* out,
                       std::size_t n);
std::size_t find_non_finite(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace lcpkit::kernels
