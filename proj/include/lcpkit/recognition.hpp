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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcpkit {

// Beard-area categories used for recognition analysis. Codes are the byte
// values stored in embedding files.
enum class BeardArea : std::uint8_t { kCleanShaven = 0, kChinArea = 1, kSideToSide = 2 };

std::string_view beard_area_name(BeardArea a) noexcept;  // "CS", "CA", "S2S"

enum class PairCategory : std::uint8_t {
  kCaCa,
  kCaCs,
  kCaS2s,
  kCsCs,
  kCsS2s,
  kS2sS2s,
};

inline constexpr std::array<PairCategory, 6> kPairCategories = {
    PairCategory::kCaCa, PairCategory::kCaCs,  PairCategory::kCaS2s,
    PairCategory::kCsCs, PairCategory::kCsS2s, PairCategory::kS2sS2s};

PairCategory pair_category(BeardArea a, BeardArea b) noexcept;
std::string_view pair_category_name(PairCategory c) noexcept;  // "(CA,CS)"

// Demographic codes 0..3 are WM, BM, IM, AM; other codes print as "D<n>".
std::string demographic_name(std::uint8_t code);
std::optional<std::uint8_t> demographic_code(std::string_view name);

struct EmbeddingRecord {
  std::string image_id;
  std::string subject_id;
  std::uint8_t demographic = 0;
  BeardArea area = BeardArea::kCleanShaven;
  float confidence = 1.0f;
  std::vector<float> features;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingSet {
  std::uint32_t dim = 0;
  std::vector<EmbeddingRecord> records;

  bool operator==(const EmbeddingSet&) const = default;
};

// Binary layout (little-endian): "EMB1", u32 count, u32 dim, then per
// record: u16 id length + id bytes, u16 subject length + subject bytes,
// u8 demographic, u8 beard area, f32 confidence, dim x f32.
std::string encode_embeddings(const EmbeddingSet& set);
EmbeddingSet decode_embeddings(std::string_view bytes);
EmbeddingSet load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const EmbeddingSet& set);

// Keeps records with confidence >= min_conf; min_conf must lie in [0, 1].
EmbeddingSet filter_high_confidence(const EmbeddingSet& set, double min_conf);

// Cosine of the angle between a and b, clamped to [-1, 1].
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct ScoredPair {
  std::size_t first;   // record indices into the EmbeddingSet, first < second
  std::size_t second;
  PairCategory category;
  double score;

  bool operator==(const ScoredPair&) const = default;
};

struct PairScores {
  std::uint8_t demographic = 0;
  std::vector<ScoredPair> genuine;
  std::vector<ScoredPair> impostor;
};

// Every unordered pair of records within one demographic, split by subject
// identity. Output order is (first, second) lexicographic for any thread
// count. Throws Error(kInput) if fewer than 2 records carry the tag.
PairScores pair_scores(const EmbeddingSet& set, std::uint8_t demographic,
                       unsigned threads = 1);

// Demographic codes present in the set, ascending.
std::vector<std::uint8_t> demographics_in(const EmbeddingSet& set);

struct Calibration {
  double threshold = 0.0;
  double target_fmr = 0.0;
  double achieved_fmr = 0.0;
  std::size_t n_scores = 0;
  std::size_t n_at_or_above = 0;
};

// Smallest observed score t with #(score >= t) / n <= target_fmr. When no
// observed score qualifies (ties at the top), returns the next representable
// value above the maximum, with FMR 0. Requires n >= 1 / target_fmr.
Calibration calibrate_threshold(std::span<const double> impostor_scores,
                                double target_fmr);
Calibration calibrate_threshold(const PairScores& reference, double target_fmr);

struct FmrCell {
  std::uint8_t demographic = 0;
  PairCategory category = PairCategory::kCaCa;
  std::size_t n_pairs = 0;          // impostor pairs in the category
  std::size_t n_false_matches = 0;  // of those, score >= threshold
  std::optional<double> fmr;        // empty when n_pairs == 0

  bool operator==(const FmrCell&) const = default;
};

struct FmrReport {
  std::string matcher;
  double threshold = 0.0;
  std::uint8_t reference_demographic = 0;
  double target_fmr = 0.0;
  double reference_fmr = 0.0;  // achieved on the calibration stream
  std::vector<std::uint8_t> demographics;
  std::vector<FmrCell> cells;  // demographic-major, categories in enum order

  const FmrCell& cell(std::uint8_t demographic, PairCategory category) const;
};

// One shared threshold applied to every demographic.
FmrReport fmr_by_category(const std::vector<PairScores>& per_demographic,
                          const Calibration& calibration,
                          std::uint8_t reference_demographic,
                          std::string matcher = "");

std::string fmr_report_json(const FmrReport& report, int indent = 2);

// Category rows, N_pairs and FMR columns per demographic; with several
// reports (one per matcher) each category gets one FMR line per matcher.
std::string fmr_table(std::span<const FmrReport> reports);

struct Histogram {
  std::uint8_t demographic = 0;
  bool genuine = false;
  PairCategory category = PairCategory::kCaCa;
  std::vector<std::size_t> counts;  // equal-width bins over [-1, 1]
};

// Genuine then impostor, categories in enum order. bins >= 2.
std::vector<Histogram> distribution_histograms(const PairScores& scores,
                                               std::size_t bins);

// Header: demographic,kind,category,bin_low,bin_high,count. Categories are
// written as CA_CS etc.
std::string histograms_csv(const std::vector<Histogram>& histograms);

}  // namespace lcpkit
