// Copyright 2026 The rrextreme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Set-union cardinality from privatized bit-vector sketches.
//
// A set S over the universe {1, ..., m} is encoded as the bit vector
// x_i = [i in S]. The size of a union of n sets is sum_i OR_j x_ij, so
// summing one unbiased OR estimate per position gives an unbiased estimate
// of the union size. Positions are privatized with independent draws, which
// makes the variance of the sum the sum of the per-position variances.

#ifndef RREXTREME_UNION_CARDINALITY_H_
#define RREXTREME_UNION_CARDINALITY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "rrextreme/randomized_response.h"

namespace rrextreme {

// Dense bit vector of one party's set. A privatized sketch records the single
// flip probability applied to all of its positions.
class UnionSketch {
 public:
  // Validates that m >= 1, bits has m binary entries, and that a noise
  // parameter is present exactly when the sketch is privatized.
  static absl::StatusOr<UnionSketch> Create(size_t m, std::vector<Bit> bits,
                                            std::optional<NoiseParam> noise,
                                            bool privatized);

  size_t m() const { return bits_.size(); }
  std::span<const Bit> bits() const { return bits_; }
  const std::optional<NoiseParam>& noise() const { return noise_; }
  bool privatized() const { return privatized_; }

  friend bool operator==(const UnionSketch&, const UnionSketch&) = default;

 private:
  UnionSketch(std::vector<Bit> bits, std::optional<NoiseParam> noise,
              bool privatized)
      : bits_(std::move(bits)), noise_(noise), privatized_(privatized) {}

  std::vector<Bit> bits_;
  std::optional<NoiseParam> noise_;
  bool privatized_;
};

// Encodes a set of 1-based elements. Duplicates are allowed.
// Returns OutOfRange for an element outside [1, m].
absl::StatusOr<UnionSketch> EncodeSet(std::span<const std::int64_t> elements,
                                      size_t m);

// Passes every position through randomized response. Returns
// FailedPrecondition if the sketch is already privatized.
absl::StatusOr<UnionSketch> PrivatizeSketch(const UnionSketch& sketch,
                                            const NoiseParam& noise,
                                            BitGenerator& rng);

struct UnionEstimate {
  // Raw unbiased value; may be fractional, negative, or above m.
  double cardinality;
  std::vector<double> per_position_estimates;
  // m * (prod_j (1 + v_j) - 1) over the parties' noise parameters.
  double variance_bound;
};

struct EstimateUnionOptions {
  // Positions are split into contiguous blocks, one per thread. The result
  // does not depend on the thread count.
  int num_threads = 1;
};

// Returns InvalidArgument for an empty input, mismatched universe sizes, or
// a sketch that has not been privatized.
absl::StatusOr<UnionEstimate> EstimateUnion(
    std::span<const UnionSketch> sketches,
    const EstimateUnionOptions& options = {});

// sum_i VarianceOr(column i, noises) for hidden bits laid out as one row of
// m bits per party. Test and simulation only.
absl::StatusOr<double> TrueVariance(
    std::span<const std::vector<Bit>> hidden_rows,
    std::span<const NoiseParam> noises);

}  // namespace rrextreme

#endif  // RREXTREME_UNION_CARDINALITY_H_
