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

// Unbiased estimation of the OR (maximum) and AND (minimum) of hidden bits
// that are only observed through randomized response.
//
// Each observed bit b with flip probability q is debiased to
// d = (b - q) / (1 - 2q), which has expectation equal to the hidden bit x.
// Because observations are independent, products of debiased factors are
// unbiased for products of hidden bits:
//
//   AND:  min_i x_i = prod_i x_i        estimated by  prod_i d_i
//   OR:   max_i x_i = 1 - prod_i (1-x_i) estimated by 1 - prod_i (1 - d_i)
//
// with 1 - d_i = (1 - q_i - b_i) / (1 - 2q_i). The accumulator keeps only the
// running product and a count, so estimates can be built online, sharded, and
// merged in any order.
//
// Estimates are deliberately not clamped to [0, 1]. A single OR estimate over
// two zero observations at q = 0.25 is -1.25; clamping would bias the sum of
// many such estimates.
//
// The product is held in a plain double. For a long run of zero observations
// under OR its magnitude grows like ((1-q)/(1-2q))^n and eventually overflows
// to infinity; interleaved ones shrink it towards zero instead.

#ifndef RREXTREME_EXTREME_ESTIMATOR_H_
#define RREXTREME_EXTREME_ESTIMATOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "rrextreme/randomized_response.h"

namespace rrextreme {

enum class ExtremeKind { kOr, kAnd };

const char* ExtremeKindName(ExtremeKind kind);

class ExtremeAccumulator {
 public:
  explicit ExtremeAccumulator(ExtremeKind kind) : kind_(kind) {}

  // Builds an accumulator from a batch of observations.
  static ExtremeAccumulator FromBits(ExtremeKind kind,
                                     std::span<const NoisyBit> bits);

  // O(1): multiplies in one debiased factor.
  void Ingest(const NoisyBit& bit) { Ingest(bit.value, bit.noise); }
  void Ingest(bool observed, const NoiseParam& noise);

  // The unbiased estimate: 1 - product for OR, product for AND.
  // Returns FailedPrecondition if nothing has been ingested.
  absl::StatusOr<double> Estimate() const;

  ExtremeKind kind() const { return kind_; }
  double product() const { return product_; }
  std::uint64_t count() const { return count_; }

 private:
  friend absl::StatusOr<ExtremeAccumulator> Merge(const ExtremeAccumulator&,
                                                  const ExtremeAccumulator&);
  void MergeFrom(const ExtremeAccumulator& other);

  ExtremeKind kind_;
  double product_ = 1.0;
  std::uint64_t count_ = 0;
};

// Combines two accumulators over disjoint observations. Returns
// InvalidArgument if the kinds differ.
absl::StatusOr<ExtremeAccumulator> Merge(const ExtremeAccumulator& a,
                                         const ExtremeAccumulator& b);

// Running prod_i (1 + v_i) with v_i = q_i(1-q_i)/(1-2q_i)^2, from which the
// worst-case variance over all hidden-bit assignments follows without knowing
// the hidden bits. Mergeable like ExtremeAccumulator.
class VarianceBoundAccumulator {
 public:
  void Add(const NoiseParam& noise) {
    product_ *= 1.0 + noise.noise_term();
    ++count_;
  }
  void MergeFrom(const VarianceBoundAccumulator& other) {
    product_ *= other.product_;
    count_ += other.count_;
  }
  // prod_i (1 + v_i) - 1; zero when nothing has been added.
  double Bound() const { return product_ - 1.0; }
  std::uint64_t count() const { return count_; }

 private:
  double product_ = 1.0;
  std::uint64_t count_ = 0;
};

struct VarianceReport {
  double variance;
  // v_i = q_i(1-q_i)/(1-2q_i)^2, in input order.
  std::vector<double> per_bit_noise_terms;
};

// Exact variance of the OR estimate given the hidden bits:
//   prod_i (1 - x_i + v_i) - [sum_i x_i == 0].
// Requires the hidden bits, so it is meant for simulation and testing.
// Returns InvalidArgument on empty or mismatched inputs or non-binary bits.
absl::StatusOr<VarianceReport> VarianceOr(std::span<const Bit> hidden_bits,
                                          std::span<const NoiseParam> noises);

// Exact variance of the AND estimate: prod_i (x_i + v_i) - [all x_i == 1].
absl::StatusOr<VarianceReport> VarianceAnd(std::span<const Bit> hidden_bits,
                                           std::span<const NoiseParam> noises);

// prod_i (1 + v_i) - 1, the maximum of the exact variance over every hidden
// assignment. It is attained at all zeros for OR and all ones for AND, so the
// value is the same for both kinds.
absl::StatusOr<double> VarianceUpperBound(std::span<const NoiseParam> noises,
                                          ExtremeKind kind);

}  // namespace rrextreme

#endif  // RREXTREME_EXTREME_ESTIMATOR_H_
