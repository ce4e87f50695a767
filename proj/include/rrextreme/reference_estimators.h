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

// Two matrix-based OR estimators that serve as independent cross-checks of
// ExtremeAccumulator.
//
// Convolution estimator (equal q only). With n hidden bits of which t are
// set, the observed count of ones is distributed as
// Binomial(t, 1-q) + Binomial(n-t, q). Column t of the (n+1)x(n+1)
// transition matrix P holds that distribution. Reading the inverse:
//
//   estimate = 1 - inverse(P)[0, S]      S = observed count of ones.
//
// Kronecker estimator (any q_i). The joint transition matrix over all 2^n
// bit patterns is K = kron_i [[1-q_i, q_i], [q_i, 1-q_i]]. Its inverse is
// kron_i of the 2x2 inverses, so the top-row entry for an observed pattern
// factors into a per-bit product:
//
//   estimate = 1 - prod_i f_i,  f_i = (1-q_i)/(1-2q_i) if b_i = 0
//                                     -q_i/(1-2q_i)    if b_i = 1.
//
// Patterns map to matrix indices big-endian: the first bit is the most
// significant, so pattern (b_1, ..., b_n) sits at sum_i b_i 2^(n-i).

#ifndef RREXTREME_REFERENCE_ESTIMATORS_H_
#define RREXTREME_REFERENCE_ESTIMATORS_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "rrextreme/dense_matrix.h"
#include "rrextreme/randomized_response.h"

namespace rrextreme {

// Distribution of the observed count of ones over n equal-q bits of which
// `true_sum` are set, built by convolving n two-point distributions.
// Requires n >= 1, 0 <= true_sum <= n and q > 0.
absl::StatusOr<std::vector<double>> BuildSumPmf(int n, int true_sum,
                                                const NoiseParam& noise);

// Arithmetic used while building and inverting the transition matrix.
// kExtended runs the same elimination with 120 significant decimal digits;
// the inverse has entries as large as ((1-q)/(1-2q))^n, and in double the
// rounding error of the elimination swamps them once n grows past ~10.
enum class WorkingPrecision { kDouble, kExtended };

class TransitionMatrix {
 public:
  // Largest tolerated max-abs entry of P * inverse(P) - I.
  static constexpr double kMaxResidual = 1e-6;

  // Returns InvalidArgument for n < 1 or q == 0, and FailedPrecondition if
  // the inversion is singular or its residual exceeds kMaxResidual.
  static absl::StatusOr<TransitionMatrix> Build(
      int n, const NoiseParam& noise,
      WorkingPrecision precision = WorkingPrecision::kExtended);

  int n() const { return n_; }
  const NoiseParam& noise() const { return noise_; }
  // entries()(s_obs, s_true) = P(observed sum s_obs | true sum s_true).
  const DenseMatrix& entries() const { return entries_; }
  const DenseMatrix& inverse() const { return inverse_; }
  // Max-abs residual of P * inverse(P) - I, measured in the working
  // precision before rounding the entries to double.
  double residual() const { return residual_; }

 private:
  TransitionMatrix(int n, NoiseParam noise, DenseMatrix entries,
                   DenseMatrix inverse, double residual)
      : n_(n),
        noise_(noise),
        entries_(std::move(entries)),
        inverse_(std::move(inverse)),
        residual_(residual) {}

  int n_;
  NoiseParam noise_;
  DenseMatrix entries_;
  DenseMatrix inverse_;
  double residual_;
};

// 1 - inverse(P)[0, noisy_sum]. Returns OutOfRange unless
// 0 <= noisy_sum <= tm.n().
absl::StatusOr<double> EstimateOrConvolution(int noisy_sum,
                                             const TransitionMatrix& tm);

// Per-bit top rows of the 2x2 inverse transition matrices.
class KroneckerInverseFactors {
 public:
  struct Row {
    double if_zero;  // (1-q)/(1-2q) > 0
    double if_one;   // -q/(1-2q) <= 0
  };

  static KroneckerInverseFactors FromNoises(std::span<const NoiseParam> noises);

  std::span<const Row> rows() const { return rows_; }

  // Top-row entry of the full inverse at the column of `observed`.
  // Returns InvalidArgument on a length mismatch or non-binary bit.
  absl::StatusOr<double> TopRowEntry(std::span<const Bit> observed) const;

 private:
  std::vector<Row> rows_;
};

// 1 - (top-row entry of the inverse Kronecker matrix at the observed pattern),
// evaluated in factored form. Returns InvalidArgument if `bits` is empty.
absl::StatusOr<double> EstimateOrKronecker(std::span<const NoisyBit> bits);

// Hard cap on dense materialization: 2^12 x 2^12 doubles is about 134 MB.
inline constexpr int kMaxDenseKroneckerBits = 12;

// Big-endian index of a bit pattern.
size_t KroneckerIndex(std::span<const Bit> pattern);

// The full 2^n x 2^n inverse, kron_i (1-2q_i)^-1 [[1-q_i, -q_i], [-q_i, 1-q_i]]
// with the first noise parameter as the slowest-varying factor.
// Returns InvalidArgument if empty and OutOfRange above the cap.
absl::StatusOr<DenseMatrix> MaterializeKroneckerInverse(
    std::span<const NoiseParam> noises);

// The forward matrix kron_i [[1-q_i, q_i], [q_i, 1-q_i]], same ordering and
// limits as MaterializeKroneckerInverse.
absl::StatusOr<DenseMatrix> MaterializeKroneckerTransition(
    std::span<const NoiseParam> noises);

}  // namespace rrextreme

#endif  // RREXTREME_REFERENCE_ESTIMATORS_H_
