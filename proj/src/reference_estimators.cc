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

#include "rrextreme/reference_estimators.h"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace rrextreme {

namespace {

using ExtendedReal = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<120>,
    boost::multiprecision::et_off>;

absl::Status CheckSumPmfArgs(int n, int true_sum, const NoiseParam& noise) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("number of bits must be positive, got ", n));
  }
  if (true_sum < 0 || true_sum > n) {
    return absl::OutOfRangeError(
        absl::StrCat("true sum ", true_sum, " outside [0, ", n, "]"));
  }
  if (noise.q() == 0.0) {
    return absl::InvalidArgumentError(
        "the convolution estimator needs q in (0, 0.5)");
  }
  return absl::OkStatus();
}

// Convolves `true_sum` Bernoulli(1-q) and `n - true_sum` Bernoulli(q)
// factors, one at a time.
template <typename T>
std::vector<T> SumPmf(int n, int true_sum, const T& q) {
  std::vector<T> pmf(n + 1, T(0));
  pmf[0] = T(1);
  for (int factor = 0; factor < n; ++factor) {
    const T p = factor < true_sum ? T(1) - q : q;
    const T stay = T(1) - p;
    // In place, highest count first, over the support built so far.
    pmf[factor + 1] = pmf[factor] * p;
    for (int k = factor; k >= 1; --k) pmf[k] = pmf[k] * stay + pmf[k - 1] * p;
    pmf[0] = pmf[0] * stay;
  }
  return pmf;
}

template <typename T>
BasicDenseMatrix<T> TransitionEntries(int n, const T& q) {
  BasicDenseMatrix<T> p(n + 1, n + 1);
  for (int true_sum = 0; true_sum <= n; ++true_sum) {
    const std::vector<T> column = SumPmf<T>(n, true_sum, q);
    for (int obs = 0; obs <= n; ++obs) p(obs, true_sum) = column[obs];
  }
  return p;
}

template <typename T>
absl::StatusOr<std::pair<DenseMatrix, DenseMatrix>> BuildAndInvert(
    int n, const T& q, double& residual) {
  const BasicDenseMatrix<T> entries = TransitionEntries<T>(n, q);
  absl::StatusOr<BasicDenseMatrix<T>> inverse =
      InvertWithPartialPivoting(entries);
  if (!inverse.ok()) return inverse.status();
  residual = static_cast<double>(MaxAbsResidualFromIdentity(entries, *inverse));
  return std::make_pair(entries.template Cast<double>(),
                        inverse->template Cast<double>());
}

absl::StatusOr<DenseMatrix> MaterializeKronecker(
    std::span<const NoiseParam> noises, bool inverse) {
  if (noises.empty()) {
    return absl::InvalidArgumentError(
        "Kronecker matrix needs at least one noise parameter");
  }
  if (noises.size() > static_cast<size_t>(kMaxDenseKroneckerBits)) {
    return absl::OutOfRangeError(absl::StrCat(
        "dense Kronecker matrix limited to ", kMaxDenseKroneckerBits,
        " bits, got ", noises.size()));
  }
  DenseMatrix acc = DenseMatrix::Identity(1);
  for (const NoiseParam& noise : noises) {
    const double q = noise.q();
    DenseMatrix factor(2, 2);
    if (inverse) {
      const double scale = noise.debias_scale();
      factor(0, 0) = factor(1, 1) = (1.0 - q) / scale;
      factor(0, 1) = factor(1, 0) = -q / scale;
    } else {
      factor(0, 0) = factor(1, 1) = 1.0 - q;
      factor(0, 1) = factor(1, 0) = q;
    }
    acc = KroneckerProduct(acc, factor);
  }
  return acc;
}

}  // namespace

absl::StatusOr<std::vector<double>> BuildSumPmf(int n, int true_sum,
                                                const NoiseParam& noise) {
  if (absl::Status s = CheckSumPmfArgs(n, true_sum, noise); !s.ok()) return s;
  return SumPmf<double>(n, true_sum, noise.q());
}

absl::StatusOr<TransitionMatrix> TransitionMatrix::Build(
    int n, const NoiseParam& noise, WorkingPrecision precision) {
  if (absl::Status s = CheckSumPmfArgs(n, 0, noise); !s.ok()) return s;

  double residual = 0.0;
  absl::StatusOr<std::pair<DenseMatrix, DenseMatrix>> built =
      precision == WorkingPrecision::kExtended
          ? BuildAndInvert<ExtendedReal>(n, ExtendedReal(noise.q()), residual)
          : BuildAndInvert<double>(n, noise.q(), residual);
  if (!built.ok()) return built.status();
  // Written so that a NaN residual is refused too.
  if (!(residual <= kMaxResidual)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "transition matrix for n=", n, ", q=", noise.q(),
        " is too ill-conditioned to invert: residual ", residual,
        " exceeds ", kMaxResidual));
  }
  return TransitionMatrix(n, noise, std::move(built->first),
                          std::move(built->second), residual);
}

absl::StatusOr<double> EstimateOrConvolution(int noisy_sum,
                                             const TransitionMatrix& tm) {
  if (noisy_sum < 0 || noisy_sum > tm.n()) {
    return absl::OutOfRangeError(absl::StrCat(
        "noisy sum ", noisy_sum, " outside [0, ", tm.n(), "]"));
  }
  return 1.0 - tm.inverse()(0, noisy_sum);
}

KroneckerInverseFactors KroneckerInverseFactors::FromNoises(
    std::span<const NoiseParam> noises) {
  KroneckerInverseFactors factors;
  factors.rows_.reserve(noises.size());
  for (const NoiseParam& noise : noises) {
    const double scale = noise.debias_scale();
    factors.rows_.push_back(Row{(1.0 - noise.q()) / scale, -noise.q() / scale});
  }
  return factors;
}

absl::StatusOr<double> KroneckerInverseFactors::TopRowEntry(
    std::span<const Bit> observed) const {
  if (observed.size() != rows_.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("pattern has ", observed.size(), " bits, expected ",
                     rows_.size()));
  }
  double entry = 1.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("bit at index ", i, " is not 0 or 1"));
    }
    entry *= observed[i] == 1 ? rows_[i].if_one : rows_[i].if_zero;
  }
  return entry;
}

absl::StatusOr<double> EstimateOrKronecker(std::span<const NoisyBit> bits) {
  if (bits.empty()) {
    return absl::InvalidArgumentError("Kronecker estimate needs at least one bit");
  }
  std::vector<NoiseParam> noises;
  std::vector<Bit> observed;
  noises.reserve(bits.size());
  observed.reserve(bits.size());
  for (const NoisyBit& bit : bits) {
    noises.push_back(bit.noise);
    observed.push_back(bit.value ? 1 : 0);
  }
  absl::StatusOr<double> entry =
      KroneckerInverseFactors::FromNoises(noises).TopRowEntry(observed);
  if (!entry.ok()) return entry.status();
  return 1.0 - *entry;
}

size_t KroneckerIndex(std::span<const Bit> pattern) {
  size_t index = 0;
  for (Bit b : pattern) index = (index << 1) | (b & 1u);
  return index;
}

absl::StatusOr<DenseMatrix> MaterializeKroneckerInverse(
    std::span<const NoiseParam> noises) {
  return MaterializeKronecker(noises, /*inverse=*/true);
}

absl::StatusOr<DenseMatrix> MaterializeKroneckerTransition(
    std::span<const NoiseParam> noises) {
  return MaterializeKronecker(noises, /*inverse=*/false);
}

}  // namespace rrextreme
