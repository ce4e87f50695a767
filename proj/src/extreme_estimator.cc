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

#include "rrextreme/extreme_estimator.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace rrextreme {

namespace {

absl::Status CheckVarianceInputs(std::span<const Bit> hidden_bits,
                                 std::span<const NoiseParam> noises) {
  if (hidden_bits.empty()) {
    return absl::InvalidArgumentError("variance needs at least one bit");
  }
  if (hidden_bits.size() != noises.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("got ", hidden_bits.size(), " bits but ", noises.size(),
                     " noise parameters"));
  }
  for (size_t i = 0; i < hidden_bits.size(); ++i) {
    if (hidden_bits[i] > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("bit at index ", i, " is not 0 or 1"));
    }
  }
  return absl::OkStatus();
}

std::vector<double> NoiseTerms(std::span<const NoiseParam> noises) {
  std::vector<double> terms;
  terms.reserve(noises.size());
  for (const NoiseParam& noise : noises) terms.push_back(noise.noise_term());
  return terms;
}

// prod_i (1 + v_i) - 1 without cancellation when every v_i is small.
double ProductOfOnePlusMinusOne(std::span<const double> terms) {
  double log_sum = 0.0;
  for (double v : terms) log_sum += std::log1p(v);
  return std::expm1(log_sum);
}

// Shared by OR and AND: prod_i (t_i + v_i) - [every t_i == 1], where t_i is
// the indicator whose product the estimator targets.
absl::StatusOr<VarianceReport> ProductVariance(
    std::span<const Bit> hidden_bits, std::span<const NoiseParam> noises,
    bool target_bit) {
  if (absl::Status s = CheckVarianceInputs(hidden_bits, noises); !s.ok()) {
    return s;
  }
  VarianceReport report{0.0, NoiseTerms(noises)};
  bool all_targets_one = true;
  for (Bit x : hidden_bits) {
    if ((x == 1) != target_bit) {
      all_targets_one = false;
      break;
    }
  }
  if (all_targets_one) {
    report.variance = ProductOfOnePlusMinusOne(report.per_bit_noise_terms);
    return report;
  }
  double product = 1.0;
  for (size_t i = 0; i < hidden_bits.size(); ++i) {
    const double t = (hidden_bits[i] == 1) == target_bit ? 1.0 : 0.0;
    product *= t + report.per_bit_noise_terms[i];
  }
  report.variance = product;
  return report;
}

}  // namespace

const char* ExtremeKindName(ExtremeKind kind) {
  return kind == ExtremeKind::kOr ? "or" : "and";
}

ExtremeAccumulator ExtremeAccumulator::FromBits(
    ExtremeKind kind, std::span<const NoisyBit> bits) {
  ExtremeAccumulator acc(kind);
  for (const NoisyBit& bit : bits) acc.Ingest(bit);
  return acc;
}

void ExtremeAccumulator::Ingest(bool observed, const NoiseParam& noise) {
  const double b = observed ? 1.0 : 0.0;
  const double q = noise.q();
  const double numerator = kind_ == ExtremeKind::kOr ? 1.0 - q - b : b - q;
  product_ *= numerator / noise.debias_scale();
  ++count_;
}

absl::StatusOr<double> ExtremeAccumulator::Estimate() const {
  if (count_ == 0) {
    return absl::FailedPreconditionError("no observations");
  }
  return kind_ == ExtremeKind::kOr ? 1.0 - product_ : product_;
}

absl::StatusOr<ExtremeAccumulator> Merge(const ExtremeAccumulator& a,
                                         const ExtremeAccumulator& b) {
  if (a.kind() != b.kind()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot merge ", ExtremeKindName(a.kind()), " with ",
                     ExtremeKindName(b.kind()), " accumulator"));
  }
  ExtremeAccumulator merged = a;
  merged.MergeFrom(b);
  return merged;
}

void ExtremeAccumulator::MergeFrom(const ExtremeAccumulator& other) {
  product_ *= other.product_;
  count_ += other.count_;
}

absl::StatusOr<VarianceReport> VarianceOr(std::span<const Bit> hidden_bits,
                                          std::span<const NoiseParam> noises) {
  // OR multiplies factors targeting 1 - x_i.
  return ProductVariance(hidden_bits, noises, /*target_bit=*/false);
}

absl::StatusOr<VarianceReport> VarianceAnd(std::span<const Bit> hidden_bits,
                                           std::span<const NoiseParam> noises) {
  return ProductVariance(hidden_bits, noises, /*target_bit=*/true);
}

absl::StatusOr<double> VarianceUpperBound(std::span<const NoiseParam> noises,
                                          ExtremeKind /*kind*/) {
  if (noises.empty()) {
    return absl::InvalidArgumentError(
        "variance bound needs at least one noise parameter");
  }
  const std::vector<double> terms = NoiseTerms(noises);
  return ProductOfOnePlusMinusOne(terms);
}

}  // namespace rrextreme
