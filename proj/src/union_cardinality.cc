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

#include "rrextreme/union_cardinality.h"

#include <algorithm>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "rrextreme/extreme_estimator.h"

namespace rrextreme {

namespace {

void EstimatePositions(std::span<const UnionSketch> sketches, size_t begin,
                       size_t end, std::vector<double>& out) {
  for (size_t i = begin; i < end; ++i) {
    ExtremeAccumulator acc(ExtremeKind::kOr);
    for (const UnionSketch& sketch : sketches) {
      acc.Ingest(sketch.bits()[i] == 1, *sketch.noise());
    }
    // count >= 1 because the sketch list is nonempty.
    out[i] = *acc.Estimate();
  }
}

}  // namespace

absl::StatusOr<UnionSketch> UnionSketch::Create(size_t m, std::vector<Bit> bits,
                                                std::optional<NoiseParam> noise,
                                                bool privatized) {
  if (m == 0) {
    return absl::InvalidArgumentError("universe size m must be positive");
  }
  if (bits.size() != m) {
    return absl::InvalidArgumentError(
        absl::StrCat("sketch has ", bits.size(), " bits, expected m=", m));
  }
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("sketch bit at index ", i, " is not 0 or 1"));
    }
  }
  if (privatized != noise.has_value()) {
    return absl::InvalidArgumentError(
        privatized ? "privatized sketch must record its flip probability"
                   : "non-privatized sketch cannot carry a flip probability");
  }
  return UnionSketch(std::move(bits), noise, privatized);
}

absl::StatusOr<UnionSketch> EncodeSet(std::span<const std::int64_t> elements,
                                      size_t m) {
  if (m == 0) {
    return absl::InvalidArgumentError("universe size m must be positive");
  }
  std::vector<Bit> bits(m, 0);
  for (std::int64_t e : elements) {
    if (e < 1 || static_cast<std::uint64_t>(e) > m) {
      return absl::OutOfRangeError(
          absl::StrCat("element ", e, " outside universe [1, ", m, "]"));
    }
    bits[e - 1] = 1;
  }
  return UnionSketch::Create(m, std::move(bits), std::nullopt, false);
}

absl::StatusOr<UnionSketch> PrivatizeSketch(const UnionSketch& sketch,
                                            const NoiseParam& noise,
                                            BitGenerator& rng) {
  if (sketch.privatized()) {
    return absl::FailedPreconditionError(
        "sketch is already privatized; a second pass would change its "
        "effective flip probability");
  }
  std::vector<Bit> noisy;
  noisy.reserve(sketch.m());
  for (Bit b : sketch.bits()) {
    noisy.push_back(ApplyRr(b == 1, noise, rng).value ? 1 : 0);
  }
  return UnionSketch::Create(sketch.m(), std::move(noisy), noise, true);
}

absl::StatusOr<UnionEstimate> EstimateUnion(
    std::span<const UnionSketch> sketches,
    const EstimateUnionOptions& options) {
  if (sketches.empty()) {
    return absl::InvalidArgumentError("need at least one sketch");
  }
  const size_t m = sketches.front().m();
  std::vector<NoiseParam> noises;
  noises.reserve(sketches.size());
  for (size_t j = 0; j < sketches.size(); ++j) {
    if (sketches[j].m() != m) {
      return absl::InvalidArgumentError(
          absl::StrCat("sketch ", j, " has m=", sketches[j].m(),
                       " but sketch 0 has m=", m));
    }
    if (!sketches[j].privatized()) {
      return absl::InvalidArgumentError(
          absl::StrCat("sketch ", j, " has not been privatized"));
    }
    noises.push_back(*sketches[j].noise());
  }

  UnionEstimate result{0.0, std::vector<double>(m, 0.0), 0.0};
  const size_t threads = std::clamp<size_t>(
      options.num_threads < 1 ? 1 : options.num_threads, 1, m);
  if (threads == 1) {
    EstimatePositions(sketches, 0, m, result.per_position_estimates);
  } else {
    std::vector<std::thread> workers;
    const size_t block = (m + threads - 1) / threads;
    for (size_t begin = 0; begin < m; begin += block) {
      workers.emplace_back(EstimatePositions, sketches, begin,
                           std::min(m, begin + block),
                           std::ref(result.per_position_estimates));
    }
    for (std::thread& t : workers) t.join();
  }

  // Summed in position order whatever the thread count.
  for (double e : result.per_position_estimates) result.cardinality += e;
  result.variance_bound =
      static_cast<double>(m) * *VarianceUpperBound(noises, ExtremeKind::kOr);
  return result;
}

absl::StatusOr<double> TrueVariance(
    std::span<const std::vector<Bit>> hidden_rows,
    std::span<const NoiseParam> noises) {
  if (hidden_rows.empty() || hidden_rows.size() != noises.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("got ", hidden_rows.size(), " bit rows and ",
                     noises.size(), " noise parameters"));
  }
  const size_t m = hidden_rows.front().size();
  for (const std::vector<Bit>& row : hidden_rows) {
    if (row.size() != m) {
      return absl::InvalidArgumentError("bit rows have different lengths");
    }
  }
  double total = 0.0;
  std::vector<Bit> column(hidden_rows.size());
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < hidden_rows.size(); ++j) {
      column[j] = hidden_rows[j][i];
    }
    absl::StatusOr<VarianceReport> report = VarianceOr(column, noises);
    if (!report.ok()) return report.status();
    total += report->variance;
  }
  return total;
}

}  // namespace rrextreme
