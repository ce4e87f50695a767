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

#include "rrextreme/randomized_response.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace rrextreme {

absl::StatusOr<NoiseParam> NoiseParam::Create(double q) {
  // Written so that NaN fails the check.
  if (!(q >= 0.0 && q < 0.5)) {
    return absl::InvalidArgumentError(
        absl::StrCat("flip probability q must lie in [0, 0.5), got ", q));
  }
  return NoiseParam(q);
}

absl::StatusOr<NoiseParam> NoiseParam::FromEpsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  // exp overflows to +inf for large epsilon, giving q = 0.
  return Create(1.0 / (std::exp(epsilon) + 1.0));
}

double NoiseParam::noise_term() const {
  const double scale = debias_scale();
  return q_ * (1.0 - q_) / (scale * scale);
}

double RrProbability(bool observed, bool hidden, const NoiseParam& noise) {
  return observed == hidden ? 1.0 - noise.q() : noise.q();
}

double UniformUnit(BitGenerator& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

NoisyBit ApplyRr(bool hidden, const NoiseParam& noise, BitGenerator& rng) {
  const bool flip = UniformUnit(rng) < noise.q();
  return NoisyBit{hidden != flip, noise};
}

absl::StatusOr<std::vector<NoisyBit>> ApplyRrVector(std::span<const Bit> bits,
                                                    const NoiseParam& noise,
                                                    BitGenerator& rng) {
  std::vector<NoisyBit> out;
  out.reserve(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bit at index ", i, " is ", static_cast<int>(bits[i]),
          ", expected 0 or 1"));
    }
    out.push_back(ApplyRr(bits[i] == 1, noise, rng));
  }
  return out;
}

}  // namespace rrextreme
