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

#ifndef RREXTREME_RANDOMIZED_RESPONSE_H_
#define RREXTREME_RANDOMIZED_RESPONSE_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace rrextreme {

// A single hidden or observed bit. Values other than 0 and 1 are rejected by
// every function that accepts a sequence of bits.
using Bit = std::uint8_t;

// The caller-owned source of randomness used by every randomized function in
// this library. Its output sequence is fixed by the C++ standard, so a given
// seed reproduces the same draws on every conforming platform.
using BitGenerator = std::mt19937_64;

// Flip probability q of binary randomized response, restricted to [0, 1/2).
//
// At q = 1/2 the observed bit is independent of the hidden one and every
// debiasing formula divides by zero, so such values cannot be constructed.
// q = 0 is allowed and makes the mechanism the identity.
class NoiseParam {
 public:
  // Returns InvalidArgument unless 0 <= q < 1/2.
  static absl::StatusOr<NoiseParam> Create(double q);

  // The standard epsilon-LDP parameterization: q = 1 / (exp(epsilon) + 1).
  // Returns InvalidArgument unless epsilon > 0.
  static absl::StatusOr<NoiseParam> FromEpsilon(double epsilon);

  // The noiseless mechanism, q = 0.
  static NoiseParam None() { return NoiseParam(0.0); }

  double q() const { return q_; }

  // 1 - 2q, strictly positive.
  double debias_scale() const { return 1.0 - 2.0 * q_; }

  // q(1-q) / (1-2q)^2: the variance contributed by one debiased bit.
  double noise_term() const;

  friend bool operator==(const NoiseParam&, const NoiseParam&) = default;

 private:
  explicit NoiseParam(double q) : q_(q) {}

  double q_;
};

// An observed bit together with the flip probability it was generated under.
struct NoisyBit {
  bool value;
  NoiseParam noise;
};

// Probability that the mechanism with flip probability q reports `observed`
// when the hidden bit is `hidden`.
double RrProbability(bool observed, bool hidden, const NoiseParam& noise);

// Draws a uniform double in [0, 1) from the top 53 bits of one generator
// output.
double UniformUnit(BitGenerator& rng);

// Randomized response: reports `hidden` with probability 1-q and its
// complement with probability q. Consumes exactly one generator output.
NoisyBit ApplyRr(bool hidden, const NoiseParam& noise, BitGenerator& rng);

// Applies ApplyRr to each element in order with independent draws.
// Returns InvalidArgument if an element is not 0 or 1.
absl::StatusOr<std::vector<NoisyBit>> ApplyRrVector(std::span<const Bit> bits,
                                                    const NoiseParam& noise,
                                                    BitGenerator& rng);

}  // namespace rrextreme

#endif  // RREXTREME_RANDOMIZED_RESPONSE_H_
