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

#include "rrextreme/sketch_io.h"

#include <optional>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"

namespace rrextreme {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

absl::StatusOr<UnionSketch> SketchFromJson(const nlohmann::json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("sketch must be a JSON object");
  }
  for (const char* key : {"m", "q", "privatized", "bits"}) {
    if (!j.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("sketch is missing field \"", key, "\""));
    }
  }
  const nlohmann::json& m_field = j["m"];
  if (!m_field.is_number_unsigned() || m_field.get<std::uint64_t>() == 0) {
    return absl::InvalidArgumentError("\"m\" must be a positive integer");
  }
  if (!j["privatized"].is_boolean()) {
    return absl::InvalidArgumentError("\"privatized\" must be a boolean");
  }
  if (!j["bits"].is_string()) {
    return absl::InvalidArgumentError("\"bits\" must be a hex string");
  }
  std::optional<NoiseParam> noise;
  if (!j["q"].is_null()) {
    if (!j["q"].is_number()) {
      return absl::InvalidArgumentError("\"q\" must be a number or null");
    }
    absl::StatusOr<NoiseParam> parsed = NoiseParam::Create(j["q"].get<double>());
    if (!parsed.ok()) return parsed.status();
    noise = *parsed;
  }
  const size_t m = m_field.get<std::uint64_t>();
  absl::StatusOr<std::vector<Bit>> bits =
      DecodeBitsHex(j["bits"].get_ref<const std::string&>(), m);
  if (!bits.ok()) return bits.status();
  return UnionSketch::Create(m, std::move(*bits), noise,
                             j["privatized"].get<bool>());
}

}  // namespace

std::string EncodeBitsHex(std::span<const Bit> bits) {
  std::string hex((bits.size() + 3) / 4, '0');
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 1) continue;
    const int digit = HexValue(hex[i / 4]) | (8 >> (i % 4));
    hex[i / 4] = kHexDigits[digit];
  }
  return hex;
}

absl::StatusOr<std::vector<Bit>> DecodeBitsHex(std::string_view hex, size_t m) {
  const size_t digits = (m + 3) / 4;
  if (hex.size() != digits) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bit string has ", hex.size(), " hex digits, expected ", digits,
        " for m=", m));
  }
  std::vector<Bit> bits(m, 0);
  for (size_t d = 0; d < digits; ++d) {
    const int value = HexValue(hex[d]);
    if (value < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "invalid character '", std::string(1, hex[d]),
          "' in bit string; expected lowercase hex"));
    }
    for (size_t k = 0; k < 4; ++k) {
      const bool set = (value & (8 >> k)) != 0;
      const size_t pos = 4 * d + k;
      if (pos < m) {
        bits[pos] = set ? 1 : 0;
      } else if (set) {
        return absl::InvalidArgumentError(
            "bit string sets padding bits past position m");
      }
    }
  }
  return bits;
}

std::string SerializeSketch(const UnionSketch& sketch) {
  const std::string q =
      sketch.noise().has_value() ? absl::StrFormat("%.17g", sketch.noise()->q())
                                 : "null";
  return absl::StrCat("{\"m\":", sketch.m(), ",\"q\":", q,
                      ",\"privatized\":", sketch.privatized() ? "true" : "false",
                      ",\"bits\":\"", EncodeBitsHex(sketch.bits()), "\"}");
}

absl::StatusOr<UnionSketch> ParseSketch(std::string_view json) {
  nlohmann::json j = nlohmann::json::parse(json, nullptr,
                                           /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError("sketch is not valid JSON");
  }
  return SketchFromJson(j);
}

absl::StatusOr<std::vector<UnionSketch>> ReadSketches(std::istream& in) {
  std::vector<UnionSketch> sketches;
  while (true) {
    in >> std::ws;
    if (in.peek() == std::char_traits<char>::eof()) break;
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      return absl::InvalidArgumentError(absl::StrCat(
          "sketch ", sketches.size() + 1, " is not valid JSON: ", e.what()));
    }
    absl::StatusOr<UnionSketch> sketch = SketchFromJson(j);
    if (!sketch.ok()) {
      return absl::Status(sketch.status().code(),
                          absl::StrCat("sketch ", sketches.size() + 1, ": ",
                                       sketch.status().message()));
    }
    sketches.push_back(*std::move(sketch));
  }
  if (sketches.empty()) {
    return absl::InvalidArgumentError("no sketches found in input");
  }
  return sketches;
}

}  // namespace rrextreme
