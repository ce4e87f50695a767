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

// Sketch file format.
//
// One JSON object per sketch:
//
//   {"m":10,"q":0.25,"privatized":true,"bits":"a40"}
//
// `q` is null for a sketch that has not been privatized. `bits` is lowercase
// hex of exactly ceil(m/4) digits; position 1 is the most significant bit of
// the first digit and padding bits past position m are zero. A file holds one
// or more such objects separated by whitespace; the writer emits one per
// line.

#ifndef RREXTREME_SKETCH_IO_H_
#define RREXTREME_SKETCH_IO_H_

#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "rrextreme/union_cardinality.h"

namespace rrextreme {

std::string EncodeBitsHex(std::span<const Bit> bits);

// Returns InvalidArgument unless `hex` has exactly ceil(m/4) lowercase hex
// digits with zero padding bits.
absl::StatusOr<std::vector<Bit>> DecodeBitsHex(std::string_view hex, size_t m);

// Single-line JSON without a trailing newline.
std::string SerializeSketch(const UnionSketch& sketch);

absl::StatusOr<UnionSketch> ParseSketch(std::string_view json);

// Reads every sketch object in the stream.
absl::StatusOr<std::vector<UnionSketch>> ReadSketches(std::istream& in);

}  // namespace rrextreme

#endif  // RREXTREME_SKETCH_IO_H_
