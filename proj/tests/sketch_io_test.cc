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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace rrextreme {
namespace {

TEST(SketchIoTest, HexLayout) {
  EXPECT_EQ(EncodeBitsHex(std::vector<Bit>{1, 0, 0, 0}), "8");
  EXPECT_EQ(EncodeBitsHex(std::vector<Bit>{0, 0, 0, 1, 1}), "18");
  EXPECT_EQ(EncodeBitsHex(std::vector<Bit>{1, 0, 1, 0, 0, 1, 0, 0, 0, 0}),
            "a40");
  EXPECT_EQ(EncodeBitsHex(std::vector<Bit>(9, 0)), "000");
}

TEST(SketchIoTest, SerializedForm) {
  UnionSketch raw = *EncodeSet(std::vector<std::int64_t>{1, 3, 6}, 10);
  EXPECT_EQ(SerializeSketch(raw),
            R"({"m":10,"q":null,"privatized":false,"bits":"a40"})");
  UnionSketch priv =
      *UnionSketch::Create(5, {0, 0, 0, 1, 1}, *NoiseParam::Create(0.1), true);
  EXPECT_EQ(SerializeSketch(priv),
            R"({"m":5,"q":0.10000000000000001,"privatized":true,"bits":"18"})");
}

TEST(SketchIoTest, DecodeRejectsMalformedHex) {
  EXPECT_FALSE(DecodeBitsHex("8", 5).ok());     // too short
  EXPECT_FALSE(DecodeBitsHex("800", 5).ok());   // too long
  EXPECT_FALSE(DecodeBitsHex("8A", 8).ok());    // uppercase
  EXPECT_FALSE(DecodeBitsHex("8g", 8).ok());
  EXPECT_FALSE(DecodeBitsHex("1c", 5).ok());    // padding bit set
  EXPECT_TRUE(DecodeBitsHex("18", 5).ok());
}

TEST(SketchIoTest, ParseRejectsInconsistentSketches) {
  EXPECT_FALSE(ParseSketch("not json").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":4,"q":null,"bits":"8"})").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":0,"q":null,"privatized":false,"bits":""})").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":4,"q":0.5,"privatized":true,"bits":"8"})").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":4,"q":null,"privatized":true,"bits":"8"})").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":4.5,"q":null,"privatized":false,"bits":"8"})").ok());
  EXPECT_FALSE(ParseSketch(R"({"m":4,"q":"x","privatized":true,"bits":"8"})").ok());
}

// Property: any sketch survives serialize -> parse -> serialize unchanged.
TEST(SketchIoTest, RoundTripProperty) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t m = 1 + gen() % 70;
    std::vector<Bit> bits(m);
    for (Bit& b : bits) b = gen() % 2;
    const bool privatized = gen() % 2;
    std::optional<NoiseParam> noise;
    if (privatized) noise = *NoiseParam::Create(0.5 * UniformUnit(gen));
    UnionSketch sketch = *UnionSketch::Create(m, bits, noise, privatized);
    const std::string text = SerializeSketch(sketch);
    UnionSketch parsed = *ParseSketch(text);
    EXPECT_EQ(parsed, sketch);
    EXPECT_EQ(SerializeSketch(parsed), text);
  }
}

TEST(SketchIoTest, ReadsMultipleObjects) {
  std::istringstream in(
      "{\"m\":4,\"q\":null,\"privatized\":false,\"bits\":\"8\"}\n"
      "\n"
      "{\n  \"m\": 4, \"q\": 0.25, \"privatized\": true, \"bits\": \"f\"\n}\n");
  std::vector<UnionSketch> sketches = *ReadSketches(in);
  ASSERT_EQ(sketches.size(), 2u);
  EXPECT_TRUE(sketches[1].privatized());
  EXPECT_EQ(sketches[1].bits()[3], 1);
}

TEST(SketchIoTest, ReadReportsWhichSketchFailed) {
  std::istringstream in(
      "{\"m\":4,\"q\":null,\"privatized\":false,\"bits\":\"8\"}\n"
      "{\"m\":4,\"q\":null,\"privatized\":false,\"bits\":\"88\"}\n");
  absl::StatusOr<std::vector<UnionSketch>> sketches = ReadSketches(in);
  ASSERT_FALSE(sketches.ok());
  EXPECT_NE(sketches.status().message().find("sketch 2"),
            absl::string_view::npos);
  std::istringstream empty("  \n");
  EXPECT_FALSE(ReadSketches(empty).ok());
}

}  // namespace
}  // namespace rrextreme
