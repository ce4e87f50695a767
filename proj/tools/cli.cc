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

#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "rrextreme/extreme_estimator.h"
#include "rrextreme/randomized_response.h"
#include "rrextreme/reference_estimators.h"
#include "rrextreme/sketch_io.h"
#include "rrextreme/union_cardinality.h"

namespace rrextreme::cli {

namespace {

using Json = nlohmann::json;

// Relative tolerance used by `compare`.
constexpr double kEquivalenceTolerance = 1e-8;
constexpr int kMaxConvolutionBits = 24;

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

int Fail(Streams& io, ExitCode code, std::string_view message) {
  io.err << "error: " << message << "\n";
  return code;
}

int Fail(Streams& io, ExitCode code, const absl::Status& status) {
  return Fail(io, code, std::string(status.message()));
}

// 17 significant digits round-trip every double.
std::string Num(double v) { return absl::StrFormat("%.17g", v); }

std::string JsonNum(double v) { return std::isfinite(v) ? Num(v) : "null"; }

// Opens --input. "-" means the caller's input stream.
class InputSource {
 public:
  InputSource(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (file_->is_open()) stream_ = file_.get();
    }
  }
  bool ok() const { return stream_ != nullptr; }
  std::istream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (file_->is_open()) stream_ = file_.get();
    }
  }
  bool ok() const { return stream_ != nullptr; }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

int WriteOutput(Streams& io, const std::string& path, const std::string& text) {
  OutputSink sink(path, io.out);
  if (!sink.ok()) {
    return Fail(io, kExitIoError, absl::StrCat("cannot open output ", path));
  }
  sink.stream() << text;
  sink.stream().flush();
  if (!sink.stream()) {
    return Fail(io, kExitIoError, absl::StrCat("failed writing ", path));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// privatize

struct PrivatizeArgs {
  std::string input = "-";
  std::string output = "-";
  std::string format = "json";
  std::optional<double> q;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
};

int RunPrivatize(const PrivatizeArgs& args, Streams& io) {
  if (args.format != "json") {
    return Fail(io, kExitParseError, "privatize only writes json sketches");
  }
  absl::StatusOr<NoiseParam> noise =
      args.q.has_value() ? NoiseParam::Create(*args.q)
                         : NoiseParam::FromEpsilon(*args.epsilon);
  if (!noise.ok()) return Fail(io, kExitPreconditionError, noise.status());

  InputSource source(args.input, io.in);
  if (!source.ok()) {
    return Fail(io, kExitIoError, absl::StrCat("cannot open input ", args.input));
  }
  absl::StatusOr<std::vector<UnionSketch>> sketches =
      ReadSketches(source.stream());
  if (!sketches.ok()) return Fail(io, kExitParseError, sketches.status());

  BitGenerator rng(args.seed);
  std::string text;
  for (const UnionSketch& sketch : *sketches) {
    absl::StatusOr<UnionSketch> priv = PrivatizeSketch(sketch, *noise, rng);
    if (!priv.ok()) return Fail(io, kExitPreconditionError, priv.status());
    absl::StrAppend(&text, SerializeSketch(*priv), "\n");
  }
  return WriteOutput(io, args.output, text);
}

// ---------------------------------------------------------------------------
// estimate-or / estimate-and

struct EstimateArgs {
  std::string input = "-";
  std::string output = "-";
  std::string format = "json";
};

// Parses "bit,q". On failure returns a message without the line number.
std::optional<std::string> ParseStreamLine(std::string_view line, bool& bit,
                                           double& q) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const size_t comma = line.find(',');
  if (comma == std::string_view::npos) return "expected \"bit,q\"";
  const std::string_view bit_text = line.substr(0, comma);
  const std::string_view q_text = line.substr(comma + 1);
  if (bit_text == "0") {
    bit = false;
  } else if (bit_text == "1") {
    bit = true;
  } else {
    return "bit must be 0 or 1";
  }
  const char* end = q_text.data() + q_text.size();
  auto [ptr, ec] = std::from_chars(q_text.data(), end, q);
  if (q_text.empty() || ec != std::errc() || ptr != end) {
    return "q is not a number";
  }
  return std::nullopt;
}

int RunEstimateExtreme(ExtremeKind kind, const EstimateArgs& args,
                       Streams& io) {
  if (args.format != "json" && args.format != "csv") {
    return Fail(io, kExitParseError, "format must be json or csv");
  }
  InputSource source(args.input, io.in);
  if (!source.ok()) {
    return Fail(io, kExitIoError, absl::StrCat("cannot open input ", args.input));
  }

  // Single pass; nothing but the two accumulators survives a line.
  ExtremeAccumulator acc(kind);
  VarianceBoundAccumulator bound;
  std::string line;
  std::uint64_t line_number = 0;
  std::istream& in = source.stream();
  while (std::getline(in, line)) {
    ++line_number;
    bool bit = false;
    double q = 0.0;
    if (std::optional<std::string> problem = ParseStreamLine(line, bit, q)) {
      return Fail(io, kExitParseError,
                  absl::StrCat("line ", line_number, ": ", *problem));
    }
    absl::StatusOr<NoiseParam> noise = NoiseParam::Create(q);
    if (!noise.ok()) {
      return Fail(io, kExitPreconditionError,
                  absl::StrCat("line ", line_number, ": ",
                               noise.status().message()));
    }
    acc.Ingest(bit, *noise);
    bound.Add(*noise);
  }
  if (in.bad()) {
    return Fail(io, kExitIoError, absl::StrCat("failed reading ", args.input));
  }
  absl::StatusOr<double> estimate = acc.Estimate();
  if (!estimate.ok()) return Fail(io, kExitPreconditionError, estimate.status());

  const double clamped = std::clamp(*estimate, 0.0, 1.0);
  std::string text;
  if (args.format == "json") {
    text = absl::StrCat("{\"kind\":\"", ExtremeKindName(kind),
                        "\",\"count\":", acc.count(),
                        ",\"estimate\":", JsonNum(*estimate),
                        ",\"clamped_estimate\":", JsonNum(clamped),
                        ",\"variance_upper_bound\":", JsonNum(bound.Bound()),
                        "}\n");
  } else {
    text = absl::StrCat(
        "kind,count,estimate,clamped_estimate,variance_upper_bound\n",
        ExtremeKindName(kind), ",", acc.count(), ",", Num(*estimate), ",",
        Num(clamped), ",", Num(bound.Bound()), "\n");
  }
  return WriteOutput(io, args.output, text);
}

// ---------------------------------------------------------------------------
// estimate-union

struct UnionArgs {
  std::vector<std::string> inputs;
  std::string output = "-";
  std::string format = "json";
  int threads = 1;
  bool per_position = false;
};

int RunEstimateUnion(const UnionArgs& args, Streams& io) {
  if (args.format != "json" && args.format != "csv") {
    return Fail(io, kExitParseError, "format must be json or csv");
  }
  std::vector<UnionSketch> sketches;
  for (const std::string& path : args.inputs) {
    InputSource source(path, io.in);
    if (!source.ok()) {
      return Fail(io, kExitIoError, absl::StrCat("cannot open input ", path));
    }
    absl::StatusOr<std::vector<UnionSketch>> read =
        ReadSketches(source.stream());
    if (!read.ok()) {
      return Fail(io, kExitParseError,
                  absl::StrCat(path, ": ", read.status().message()));
    }
    for (UnionSketch& s : *read) sketches.push_back(std::move(s));
  }
  absl::StatusOr<UnionEstimate> estimate =
      EstimateUnion(sketches, {.num_threads = args.threads});
  if (!estimate.ok()) return Fail(io, kExitPreconditionError, estimate.status());

  const size_t m = sketches.front().m();
  const double clamped =
      std::clamp(estimate->cardinality, 0.0, static_cast<double>(m));
  std::string text;
  if (args.format == "json") {
    text = absl::StrCat("{\"sketches\":", sketches.size(), ",\"m\":", m,
                        ",\"cardinality\":", JsonNum(estimate->cardinality),
                        ",\"clamped_cardinality\":", JsonNum(clamped),
                        ",\"variance_bound\":", JsonNum(estimate->variance_bound));
    if (args.per_position) {
      absl::StrAppend(&text, ",\"per_position_estimates\":[",
                      absl::StrJoin(estimate->per_position_estimates, ",",
                                    [](std::string* out, double v) {
                                      out->append(JsonNum(v));
                                    }),
                      "]");
    }
    absl::StrAppend(&text, "}\n");
  } else {
    text = absl::StrCat(
        "sketches,m,cardinality,clamped_cardinality,variance_bound\n",
        sketches.size(), ",", m, ",", Num(estimate->cardinality), ",",
        Num(clamped), ",", Num(estimate->variance_bound), "\n");
    if (args.per_position) {
      absl::StrAppend(&text, "\nposition,estimate\n");
      for (size_t i = 0; i < m; ++i) {
        absl::StrAppend(&text, i + 1, ",",
                        Num(estimate->per_position_estimates[i]), "\n");
      }
    }
  }
  return WriteOutput(io, args.output, text);
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  int n = 0;
  double q = 0.0;
  std::string mode = "sum";
  std::string output = "-";
  std::string format = "csv";
};

struct CompareRow {
  std::string sequence;  // empty in sum mode
  int sum;
  double elementary;
  double convolution;
  double kronecker;
  double max_abs_diff;
};

double MaxPairwiseDiff(double a, double b, double c) {
  return std::max({std::abs(a - b), std::abs(a - c), std::abs(b - c)});
}

bool WithinTolerance(const CompareRow& row) {
  const double scale = std::abs(row.elementary);
  // NaN fails.
  return row.max_abs_diff <=
         kEquivalenceTolerance * (scale > 0.0 ? scale : 1.0);
}

int RunCompare(const CompareArgs& args, Streams& io) {
  if (args.format != "json" && args.format != "csv") {
    return Fail(io, kExitParseError, "format must be json or csv");
  }
  if (args.mode != "sum" && args.mode != "dense") {
    return Fail(io, kExitParseError, "mode must be sum or dense");
  }
  const bool dense = args.mode == "dense";
  const int cap = dense ? kMaxDenseKroneckerBits : kMaxConvolutionBits;
  if (args.n < 1 || args.n > cap) {
    return Fail(io, kExitPreconditionError,
                absl::StrCat("n must lie in [1, ", cap, "] for ", args.mode,
                             " mode, got ", args.n));
  }
  absl::StatusOr<NoiseParam> noise = NoiseParam::Create(args.q);
  if (!noise.ok()) return Fail(io, kExitPreconditionError, noise.status());
  if (noise->q() == 0.0) {
    return Fail(io, kExitPreconditionError,
                "the convolution estimator needs q in (0, 0.5)");
  }
  absl::StatusOr<TransitionMatrix> tm = TransitionMatrix::Build(args.n, *noise);
  if (!tm.ok()) return Fail(io, kExitPreconditionError, tm.status());

  std::optional<DenseMatrix> dense_inverse;
  if (dense) {
    absl::StatusOr<DenseMatrix> inv = MaterializeKroneckerInverse(
        std::vector<NoiseParam>(args.n, *noise));
    if (!inv.ok()) return Fail(io, kExitPreconditionError, inv.status());
    dense_inverse = *std::move(inv);
  }

  std::vector<CompareRow> rows;
  auto add_row = [&](std::span<const Bit> pattern, std::string sequence) {
    std::vector<NoisyBit> bits;
    int sum = 0;
    for (Bit b : pattern) {
      bits.push_back(NoisyBit{b == 1, *noise});
      sum += b;
    }
    CompareRow row;
    row.sequence = std::move(sequence);
    row.sum = sum;
    row.elementary =
        *ExtremeAccumulator::FromBits(ExtremeKind::kOr, bits).Estimate();
    row.convolution = *EstimateOrConvolution(sum, *tm);
    row.kronecker = dense ? 1.0 - (*dense_inverse)(0, KroneckerIndex(pattern))
                          : *EstimateOrKronecker(bits);
    row.max_abs_diff =
        MaxPairwiseDiff(row.elementary, row.convolution, row.kronecker);
    rows.push_back(std::move(row));
  };

  std::vector<Bit> pattern(args.n);
  if (dense) {
    for (size_t idx = 0; idx < (size_t{1} << args.n); ++idx) {
      std::string sequence(args.n, '0');
      for (int i = 0; i < args.n; ++i) {
        pattern[i] = (idx >> (args.n - 1 - i)) & 1u;
        sequence[i] = pattern[i] ? '1' : '0';
      }
      add_row(pattern, std::move(sequence));
    }
  } else {
    // In the equal-q case only the count of ones matters; use ones first.
    for (int s = 0; s <= args.n; ++s) {
      for (int i = 0; i < args.n; ++i) pattern[i] = i < s ? 1 : 0;
      add_row(pattern, "");
    }
  }

  bool all_within = true;
  std::string text;
  if (args.format == "csv") {
    text = dense ? "sequence,sum,elementary,convolution,kronecker,max_abs_diff\n"
                 : "sum,elementary,convolution,kronecker,max_abs_diff\n";
  } else {
    text = absl::StrCat("{\"n\":", args.n, ",\"q\":", Num(args.q),
                        ",\"mode\":\"", args.mode, "\",\"rows\":[");
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    const CompareRow& row = rows[r];
    all_within = all_within && WithinTolerance(row);
    if (args.format == "csv") {
      if (dense) absl::StrAppend(&text, row.sequence, ",");
      absl::StrAppend(&text, row.sum, ",", Num(row.elementary), ",",
                      Num(row.convolution), ",", Num(row.kronecker), ",",
                      Num(row.max_abs_diff), "\n");
    } else {
      absl::StrAppend(&text, r == 0 ? "" : ",", "{");
      if (dense) absl::StrAppend(&text, "\"sequence\":\"", row.sequence, "\",");
      absl::StrAppend(&text, "\"sum\":", row.sum,
                      ",\"elementary\":", JsonNum(row.elementary),
                      ",\"convolution\":", JsonNum(row.convolution),
                      ",\"kronecker\":", JsonNum(row.kronecker),
                      ",\"max_abs_diff\":", JsonNum(row.max_abs_diff), "}");
    }
  }
  if (args.format == "json") {
    absl::StrAppend(&text, "],\"within_tolerance\":",
                    all_within ? "true" : "false", "}\n");
  }
  if (int code = WriteOutput(io, args.output, text); code != kExitOk) {
    return code;
  }
  if (!all_within) {
    return Fail(io, kExitEquivalenceFailure,
                absl::StrCat("estimators differ by more than ",
                             kEquivalenceTolerance, " relative"));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct ExperimentConfig {
  std::string scenario;
  std::vector<Bit> bits;
  std::vector<std::vector<std::int64_t>> sets;
  std::int64_t m = 0;
  std::vector<double> q;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string config_path;
  std::string scenario;
  std::string bits;
  std::string sets;
  std::string q;
  std::int64_t m = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool per_trial = false;
  std::string output = "-";
  std::string format = "csv";
};

absl::StatusOr<std::int64_t> ParseInt(std::string_view text) {
  std::int64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", std::string(text), "' is not an integer"));
  }
  return value;
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

absl::StatusOr<std::vector<double>> ParseQList(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : Split(text, ',')) {
    double v = 0.0;
    const char* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, v);
    if (part.empty() || ec != std::errc() || ptr != end) {
      return absl::InvalidArgumentError(
          absl::StrCat("'", std::string(part), "' is not a number"));
    }
    out.push_back(v);
  }
  return out;
}

absl::StatusOr<std::vector<Bit>> ParseBitList(std::string_view text) {
  std::vector<Bit> out;
  for (std::string_view part : Split(text, ',')) {
    if (part != "0" && part != "1") {
      return absl::InvalidArgumentError(
          absl::StrCat("bit '", std::string(part), "' is not 0 or 1"));
    }
    out.push_back(part == "1" ? 1 : 0);
  }
  return out;
}

// "1-50;26-75" or "1,3,5;2": sets separated by ';', elements by ',', with
// inclusive ranges a-b.
absl::StatusOr<std::vector<std::vector<std::int64_t>>> ParseSets(
    std::string_view text) {
  std::vector<std::vector<std::int64_t>> sets;
  for (std::string_view set_text : Split(text, ';')) {
    std::vector<std::int64_t> set;
    if (!set_text.empty()) {
      for (std::string_view item : Split(set_text, ',')) {
        const size_t dash = item.find('-', 1);
        if (dash == std::string_view::npos) {
          absl::StatusOr<std::int64_t> v = ParseInt(item);
          if (!v.ok()) return v.status();
          set.push_back(*v);
          continue;
        }
        absl::StatusOr<std::int64_t> lo = ParseInt(item.substr(0, dash));
        absl::StatusOr<std::int64_t> hi = ParseInt(item.substr(dash + 1));
        if (!lo.ok()) return lo.status();
        if (!hi.ok()) return hi.status();
        if (*lo > *hi) {
          return absl::InvalidArgumentError(
              absl::StrCat("empty range ", std::string(item)));
        }
        for (std::int64_t e = *lo; e <= *hi; ++e) set.push_back(e);
      }
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

// Flat JSON config. Every key is optional; command-line flags override.
absl::Status LoadConfigFile(const std::string& path, ExperimentConfig& config) {
  std::ifstream file(path, std::ios::binary);
  if (!file.is_open()) {
    return absl::NotFoundError(absl::StrCat("cannot open config ", path));
  }
  Json j = Json::parse(file, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("config must be a JSON object");
  }
  try {
    if (j.contains("scenario")) config.scenario = j["scenario"].get<std::string>();
    if (j.contains("m")) config.m = j["m"].get<std::int64_t>();
    if (j.contains("trials")) config.trials = j["trials"].get<std::int64_t>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("q")) {
      config.q = j["q"].is_array() ? j["q"].get<std::vector<double>>()
                                   : std::vector<double>{j["q"].get<double>()};
    }
    if (j.contains("bits")) {
      if (j["bits"].is_string()) {
        absl::StatusOr<std::vector<Bit>> bits =
            ParseBitList(j["bits"].get<std::string>());
        if (!bits.ok()) return bits.status();
        config.bits = *bits;
      } else {
        for (int b : j["bits"].get<std::vector<int>>()) {
          if (b != 0 && b != 1) {
            return absl::InvalidArgumentError("config bits must be 0 or 1");
          }
          config.bits.push_back(static_cast<Bit>(b));
        }
      }
    }
    if (j.contains("sets")) {
      if (j["sets"].is_string()) {
        absl::StatusOr<std::vector<std::vector<std::int64_t>>> sets =
            ParseSets(j["sets"].get<std::string>());
        if (!sets.ok()) return sets.status();
        config.sets = *sets;
      } else {
        config.sets = j["sets"].get<std::vector<std::vector<std::int64_t>>>();
      }
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config has a field of the wrong type: ", e.what()));
  }
  return absl::OkStatus();
}

struct Experiment {
  std::vector<NoiseParam> noises;  // one per bit (or-bits) or party (union)
  std::vector<UnionSketch> sketches;
  std::vector<std::vector<Bit>> hidden_rows;
  double theoretical_mean = 0.0;
  double theoretical_variance = 0.0;
  size_t n = 0;
  size_t m = 1;
};

absl::StatusOr<Experiment> PrepareExperiment(const ExperimentConfig& config) {
  Experiment ex;
  if (config.trials < 1) {
    return absl::InvalidArgumentError("trials must be at least 1");
  }
  if (config.scenario == "or-bits") {
    if (config.bits.empty()) {
      return absl::InvalidArgumentError("or-bits needs at least one hidden bit");
    }
    ex.n = config.bits.size();
  } else if (config.scenario == "union") {
    if (config.sets.empty()) {
      return absl::InvalidArgumentError("union needs at least one set");
    }
    if (config.m < 1) return absl::InvalidArgumentError("m must be positive");
    ex.n = config.sets.size();
    ex.m = static_cast<size_t>(config.m);
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown scenario '", config.scenario,
                     "'; expected or-bits or union"));
  }

  if (config.q.size() != 1 && config.q.size() != ex.n) {
    return absl::InvalidArgumentError(
        absl::StrCat("q needs 1 or ", ex.n, " values, got ", config.q.size()));
  }
  for (size_t i = 0; i < ex.n; ++i) {
    absl::StatusOr<NoiseParam> noise =
        NoiseParam::Create(config.q.size() == 1 ? config.q[0] : config.q[i]);
    if (!noise.ok()) return noise.status();
    ex.noises.push_back(*noise);
  }

  if (config.scenario == "or-bits") {
    ex.theoretical_mean =
        *std::max_element(config.bits.begin(), config.bits.end());
    absl::StatusOr<VarianceReport> report = VarianceOr(config.bits, ex.noises);
    if (!report.ok()) return report.status();
    ex.theoretical_variance = report->variance;
    return ex;
  }

  std::set<std::int64_t> united;
  for (const std::vector<std::int64_t>& set : config.sets) {
    absl::StatusOr<UnionSketch> sketch = EncodeSet(set, ex.m);
    if (!sketch.ok()) return sketch.status();
    ex.hidden_rows.emplace_back(sketch->bits().begin(), sketch->bits().end());
    ex.sketches.push_back(*std::move(sketch));
    united.insert(set.begin(), set.end());
  }
  ex.theoretical_mean = static_cast<double>(united.size());
  absl::StatusOr<double> variance = TrueVariance(ex.hidden_rows, ex.noises);
  if (!variance.ok()) return variance.status();
  ex.theoretical_variance = *variance;
  return ex;
}

double RunTrial(const ExperimentConfig& config, const Experiment& ex,
                std::uint64_t trial) {
  BitGenerator rng(config.seed ^ trial);
  if (config.scenario == "or-bits") {
    ExtremeAccumulator acc(ExtremeKind::kOr);
    for (size_t i = 0; i < ex.n; ++i) {
      acc.Ingest(ApplyRr(config.bits[i] == 1, ex.noises[i], rng));
    }
    return *acc.Estimate();
  }
  std::vector<UnionSketch> noisy;
  noisy.reserve(ex.n);
  for (size_t j = 0; j < ex.n; ++j) {
    noisy.push_back(*PrivatizeSketch(ex.sketches[j], ex.noises[j], rng));
  }
  return EstimateUnion(noisy)->cardinality;
}

// (x - target) / scale, with 0/0 read as agreement.
double Standardize(double x, double target, double scale) {
  if (scale > 0.0) return (x - target) / scale;
  if (x == target) return 0.0;
  return x > target ? INFINITY : -INFINITY;
}

int RunSimulate(const SimulateArgs& args, const CLI::App& sub, Streams& io) {
  if (args.format != "json" && args.format != "csv") {
    return Fail(io, kExitParseError, "format must be json or csv");
  }
  ExperimentConfig config;
  if (!args.config_path.empty()) {
    absl::Status loaded = LoadConfigFile(args.config_path, config);
    if (absl::IsNotFound(loaded)) return Fail(io, kExitIoError, loaded);
    if (!loaded.ok()) return Fail(io, kExitParseError, loaded);
  }
  if (sub.count("--scenario")) config.scenario = args.scenario;
  if (sub.count("--m")) config.m = args.m;
  if (sub.count("--trials")) config.trials = args.trials;
  if (sub.count("--seed")) config.seed = args.seed;
  if (sub.count("--q")) {
    absl::StatusOr<std::vector<double>> q = ParseQList(args.q);
    if (!q.ok()) return Fail(io, kExitParseError, q.status());
    config.q = *q;
  }
  if (sub.count("--bits")) {
    absl::StatusOr<std::vector<Bit>> bits = ParseBitList(args.bits);
    if (!bits.ok()) return Fail(io, kExitParseError, bits.status());
    config.bits = *bits;
  }
  if (sub.count("--sets")) {
    absl::StatusOr<std::vector<std::vector<std::int64_t>>> sets =
        ParseSets(args.sets);
    if (!sets.ok()) return Fail(io, kExitParseError, sets.status());
    config.sets = *sets;
  }

  absl::StatusOr<Experiment> ex = PrepareExperiment(config);
  if (!ex.ok()) return Fail(io, kExitPreconditionError, ex.status());

  const std::uint64_t trials = static_cast<std::uint64_t>(config.trials);
  std::vector<double> estimates(trials);
  const std::uint64_t threads = std::clamp<std::uint64_t>(
      static_cast<std::uint64_t>(std::max(args.threads, 1)), 1, trials);
  auto run_block = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t t = begin; t < end; ++t) {
      estimates[t] = RunTrial(config, *ex, t);
    }
  };
  if (threads == 1) {
    run_block(0, trials);
  } else {
    std::vector<std::thread> workers;
    const std::uint64_t block = (trials + threads - 1) / threads;
    for (std::uint64_t begin = 0; begin < trials; begin += block) {
      workers.emplace_back(run_block, begin, std::min(trials, begin + block));
    }
    for (std::thread& w : workers) w.join();
  }

  // Reductions run in trial order so the output is independent of threads.
  double sum = 0.0;
  for (double e : estimates) sum += e;
  const double mean = sum / static_cast<double>(trials);
  double m2 = 0.0, m4 = 0.0;
  for (double e : estimates) {
    const double d2 = (e - mean) * (e - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double t = static_cast<double>(trials);
  const double variance = trials > 1 ? m2 / (t - 1) : NAN;
  m4 /= t;
  const double mean_se = std::sqrt(ex->theoretical_variance / t);
  const double mean_z = Standardize(mean, ex->theoretical_mean, mean_se);
  // Standard error of the sample variance from the empirical fourth moment.
  const double var_se =
      trials > 3
          ? std::sqrt(std::max(
                0.0, (m4 - variance * variance * (t - 3) / (t - 1)) / t))
          : NAN;
  const double variance_z =
      Standardize(variance, ex->theoretical_variance, var_se);
  const double variance_rel_error =
      Standardize(variance, ex->theoretical_variance, ex->theoretical_variance);

  std::string text;
  if (args.format == "csv") {
    if (args.per_trial) {
      text = "trial,estimate\n";
      for (std::uint64_t i = 0; i < trials; ++i) {
        absl::StrAppend(&text, i, ",", Num(estimates[i]), "\n");
      }
    } else {
      text = absl::StrCat(
          "scenario,n,m,trials,seed,empirical_mean,empirical_variance,"
          "theoretical_mean,theoretical_variance,mean_z,variance_z,"
          "variance_rel_error\n",
          config.scenario, ",", ex->n, ",", ex->m, ",", trials, ",",
          config.seed, ",", Num(mean), ",", Num(variance), ",",
          Num(ex->theoretical_mean), ",", Num(ex->theoretical_variance), ",",
          Num(mean_z), ",", Num(variance_z), ",", Num(variance_rel_error),
          "\n");
    }
  } else {
    text = absl::StrCat(
        "{\"scenario\":\"", config.scenario, "\",\"n\":", ex->n,
        ",\"m\":", ex->m, ",\"trials\":", trials, ",\"seed\":", config.seed,
        ",\"empirical_mean\":", JsonNum(mean),
        ",\"empirical_variance\":", JsonNum(variance),
        ",\"theoretical_mean\":", JsonNum(ex->theoretical_mean),
        ",\"theoretical_variance\":", JsonNum(ex->theoretical_variance),
        ",\"mean_z\":", JsonNum(mean_z), ",\"variance_z\":", JsonNum(variance_z),
        ",\"variance_rel_error\":", JsonNum(variance_rel_error));
    if (args.per_trial) {
      absl::StrAppend(&text, ",\"estimates\":[",
                      absl::StrJoin(estimates, ",",
                                    [](std::string* out, double v) {
                                      out->append(JsonNum(v));
                                    }),
                      "]");
    }
    absl::StrAppend(&text, "}\n");
  }
  return WriteOutput(io, args.output, text);
}

void AddCommonFlags(CLI::App* sub, std::string& output, std::string& format) {
  sub->add_option("--output,-o", output, "Output path, or - for stdout")
      ->capture_default_str();
  sub->add_option("--format", format, "csv or json")->capture_default_str();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"Unbiased OR/AND and set-union estimation under randomized "
               "response",
               "rrextreme"};
  app.require_subcommand(1);

  PrivatizeArgs privatize;
  CLI::App* privatize_cmd =
      app.add_subcommand("privatize", "Apply randomized response to sketches");
  privatize_cmd->add_option("--input,-i", privatize.input, "Sketch file or -")
      ->capture_default_str();
  auto* q_opt = privatize_cmd->add_option("--q", privatize.q, "Flip probability");
  auto* eps_opt =
      privatize_cmd->add_option("--epsilon", privatize.epsilon, "Epsilon (LDP)");
  q_opt->excludes(eps_opt);
  privatize_cmd->add_option("--seed", privatize.seed, "Random seed")
      ->capture_default_str();
  AddCommonFlags(privatize_cmd, privatize.output, privatize.format);

  EstimateArgs estimate_or, estimate_and;
  CLI::App* or_cmd = app.add_subcommand(
      "estimate-or", "Stream \"bit,q\" lines and estimate their hidden OR");
  or_cmd->add_option("--input,-i", estimate_or.input, "Bit stream or -")
      ->capture_default_str();
  or_cmd->add_option("--seed", privatize.seed, "Unused; accepted for symmetry");
  AddCommonFlags(or_cmd, estimate_or.output, estimate_or.format);
  CLI::App* and_cmd = app.add_subcommand(
      "estimate-and", "Stream \"bit,q\" lines and estimate their hidden AND");
  and_cmd->add_option("--input,-i", estimate_and.input, "Bit stream or -")
      ->capture_default_str();
  and_cmd->add_option("--seed", privatize.seed, "Unused; accepted for symmetry");
  AddCommonFlags(and_cmd, estimate_and.output, estimate_and.format);

  UnionArgs union_args;
  CLI::App* union_cmd = app.add_subcommand(
      "estimate-union", "Estimate the union size of privatized sketches");
  union_cmd->add_option("inputs", union_args.inputs, "Sketch files (- = stdin)")
      ->required();
  union_cmd->add_option("--threads", union_args.threads, "Worker threads")
      ->capture_default_str();
  union_cmd->add_flag("--per-position", union_args.per_position,
                      "Include per-position estimates");
  union_cmd->add_option("--seed", privatize.seed, "Unused; accepted for symmetry");
  AddCommonFlags(union_cmd, union_args.output, union_args.format);

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Tabulate elementary, convolution and Kronecker estimates");
  compare_cmd->add_option("--n", compare.n, "Number of bits")->required();
  compare_cmd->add_option("--q", compare.q, "Shared flip probability")
      ->required();
  compare_cmd->add_option("--mode", compare.mode, "sum or dense")
      ->capture_default_str();
  compare_cmd->add_option("--seed", privatize.seed, "Unused; accepted for symmetry");
  AddCommonFlags(compare_cmd, compare.output, compare.format);

  SimulateArgs simulate;
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "Monte-Carlo check of means and variances");
  simulate_cmd->add_option("--config", simulate.config_path, "Flat JSON config");
  simulate_cmd->add_option("--scenario", simulate.scenario, "or-bits or union");
  simulate_cmd->add_option("--bits", simulate.bits, "Hidden bits, e.g. 0,1");
  simulate_cmd->add_option("--sets", simulate.sets,
                           "Sets, e.g. \"1-50;26-75\"");
  simulate_cmd->add_option("--q", simulate.q, "One q, or one per bit/party");
  simulate_cmd->add_option("--m", simulate.m, "Universe size (union)");
  simulate_cmd->add_option("--trials", simulate.trials, "Replications");
  simulate_cmd->add_option("--seed", simulate.seed, "Random seed");
  simulate_cmd->add_option("--threads", simulate.threads, "Worker threads")
      ->capture_default_str();
  simulate_cmd->add_flag("--per-trial", simulate.per_trial,
                         "Emit each trial's estimate");
  AddCommonFlags(simulate_cmd, simulate.output, simulate.format);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParseError;
  }

  if (privatize_cmd->parsed()) {
    if (!privatize.q.has_value() && !privatize.epsilon.has_value()) {
      return Fail(io, kExitParseError, "privatize needs --q or --epsilon");
    }
    return RunPrivatize(privatize, io);
  }
  if (or_cmd->parsed()) return RunEstimateExtreme(ExtremeKind::kOr, estimate_or, io);
  if (and_cmd->parsed()) {
    return RunEstimateExtreme(ExtremeKind::kAnd, estimate_and, io);
  }
  if (union_cmd->parsed()) return RunEstimateUnion(union_args, io);
  if (compare_cmd->parsed()) return RunCompare(compare, io);
  return RunSimulate(simulate, *simulate_cmd, io);
}

}  // namespace rrextreme::cli
