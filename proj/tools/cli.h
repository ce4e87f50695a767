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

#ifndef RREXTREME_TOOLS_CLI_H_
#define RREXTREME_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace rrextreme::cli {

enum ExitCode : int {
  kExitOk = 0,
  // Malformed command line, sketch file, bit stream, or config.
  kExitParseError = 2,
  // Well-formed input that violates a precondition (q out of range, n over
  // a cap, double privatization, no observations, ...).
  kExitPreconditionError = 3,
  // `compare` found estimators disagreeing beyond tolerance.
  kExitEquivalenceFailure = 4,
  kExitIoError = 5,
};

// Runs one command line. `args` excludes the program name. Input named "-"
// is read from `in`; output goes to `out` unless --output names a file.
int Run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace rrextreme::cli

#endif  // RREXTREME_TOOLS_CLI_H_
