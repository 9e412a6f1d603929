// Copyright 2026 The biasforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIASFORGE_CLI_H
#define BIASFORGE_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

namespace biasforge::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBoundViolation = 3;
constexpr int kExitInfeasible = 4;

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Shortest decimal string that parses back to exactly `x` ("inf", "-inf", "nan" otherwise).
std::string format_double(double x);

/// Worker threads from BIASFORGE_THREADS; 0 (auto) when unset or empty.
unsigned threads_from_env();

}  // namespace biasforge::cli

#endif
