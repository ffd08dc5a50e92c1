// Copyright 2026 The dflow Authors.
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

#ifndef DFLOW_CLI_HPP_
#define DFLOW_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace dflow {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags, unreadable or malformed input
  kExitPartial = 2,   // some turns diverged or did not match
  kExitEngine = 3,    // the engine raised an exception (agent prompt)
};

// Runs `dflow <args...>` (args exclude the program name). The REPL reads
// from `in`; everything else writes only to `out`, `err` and the paths
// named by flags.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace dflow

#endif  // DFLOW_CLI_HPP_
