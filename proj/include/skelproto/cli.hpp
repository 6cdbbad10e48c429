// Copyright 2026 The skelproto Authors
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


#ifndef SKELPROTO_CLI_HPP
#define SKELPROTO_CLI_HPP

#include <iosfwd>

namespace skelproto::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one command line (argv[0] is the program name). Subcommands:
/// generate, train, eval, gradcheck, export-embeddings, export-relations.
/// Returns the process exit code; nothing is thrown.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skelproto::cli

#endif  // SKELPROTO_CLI_HPP
