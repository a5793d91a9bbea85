// Copyright 2026 The MSIC Authors
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

#ifndef MSIC_TOOLS_CLI_H_
#define MSIC_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace msic::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitModelMismatch = 3;

// Runs the msic command line; args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace msic::cli

#endif  // MSIC_TOOLS_CLI_H_
