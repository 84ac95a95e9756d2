// Copyright 2026 The Authors.
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace celebprof {

inline constexpr const char* kVersion = "1.0.0";

// Runs one command line (args[0] is the program name). Diagnostics go to
// `err` as single-line JSON records. Returns the process exit status:
// 0 success, 1 configuration error, 2 data error, 3 internal error.
int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace celebprof
