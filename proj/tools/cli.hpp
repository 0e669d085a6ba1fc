// cli.hpp
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
//
// The pgforge command line. Kept apart from main() so tests can drive it
// with in-memory streams.

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pgforge::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes. Usage and input-format problems share 2.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kValidationError = 3,
  kIoError = 4,
};

/// Runs one command. `args` excludes the program name. Machine output goes
/// to `out`, every diagnostic to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace pgforge::cli
