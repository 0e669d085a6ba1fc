// utf8.hpp
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

#include <string>
#include <string_view>
#include <vector>

namespace pgforge {

// Throws InvalidUtf8 on malformed input. Surrogates and overlong forms are
// rejected.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
std::string encode_utf8(char32_t cp);

/// "03AC", "1F71", "10400": uppercase hex, at least four digits.
std::string codepoint_hex(char32_t cp);

bool is_unicode_space(char32_t cp);

/// Splits on runs of Unicode whitespace; never yields empty pieces.
std::vector<std::u32string> split_on_whitespace(std::u32string_view text);
std::vector<std::string> split_on_whitespace(std::string_view utf8_text);

}  // namespace pgforge
