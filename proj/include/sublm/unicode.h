// Copyright 2026 The sublm Authors.
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

#ifndef SUBLM_UNICODE_H_
#define SUBLM_UNICODE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sublm {

bool IsValidUtf8(std::string_view bytes);

// Decodes strict UTF-8 (rejects overlong forms, surrogates, > U+10FFFF).
// Returns false on malformed input.
bool DecodeUtf8(std::string_view bytes, std::vector<char32_t>* out);

// As above but also records the byte offset where each code point starts,
// plus one past-the-end offset.  Offsets make code-point substrings cheap.
bool DecodeUtf8WithOffsets(std::string_view bytes, std::vector<char32_t>* out,
                           std::vector<int>* byte_offsets);

void AppendUtf8(char32_t cp, std::string* out);
std::string EncodeUtf8(const std::vector<char32_t>& cps);

// Case predicates over a compiled table of simple, bijective case pairs
// (Latin, Latin-1, Latin Extended-A, Greek, Cyrillic).  Code points outside
// the table count as uncased, which keeps the <up> transform reversible for
// any input.
bool IsUppercase(char32_t cp);
bool IsLowercase(char32_t cp);
bool IsCased(char32_t cp);
char32_t ToLower(char32_t cp);  // identity when no simple mapping exists
char32_t ToUpper(char32_t cp);

// Number of code points in a valid UTF-8 string.
size_t Utf8Length(std::string_view bytes);

}  // namespace sublm

#endif  // SUBLM_UNICODE_H_
