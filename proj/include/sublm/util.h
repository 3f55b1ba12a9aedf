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

#ifndef SUBLM_UTIL_H_
#define SUBLM_UTIL_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sublm {

// Error taxonomy mirrored by the CLI exit codes: usage = 1, data = 2,
// numerical = 3.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits on runs of spaces and tabs; never yields empty tokens.
std::vector<std::string> SplitTokens(std::string_view line);

std::string JoinTokens(const std::vector<std::string>& tokens);

// Reads a whole file as lines (without trailing '\n' / '\r').  Every line is
// validated as UTF-8; a malformed byte sequence raises DataError naming the
// 1-based line number.
std::vector<std::string> ReadLines(const std::string& path);

void WriteLines(const std::string& path, const std::vector<std::string>& lines);

std::string ReadFileBytes(const std::string& path);

// FNV-1a 64-bit content hash, hex-encoded.  Used for run manifests.
uint64_t Fnv1a64(std::string_view bytes);
std::string HashHex(std::string_view bytes);

// Shortest decimal form that round-trips a double (printf %.17g).
std::string FormatDouble(double value);

// Fixed-point with the given number of decimals.
std::string FormatFixed(double value, int decimals);

double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);

}  // namespace sublm

#endif  // SUBLM_UTIL_H_
