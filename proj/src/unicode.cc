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

#include "sublm/unicode.h"

#include <unordered_map>

namespace sublm {
namespace {

// One contiguous run of uppercase code points paired with its lowercase run.
struct CaseRun {
  char32_t upper_start;
  char32_t lower_start;
  int count;
  int stride;  // 1 for parallel runs, 2 for interleaved Uu Uu ... pairs
};

// Simple one-to-one case pairs only.  Code points whose full Unicode case
// mapping is not a single round-tripping code point (ß, İ, ı, ĸ, ŉ, ſ) are
// deliberately absent so that ToUpper(ToLower(u)) == u holds for every
// uppercase u in the table.
constexpr CaseRun kCaseRuns[] = {
    {U'A', U'a', 26, 1},
    {0x00C0, 0x00E0, 23, 1},  // À..Ö, Ø..Þ handled as two runs below the gap
    {0x00D8, 0x00F8, 7, 1},
    {0x0100, 0x0101, 24, 2},  // Ā..į interleaved (stops before İ/ı)
    {0x0132, 0x0133, 3, 2},   // Ĳ Ĵ Ķ
    {0x0139, 0x013A, 8, 2},   // Ĺ..Ň (odd/even pairs)
    {0x014A, 0x014B, 23, 2},  // Ŋ..Ŷ
    {0x0179, 0x017A, 3, 2},   // Ź Ż Ž
    {0x0386, 0x03AC, 1, 1},   // Ά
    {0x0391, 0x03B1, 17, 1},  // Α..Ρ
    {0x03A3, 0x03C3, 7, 1},   // Σ..Ω (lowercase non-final sigma)
    {0x0400, 0x0450, 16, 1},  // Ѐ..Џ
    {0x0410, 0x0430, 32, 1},  // А..Я
};

// Ÿ pairs with ÿ across blocks; final sigma lowers from Σ but never uppers
// back to itself, so it is listed as lowercase-only below.
constexpr std::pair<char32_t, char32_t> kExtraPairs[] = {
    {0x0178, 0x00FF},  // Ÿ / ÿ
};

struct CaseTables {
  std::unordered_map<char32_t, char32_t> to_lower;
  std::unordered_map<char32_t, char32_t> to_upper;
};

const CaseTables& Tables() {
  static const CaseTables* tables = [] {
    auto* t = new CaseTables();
    for (const auto& run : kCaseRuns) {
      for (int i = 0; i < run.count; ++i) {
        char32_t u = run.upper_start + i * run.stride;
        char32_t l = run.lower_start + i * run.stride;
        t->to_lower[u] = l;
        t->to_upper[l] = u;
      }
    }
    for (const auto& [u, l] : kExtraPairs) {
      t->to_lower[u] = l;
      t->to_upper[l] = u;
    }
    t->to_upper[0x03C2] = 0x03A3;  // ς -> Σ (cased, but 0x03A3 lowers to σ)
    return t;
  }();
  return *tables;
}

// 0x00D7 (×) and 0x00F7 (÷) sit inside the Latin-1 letter runs; the run
// table above skips them by construction (C0..D6 and D8..DE).
static_assert(0x00C0 + 23 - 1 == 0x00D6, "Latin-1 upper run ends before x");

}  // namespace

bool DecodeUtf8WithOffsets(std::string_view bytes, std::vector<char32_t>* out,
                           std::vector<int>* byte_offsets) {
  if (out) out->clear();
  if (byte_offsets) byte_offsets->clear();
  size_t i = 0;
  const size_t n = bytes.size();
  while (i < n) {
    unsigned char b0 = bytes[i];
    char32_t cp = 0;
    size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t k = 1; k < len; ++k) {
      unsigned char b = bytes[i + k];
      if ((b & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range values.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000)) {
      return false;
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    if (out) out->push_back(cp);
    if (byte_offsets) byte_offsets->push_back(static_cast<int>(i));
    i += len;
  }
  if (byte_offsets) byte_offsets->push_back(static_cast<int>(n));
  return true;
}

bool DecodeUtf8(std::string_view bytes, std::vector<char32_t>* out) {
  return DecodeUtf8WithOffsets(bytes, out, nullptr);
}

bool IsValidUtf8(std::string_view bytes) {
  return DecodeUtf8WithOffsets(bytes, nullptr, nullptr);
}

void AppendUtf8(char32_t cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string EncodeUtf8(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) AppendUtf8(cp, &out);
  return out;
}

bool IsUppercase(char32_t cp) { return Tables().to_lower.count(cp) > 0; }

bool IsLowercase(char32_t cp) { return Tables().to_upper.count(cp) > 0; }

bool IsCased(char32_t cp) { return IsUppercase(cp) || IsLowercase(cp); }

char32_t ToLower(char32_t cp) {
  auto it = Tables().to_lower.find(cp);
  return it == Tables().to_lower.end() ? cp : it->second;
}

char32_t ToUpper(char32_t cp) {
  auto it = Tables().to_upper.find(cp);
  return it == Tables().to_upper.end() ? cp : it->second;
}

size_t Utf8Length(std::string_view bytes) {
  std::vector<char32_t> cps;
  DecodeUtf8(bytes, &cps);
  return cps.size();
}

}  // namespace sublm
