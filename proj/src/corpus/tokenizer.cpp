// Copyright 2026 The RPR Authors
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

#include <cstdint>
#include <string>
#include <vector>

#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

struct Cp {
  uint32_t value;
  int width;
};

// Decodes one UTF-8 codepoint; malformed bytes decode as themselves with
// width 1 so tokenization never throws on dirty text.
Cp decode(const std::string& s, size_t i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0 && cont(1))
    return {static_cast<uint32_t>((b0 & 0x1fu) << 6 | (s[i + 1] & 0x3fu)), 2};
  if ((b0 & 0xf0) == 0xe0 && cont(1) && cont(2))
    return {static_cast<uint32_t>((b0 & 0x0fu) << 12 | (s[i + 1] & 0x3fu) << 6 |
                                  (s[i + 2] & 0x3fu)),
            3};
  if ((b0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3))
    return {static_cast<uint32_t>((b0 & 0x07u) << 18 | (s[i + 1] & 0x3fu) << 12 |
                                  (s[i + 2] & 0x3fu) << 6 | (s[i + 3] & 0x3fu)),
            4};
  return {b0, 1};
}

bool is_space_cp(uint32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' ||
         c == 0xa0 || (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 ||
         c == 0x202f || c == 0x205f || c == 0x3000;
}

bool is_punct_cp(uint32_t c) {
  if (c < 0x80)
    return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
           (c >= 0x7b && c <= 0x7e);
  return (c >= 0xa1 && c <= 0xbf) || c == 0xd7 || c == 0xf7 ||
         (c >= 0x2010 && c <= 0x205e) || (c >= 0x3001 && c <= 0x303f) ||
         (c >= 0xff01 && c <= 0xff0f) || (c >= 0xff1a && c <= 0xff20) ||
         (c >= 0xff3b && c <= 0xff40) || (c >= 0xff5b && c <= 0xff65);
}

bool is_word_cp(uint32_t c) { return !is_space_cp(c) && !is_punct_cp(c); }

void append_utf8(std::string& out, uint32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  // Single pass over normalized codepoints: curly apostrophes and unicode
  // hyphens fold onto their ASCII forms first, then hyphen/apostrophe
  // survive only between word characters; all other punctuation is removed.
  std::vector<uint32_t> cps;
  cps.reserve(text.size());
  for (size_t i = 0; i < text.size();) {
    Cp cp = decode(text, i);
    i += static_cast<size_t>(cp.width);
    uint32_t c = cp.value;
    if (c >= 'A' && c <= 'Z') c += 32;
    if (c == 0x2019 || c == 0x02bc) c = '\'';
    if (c >= 0x2010 && c <= 0x2015) c = '-';
    cps.push_back(c);
  }

  std::vector<std::string> tokens;
  std::string cur;
  bool prev_word = false;
  for (size_t i = 0; i < cps.size(); ++i) {
    const uint32_t c = cps[i];
    if (is_space_cp(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
      prev_word = false;
      continue;
    }
    if (c == '-' || c == '\'') {
      const bool next_word = i + 1 < cps.size() && is_word_cp(cps[i + 1]);
      if (prev_word && next_word) {
        cur.push_back(static_cast<char>(c));
        prev_word = false;  // a second hyphen in a row does not survive
      }
      continue;
    }
    if (is_punct_cp(c)) continue;
    append_utf8(cur, c);
    prev_word = true;
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace rpr::corpus
