// Copyright 2026 The Granola Authors.
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

// Answer normalization and lexical matching.
//
// Normalization lower-cases the text, deletes punctuation characters,
// splits on whitespace and drops the standalone English articles
// "a", "an" and "the". Input is treated as UTF-8; bytes that do not decode
// are kept verbatim.

#ifndef GRANOLA_TEXT_MATCH_H_
#define GRANOLA_TEXT_MATCH_H_

#include <string>
#include <string_view>
#include <vector>

namespace granola {

struct NormalizedText {
  std::vector<std::string> tokens;

  bool empty() const { return tokens.empty(); }
  // Tokens joined by single spaces.
  std::string Joined() const;

  bool operator==(const NormalizedText&) const = default;
};

NormalizedText Normalize(std::string_view text);

// Bag-of-tokens F1 between the normalized forms of `a` and `b`. Zero when
// either side normalizes to nothing.
double TokenF1(std::string_view a, std::string_view b);
double TokenF1(const NormalizedText& a, const NormalizedText& b);

// Identical normalized token sequences. Two empty strings match.
bool ExactMatch(std::string_view a, std::string_view b);

}  // namespace granola

#endif  // GRANOLA_TEXT_MATCH_H_
