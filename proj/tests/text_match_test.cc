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

#include "granola/text_match.h"

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace granola {
namespace {

using Tokens = std::vector<std::string>;

TEST(NormalizeTest, LowercasesAndDeletesPunctuation) {
  EXPECT_EQ(Normalize("U.S.A., 1958!").tokens, (Tokens{"usa", "1958"}));
  EXPECT_EQ(Normalize("Barbican Centre").tokens,
            (Tokens{"barbican", "centre"}));
}

TEST(NormalizeTest, DropsStandaloneArticles) {
  EXPECT_EQ(Normalize("The Barbican").tokens, (Tokens{"barbican"}));
  EXPECT_EQ(Normalize("a man and an apple").tokens,
            (Tokens{"man", "and", "apple"}));
  EXPECT_EQ(Normalize("theatre anarchy").tokens,
            (Tokens{"theatre", "anarchy"}));
  EXPECT_TRUE(Normalize("The a AN").empty());
}

TEST(NormalizeTest, SplitsOnUnicodeWhitespace) {
  EXPECT_EQ(Normalize("New York City\tNY\n").tokens,
            (Tokens{"new", "york", "city", "ny"}));
}

TEST(NormalizeTest, LowercasesNonAsciiLetters) {
  EXPECT_EQ(Normalize("ÉCOLE ZÜRICH").tokens,
            (Tokens{"école", "zürich"}));
  EXPECT_EQ(Normalize("Москва").tokens,
            (Tokens{"москва"}));
}

TEST(NormalizeTest, DeletesUnicodePunctuation) {
  EXPECT_EQ(Normalize("“Hello” — world…").tokens,
            (Tokens{"hello", "world"}));
}

TEST(NormalizeTest, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(Normalize("").empty());
  EXPECT_TRUE(Normalize("?!.,").empty());
  EXPECT_EQ(Normalize("").Joined(), "");
}

TEST(NormalizeTest, IdempotentOnRandomText) {
  std::mt19937 rng(7);
  const std::string alphabet = "abcXYZ .,!-'\t01";
  const std::vector<std::string> extras = {"the", "An", "É", " "};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int length = static_cast<int>(rng() % 24);
    for (int i = 0; i < length; ++i) {
      if (rng() % 6 == 0) {
        text += " " + extras[rng() % extras.size()] + " ";
      } else {
        text += alphabet[rng() % alphabet.size()];
      }
    }
    const NormalizedText once = Normalize(text);
    EXPECT_EQ(Normalize(once.Joined()), once) << "input: " << text;
  }
}

TEST(TokenF1Test, KnownValues) {
  EXPECT_DOUBLE_EQ(TokenF1("Barbican Centre", "The Barbican"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(TokenF1("London", "london."), 1.0);
  EXPECT_DOUBLE_EQ(TokenF1("Tokyo", "London"), 0.0);
  EXPECT_DOUBLE_EQ(TokenF1("", "London"), 0.0);
  EXPECT_DOUBLE_EQ(TokenF1("the", "the"), 0.0);
}

TEST(TokenF1Test, CountsRepeatedTokensAsBag) {
  // overlap = min(2,1) + min(1,1) = 2 over lengths 3 and 2.
  EXPECT_DOUBLE_EQ(TokenF1("new new york", "new york"), 0.8);
}

// Multiset intersection by repeated removal, independent of the library.
double OracleF1(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0.0;
  Tokens remaining = b;
  int common = 0;
  for (const auto& token : a) {
    for (size_t i = 0; i < remaining.size(); ++i) {
      if (remaining[i] == token) {
        remaining.erase(remaining.begin() + static_cast<long>(i));
        ++common;
        break;
      }
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / a.size();
  const double recall = static_cast<double>(common) / b.size();
  return 2 * precision * recall / (precision + recall);
}

TEST(TokenF1Test, MatchesBruteForceOracle) {
  std::mt19937 rng(20260101);
  const Tokens vocabulary = {"paris", "london", "1958", "city", "river",
                             "north", "x"};
  auto draw = [&] {
    Tokens tokens(rng() % 9);
    for (auto& token : tokens) token = vocabulary[rng() % vocabulary.size()];
    return tokens;
  };
  auto join = [](const Tokens& tokens) {
    std::string text;
    for (const auto& token : tokens) text += token + " ";
    return text;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const Tokens a = draw();
    const Tokens b = draw();
    EXPECT_NEAR(TokenF1(join(a), join(b)), OracleF1(a, b), 1e-12);
  }
}

TEST(TokenF1Test, Symmetric) {
  EXPECT_DOUBLE_EQ(TokenF1("a b c d", "c d e"), TokenF1("c d e", "a b c d"));
}

TEST(ExactMatchTest, ComparesNormalizedForms) {
  EXPECT_TRUE(ExactMatch("The Barbican", "barbican"));
  EXPECT_FALSE(ExactMatch("Barbican Centre", "barbican"));
  EXPECT_TRUE(ExactMatch("", "..."));
}

}  // namespace
}  // namespace granola
