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

#include "granola/prompts.h"

#include <string>

#include <gtest/gtest.h>

#include "granola/errors.h"
#include "test_util.h"

namespace granola {
namespace {

std::string Golden(const std::string& name) {
  return testing::ReadText(std::string(GRANOLA_TEST_DATA_DIR) +
                           "/golden/prompts/" + name + ".txt");
}

std::string Substitute(std::string text, const std::string& question) {
  const std::string slot = "{question}";
  text.replace(text.find(slot), slot.size(), question);
  return text;
}

class BaselinePromptTest
    : public ::testing::TestWithParam<std::pair<PromptKind, const char*>> {};

TEST_P(BaselinePromptTest, MatchesGoldenFile) {
  const auto [kind, name] = GetParam();
  const std::string golden = Golden(name);
  ASSERT_FALSE(golden.empty()) << name;
  const std::string question = "Where was Fiona Lewis born?";
  EXPECT_EQ(RenderPrompt(kind, {{"question", question}}),
            Substitute(golden, question));
}

INSTANTIATE_TEST_SUITE_P(
    AllBaselines, BaselinePromptTest,
    ::testing::Values(
        std::pair{PromptKind::kVanilla, "vanilla"},
        std::pair{PromptKind::kIdk, "idk"},
        std::pair{PromptKind::kIdkIfUncertain, "idk_if_uncertain"},
        std::pair{PromptKind::kIdkWithAggregation, "idk_with_aggregation"}),
    [](const auto& info) { return std::string(info.param.second); });

TEST(AggregationPromptTest, InstructionsAndDemosVerbatim) {
  const std::string rendered =
      RenderPrompt(PromptKind::kAggregation,
                   {{"question", "When was Ada born?"},
                    {"responses", std::vector<std::string>{"1815", "1816"}}});
  const std::string golden = Golden("aggregation_instructions");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(rendered.substr(0, golden.size()), golden);
  EXPECT_EQ(rendered.substr(golden.size()),
            "\n\nQuestion: When was Ada born?\nResponses:\n- 1815\n- 1816\n"
            "Correct aggregated answer:");
}

TEST(EnrichmentPromptTest, InstructionsVerbatim) {
  const std::string rendered = RenderPrompt(
      PromptKind::kEnrichment, {{"question", "Which label is Courage with?"},
                                {"answer", "Rock Records"},
                                {"question_description", "album"},
                                {"answer_description", "record label"}});
  const std::string golden = Golden("enrichment_instructions");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(rendered.substr(0, golden.size()), golden);
  EXPECT_NE(rendered.find("Rock Records"), std::string::npos);
  EXPECT_NE(rendered.find("record label"), std::string::npos);
}

TEST(ConsistencyPromptTest, HasFiveDemonstrations) {
  const std::string tmpl(PromptTemplate(PromptKind::kConsistencyJudge));
  size_t count = 0;
  for (size_t pos = tmpl.find("Consistent: "); pos != std::string::npos;
       pos = tmpl.find("Consistent: ", pos + 1)) {
    ++count;
  }
  EXPECT_EQ(count, 5u);
  const std::string rendered =
      RenderPrompt(PromptKind::kConsistencyJudge,
                   {{"question", "Where was Berlin founded?"},
                    {"entity", "Berlin"},
                    {"description", "capital of Germany"}});
  EXPECT_TRUE(rendered.ends_with("Consistent:"));
}

TEST(RenderTest, MissingSlotThrows) {
  try {
    RenderPrompt(PromptKind::kVanilla, {});
    FAIL() << "missing slot accepted";
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.placeholder(), "question");
  }
}

TEST(RenderTest, PlaceholdersInOrder) {
  EXPECT_EQ(PromptPlaceholders(PromptKind::kAggregation),
            (std::vector<std::string>{"question", "responses"}));
  EXPECT_EQ(PromptPlaceholders(PromptKind::kVanilla),
            (std::vector<std::string>{"question"}));
}

TEST(RenderTest, SlotTextIsNotReinterpreted) {
  EXPECT_EQ(RenderPrompt(PromptKind::kVanilla, {{"question", "{answer}?"}}),
            "Question: {answer}?\nAnswer:");
}

TEST(PromptKindTest, NamesRoundTrip) {
  for (PromptKind kind :
       {PromptKind::kVanilla, PromptKind::kIdk, PromptKind::kIdkIfUncertain,
        PromptKind::kIdkWithAggregation, PromptKind::kAggregation,
        PromptKind::kEnrichment, PromptKind::kConsistencyJudge}) {
    EXPECT_EQ(ParsePromptKind(PromptKindName(kind)), kind);
  }
  EXPECT_FALSE(ParsePromptKind("nope").has_value());
}

}  // namespace
}  // namespace granola
