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

#include "granola/drag.h"

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "granola/errors.h"
#include "granola/text_match.h"
#include "fixtures.h"
#include "test_util.h"

namespace granola {
namespace {

using nlohmann::json;
using Strings = std::vector<std::string>;
using testing::AggregationPrompt;
using testing::VanillaPrompt;

SampleSet Samples(Strings responses) {
  SampleSet set;
  set.question = "q";
  set.responses = std::move(responses);
  return set;
}

TEST(SampleResponsesTest, ReturnsScriptedSamples) {
  const Strings dates = {"March 22, 1958", "May 19, 1958", "August 15, 1958",
                         "June 1, 1958", "July 4, 1958"};
  auto llm = testing::MockGateway({{VanillaPrompt("When?"), dates}});
  const SampleSet set =
      SampleResponses(*llm, "When?", 5, 1.0, PromptKind::kVanilla);
  EXPECT_EQ(set.responses, dates);
  EXPECT_EQ(set.temperature, 1.0);
}

TEST(SampleResponsesTest, GreedySingleSample) {
  auto llm = testing::MockGateway({{VanillaPrompt("When?"), {"1958", "1957"}}});
  EXPECT_EQ(SampleResponses(*llm, "When?", 1, 0.0, PromptKind::kVanilla)
                .responses,
            Strings{"1958"});
}

TEST(SampleResponsesTest, RejectsBadArguments) {
  auto llm = testing::MockGateway({{"*", {"x"}}});
  EXPECT_THROW(SampleResponses(*llm, "q", 0, 1.0, PromptKind::kVanilla),
               ConfigError);
  EXPECT_THROW(SampleResponses(*llm, "q", 1, -0.5, PromptKind::kVanilla),
               ConfigError);
}

TEST(SampleResponsesTest, CutsAtNewline) {
  auto llm = testing::MockGateway(
      {{VanillaPrompt("q"), {" Paris\nQuestion: more"}}});
  EXPECT_EQ(SampleResponses(*llm, "q", 1, 0.0, PromptKind::kVanilla).responses,
            Strings{"Paris"});
}

TEST(MajorityTest, SpecExamples) {
  EXPECT_EQ(AggregateMajority(Samples({"1958", "1958", "1957"})).answer,
            "1958");
  EXPECT_EQ(AggregateMajority(Samples({"The Barbican", "barbican", "London"}))
                .answer,
            "The Barbican");
  EXPECT_EQ(AggregateMajority(Samples({"a", "b", "c"})).answer, "a");
  EXPECT_EQ(AggregateMajority(Samples({"b", "a", "a", "b"})).answer, "b");
}

TEST(MajorityTest, NeverAbstains) {
  const auto outcome = AggregateMajority(Samples({"x"}));
  EXPECT_FALSE(outcome.idk);
  EXPECT_EQ(outcome.aggregator, AggregatorKind::kMajority);
}

// Brute-force mode with earliest-first-occurrence tie-break.
std::string OracleMode(const Strings& responses) {
  std::map<std::string, int> count;
  std::map<std::string, size_t> first;
  for (size_t i = 0; i < responses.size(); ++i) {
    const std::string key = Normalize(responses[i]).Joined();
    ++count[key];
    first.emplace(key, i);
  }
  size_t best = 0;
  for (const auto& [key, c] : count) {
    const size_t at = first[key];
    const int best_count = count[Normalize(responses[best]).Joined()];
    if (c > best_count || (c == best_count && at < best)) best = at;
  }
  return responses[best];
}

TEST(MajorityTest, MatchesBruteForceOnAllSmallSequences) {
  // Each symbol has two surface forms that normalize identically.
  const std::vector<Strings> symbols = {
      {"Paris", "paris."}, {"The Hague", "hague"}, {"Rome", "ROME"}};
  int checked = 0;
  for (int n = 1; n <= 5; ++n) {
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 6;
    for (int code = 0; code < total; ++code) {
      Strings responses;
      int rest = code;
      for (int i = 0; i < n; ++i) {
        const int digit = rest % 6;
        rest /= 6;
        responses.push_back(symbols[digit / 2][digit % 2]);
      }
      ASSERT_EQ(AggregateMajority(Samples(responses)).answer,
                OracleMode(responses))
          << ::testing::PrintToString(responses);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 6 + 36 + 216 + 1296 + 7776);
}

TEST(MajorityTest, StrictMajorityIsPermutationInvariant) {
  Strings responses = {"x", "y", "x", "z", "X"};
  std::sort(responses.begin(), responses.end());
  do {
    EXPECT_EQ(Normalize(*AggregateMajority(Samples(responses)).answer).Joined(),
              "x");
  } while (std::next_permutation(responses.begin(), responses.end()));
}

TEST(IdentityTest, ReturnsFirstResponse) {
  EXPECT_EQ(AggregateIdentity(Samples({"  exact  "})).answer, "  exact  ");
}

TEST(LlmAggregatorTest, YearFromDates) {
  const Strings dates = {"March 22, 1958", "May 19, 1958", "August 15, 1958"};
  SampleSet set = Samples(dates);
  auto llm = testing::MockGateway({{AggregationPrompt("q", dates), {"1958"}}});
  const auto outcome = AggregateLlm(set, *llm);
  EXPECT_EQ(outcome.answer, "1958");
  EXPECT_FALSE(outcome.idk);
  EXPECT_EQ(outcome.aggregator, AggregatorKind::kLlm);
}

TEST(LlmAggregatorTest, AnswerOutsideSampleSet) {
  const Strings cities = {"Hamburg", "Hamburg", "Bonn", "Berlin"};
  auto llm =
      testing::MockGateway({{AggregationPrompt("q", cities), {"Germany"}}});
  EXPECT_EQ(AggregateLlm(Samples(cities), *llm).answer, "Germany");
}

TEST(LlmAggregatorTest, IdkMarker) {
  auto llm = testing::MockGateway({{"*", {"IDK"}}});
  const auto outcome = AggregateLlm(Samples({"a", "b"}), *llm);
  EXPECT_TRUE(outcome.idk);
  EXPECT_FALSE(outcome.answer.has_value());
}

TEST(LlmAggregatorTest, ProviderFailureFallback) {
  auto llm = testing::MockGateway({{"unrelated", {"x"}}});
  EXPECT_THROW(AggregateLlm(Samples({"b", "a", "a"}), *llm), ProviderError);
  LlmAggregatorOptions options;
  options.fallback = AggregatorFallback::kMajority;
  const auto outcome = AggregateLlm(Samples({"b", "a", "a"}), *llm, options);
  EXPECT_EQ(outcome.answer, "a");
  EXPECT_EQ(outcome.aggregator, AggregatorKind::kMajority);
}

TEST(DragTest, AllDistinctCitiesGiveIdk) {
  const Strings cities = {"Quito", "Oslo", "Hanoi", "Dakar", "Reno"};
  json script;
  testing::ScriptDragQuestion(script, "Where?", cities, "IDK");
  auto llm = testing::MockGateway(script);
  const Prediction p = Drag("e1", "Where?", *llm, DragOptions{});
  EXPECT_TRUE(p.idk);
  EXPECT_EQ(p.method, "drag");
  EXPECT_EQ(p.samples, cities);
  EXPECT_EQ(p.metadata["aggregator"], "llm");
  EXPECT_EQ(p.metadata["n"], 5);
}

TEST(DragTest, SingleSampleIdentityEqualsGreedy) {
  json script = json::object();
  std::vector<QAExample> examples;
  for (int i = 0; i < 100; ++i) {
    const std::string q = "Question number " + std::to_string(i) + "?";
    script[VanillaPrompt(q)] = {"answer " + std::to_string(i * 7 % 13),
                                "other"};
    examples.push_back(
        testing::MakeExample("q" + std::to_string(i), {{"x"}}, {}, "P19", q));
  }
  auto llm = testing::MockGateway(script, 3);
  DecoderConfig greedy;
  DecoderConfig drag;
  drag.method = DecodeMethod::kDrag;
  drag.n = 1;
  drag.temperature = 0.0;
  drag.aggregator = AggregatorKind::kIdentity;
  for (const auto& example : examples) {
    const Prediction a = DecodeExample(example, *llm, greedy);
    const Prediction b = DecodeExample(example, *llm, drag);
    EXPECT_EQ(a.answer, b.answer);
    EXPECT_EQ(a.idk, b.idk);
  }
}

TEST(DragTest, MajorityAggregatorEqualsSelfConsistency) {
  auto scenario = testing::CoarseKnowerScenario();
  auto llm = testing::MockGateway(scenario.script, 2);
  DecoderConfig sc;
  sc.method = DecodeMethod::kSelfConsistency;
  DecoderConfig drag = sc;
  drag.method = DecodeMethod::kDrag;
  drag.aggregator = AggregatorKind::kMajority;
  for (const auto& example : scenario.examples) {
    const Prediction a = DecodeExample(example, *llm, sc);
    const Prediction b = DecodeExample(example, *llm, drag);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.answer, b.answer);
    EXPECT_EQ(a.idk, b.idk);
  }
}

TEST(DecodeTest, PromptBaselinesUseTheirPrompts) {
  const std::string q = "Where was Fiona Lewis born?";
  json script = {
      {RenderPrompt(PromptKind::kIdk, {{"question", q}}), {"IDK"}},
      {RenderPrompt(PromptKind::kIdkIfUncertain, {{"question", q}}),
       {"Essex"}},
      {RenderPrompt(PromptKind::kIdkWithAggregation, {{"question", q}}),
       {"England"}}};
  auto llm = testing::MockGateway(script);
  const QAExample example = testing::MakeExample("f", {{"x"}}, {}, "P19", q);
  DecoderConfig config;
  config.method = DecodeMethod::kIdk;
  EXPECT_TRUE(DecodeExample(example, *llm, config).idk);
  config.method = DecodeMethod::kIdkUncertain;
  EXPECT_EQ(DecodeExample(example, *llm, config).answer, "Essex");
  config.method = DecodeMethod::kIdkAgg;
  EXPECT_EQ(DecodeExample(example, *llm, config).answer, "England");
}

TEST(DecodeTest, RefusalIsRecordedNotDropped) {
  auto llm = testing::MockGateway({{"*", {{{"refusal", "blocked"}}}}});
  const QAExample example = testing::MakeExample("f", {{"x"}});
  const Prediction p = DecodeExample(example, *llm, DecoderConfig{});
  EXPECT_EQ(p.answer, "");
  EXPECT_NE(p.metadata["error"].get<std::string>().find("blocked"),
            std::string::npos);
}

TEST(DecodeDatasetTest, ParallelOutputMatchesSerial) {
  auto scenario = testing::PopularityScenario();
  auto llm = testing::MockGateway(scenario.script);
  DecoderConfig config;
  config.method = DecodeMethod::kDrag;
  const auto serial = DecodeDataset(scenario.examples, *llm, config);
  config.parallelism = 8;
  Strings order;
  const auto parallel = DecodeDataset(
      scenario.examples, *llm, config,
      [&](const Prediction& p) { order.push_back(p.example_id); });
  ASSERT_EQ(serial.size(), parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(PredictionToJson(serial[i]), PredictionToJson(parallel[i]));
    EXPECT_EQ(order[i], scenario.examples[i].id);
  }
}

TEST(DecodeDatasetTest, FailureNamesExampleAndFlushesPrefix) {
  json script = {{VanillaPrompt("ok 1"), {"a"}}, {VanillaPrompt("ok 2"), {"b"}}};
  auto llm = testing::MockGateway(script);
  const std::vector<QAExample> examples = {
      testing::MakeExample("e1", {{"a"}}, {}, "P19", "ok 1"),
      testing::MakeExample("e2", {{"b"}}, {}, "P19", "ok 2"),
      testing::MakeExample("e3", {{"c"}}, {}, "P19", "unscripted"),
      testing::MakeExample("e4", {{"d"}}, {}, "P19", "ok 1")};
  Strings flushed;
  try {
    DecodeDataset(examples, *llm, DecoderConfig{},
                  [&](const Prediction& p) { flushed.push_back(p.example_id); });
    FAIL() << "missing script entry accepted";
  } catch (const ProviderError& e) {
    EXPECT_NE(std::string(e.what()).find("example e3"), std::string::npos);
  }
  EXPECT_EQ(flushed, (Strings{"e1", "e2"}));
}

TEST(DecoderConfigTest, JsonRoundTrip) {
  DecoderConfig config;
  config.method = DecodeMethod::kDrag;
  config.n = 7;
  config.temperature = 1.0;
  config.aggregator = AggregatorKind::kMajority;
  config.sample_prompt = PromptKind::kIdk;
  const DecoderConfig parsed =
      DecoderConfigFromJson(json::parse(ToJson(config).dump()));
  EXPECT_EQ(ToJson(parsed), ToJson(config));
  EXPECT_THROW(DecoderConfigFromJson({{"method", "beam"}}), ConfigError);
  DecoderConfig bad;
  bad.n = 0;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

}  // namespace
}  // namespace granola
