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

#include "granola/dataset.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "granola/errors.h"
#include "test_util.h"

namespace granola {
namespace {

using nlohmann::json;
using testing::MakeExample;
using testing::ReadText;
using testing::TempDir;
using testing::WriteText;

QAExample Barbican() {
  QAExample example = MakeExample(
      "barbican", {{"Barbican Centre", "The Barbican"}, {"London"}, {"UK"}},
      1200, "P131", "Where is the Barbican located?");
  example.entity = {"the Barbican", "Q207008"};
  return example;
}

TEST(ExampleTest, JsonRoundTrip) {
  QAExample example = Barbican();
  example.provenance = json{{"question_qid", "Q207008"}};
  example.extra = json{{"source", "test"}};
  const QAExample parsed = ExampleFromJson(json::parse(
      ExampleToJson(example).dump()));
  EXPECT_EQ(parsed, example);
}

TEST(ExampleTest, CanonicalFieldOrder) {
  const std::string line = ExampleToJson(Barbican()).dump();
  EXPECT_EQ(line.find("\"id\""), 1u);
  EXPECT_LT(line.find("\"question\""), line.find("\"answers\""));
  EXPECT_LT(line.find("\"answers\""), line.find("\"popularity\""));
}

TEST(ExampleTest, ValidateRejectsCrossLevelDuplicates) {
  QAExample example = MakeExample("x", {{"Paris"}, {"paris."}});
  EXPECT_THROW(Validate(example), ValidationError);
}

TEST(ExampleTest, ValidateRejectsEmptyLevels) {
  EXPECT_THROW(Validate(MakeExample("x", {})), ValidationError);
  EXPECT_THROW(Validate(MakeExample("x", {{"a"}, {}})), ValidationError);
}

TEST(ExampleTest, ValidateChecksQidAndPopularity) {
  QAExample example = MakeExample("x", {{"a"}});
  example.entity.qid = "64";
  EXPECT_THROW(Validate(example), ValidationError);
  example.entity.qid = "Q64";
  EXPECT_NO_THROW(Validate(example));
  example.popularity = -1;
  try {
    Validate(example);
    FAIL() << "negative popularity accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "popularity");
  }
}

TEST(QidTest, Format) {
  EXPECT_TRUE(IsValidQid("Q64"));
  EXPECT_TRUE(IsValidQid("Q1"));
  EXPECT_FALSE(IsValidQid("Q"));
  EXPECT_FALSE(IsValidQid("q64"));
  EXPECT_FALSE(IsValidQid("Q6a"));
  EXPECT_FALSE(IsValidQid("P19"));
}

TEST(PredictionTest, ExactlyOneOfAnswerAndIdk) {
  EXPECT_NO_THROW(PredictionFromJson(json{{"id", "a"}, {"answer", "x"}}));
  EXPECT_NO_THROW(PredictionFromJson(json{{"id", "a"}, {"idk", true}}));
  EXPECT_THROW(PredictionFromJson(
                   json{{"id", "a"}, {"answer", "x"}, {"idk", true}}),
               ValidationError);
  EXPECT_THROW(PredictionFromJson(json{{"id", "a"}}), ValidationError);
}

TEST(PredictionTest, RoundTripKeepsSamplesAndMetadata) {
  Prediction p = Prediction::Answer("q1", "drag", "1958");
  p.samples = {"March 22, 1958", "May 19, 1958"};
  p.metadata = json{{"n", 2}};
  const Prediction parsed =
      PredictionFromJson(json::parse(PredictionToJson(p).dump()));
  EXPECT_EQ(parsed.example_id, "q1");
  EXPECT_EQ(parsed.method, "drag");
  EXPECT_EQ(parsed.answer, "1958");
  EXPECT_EQ(parsed.samples, p.samples);
  EXPECT_EQ(parsed.metadata, p.metadata);
}

TEST(DatasetIoTest, WriteThenLoadIsIdentity) {
  TempDir dir;
  std::vector<QAExample> examples = {
      Barbican(), MakeExample("fiona", {{"Westcliff-on-Sea"}, {"Essex"}})};
  WriteDataset(examples, dir / "d.jsonl");
  const LoadedDataset loaded = LoadDataset(dir / "d.jsonl", true);
  EXPECT_EQ(loaded.examples, examples);
  EXPECT_TRUE(loaded.errors.empty());
  WriteDataset(loaded.examples, dir / "e.jsonl");
  EXPECT_EQ(ReadText(dir / "d.jsonl"), ReadText(dir / "e.jsonl"));
}

TEST(DatasetIoTest, StrictModeReportsLineNumber) {
  TempDir dir;
  const std::string good = ExampleToJson(Barbican()).dump();
  WriteText(dir / "d.jsonl", good + "\n\n{not json\n");
  try {
    LoadDataset(dir / "d.jsonl", true);
    FAIL() << "malformed line accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(DatasetIoTest, StrictModeValidationMentionsLine) {
  TempDir dir;
  json bad = json::parse(ExampleToJson(Barbican()).dump());
  bad["answers"] = json::array();
  WriteText(dir / "d.jsonl", bad.dump() + "\n");
  try {
    LoadDataset(dir / "d.jsonl", true);
    FAIL() << "invalid row accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "answers");
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(DatasetIoTest, LenientModeCollectsErrors) {
  TempDir dir;
  const std::string good = ExampleToJson(Barbican()).dump();
  WriteText(dir / "d.jsonl", good + "\n{bad\n" + good + "\n");
  const LoadedDataset loaded = LoadDataset(dir / "d.jsonl", false);
  ASSERT_EQ(loaded.examples.size(), 1u);
  ASSERT_EQ(loaded.errors.size(), 2u);
  EXPECT_EQ(loaded.errors[0].line, 2);
  EXPECT_EQ(loaded.errors[1].line, 3);  // duplicate id
}

TEST(DatasetIoTest, MissingFileIsIoError) {
  EXPECT_THROW(LoadDataset("/nonexistent/granola.jsonl", true), IoError);
}

TEST(StatsTest, CountsAndHistogram) {
  std::vector<QAExample> examples = {
      MakeExample("a", {{"x"}, {"y"}, {"z"}}, std::nullopt, "P19"),
      MakeExample("b", {{"x"}, {"y"}, {"z"}}, std::nullopt, "P19"),
      MakeExample("c", {{"x"}}, std::nullopt, "P20"),
      MakeExample("d", {{"x"}, {"y"}}, std::nullopt, "P36")};
  const CorpusStats stats = ComputeStats(examples);
  EXPECT_EQ(stats.num_examples, 4);
  EXPECT_EQ(stats.num_relations, 3);
  EXPECT_DOUBLE_EQ(stats.mean_answers_per_question, 9.0 / 4.0);
  double total = 0;
  double mean = 0;
  for (const auto& [levels, fraction] : stats.answer_count_histogram) {
    total += fraction;
    mean += levels * fraction;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_NEAR(mean, stats.mean_answers_per_question, 1e-9);
  EXPECT_DOUBLE_EQ(stats.answer_count_histogram.at(3), 0.5);
}

TEST(StatsTest, EmptyCorpus) {
  const CorpusStats stats = ComputeStats({});
  EXPECT_EQ(stats.num_examples, 0);
  EXPECT_TRUE(stats.answer_count_histogram.empty());
}

}  // namespace
}  // namespace granola
