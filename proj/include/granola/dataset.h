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

// Domain types for multi-granularity QA data: examples with ordered answer
// levels, model predictions, and corpus statistics. Serialized as JSONL.

#ifndef GRANOLA_DATASET_H_
#define GRANOLA_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace granola {

struct EntityRef {
  std::string surface;
  // Knowledge-graph identifier, e.g. "Q64".
  std::optional<std::string> qid;

  bool operator==(const EntityRef&) const = default;
};

// Aliases within one level are interchangeable and carry no order semantics,
// but their stored order is kept for deterministic tie-breaking.
using AnswerLevel = std::vector<std::string>;

// One question with its gold answers ordered from the most fine-grained
// (level 1, the original dataset answers) to the coarsest.
struct QAExample {
  std::string id;
  std::string question;
  std::string relation;
  EntityRef entity;
  std::vector<AnswerLevel> answers;
  std::optional<int64_t> popularity;
  std::optional<nlohmann::json> provenance;
  // Unknown top-level fields, kept so that load/write round-trips them.
  nlohmann::json extra = nlohmann::json::object();

  int num_levels() const { return static_cast<int>(answers.size()); }

  bool operator==(const QAExample&) const = default;
};

// A method's answer for one example: either a text answer or an abstention.
struct Prediction {
  std::string example_id;
  std::string method;
  std::optional<std::string> answer;
  bool idk = false;
  std::vector<std::string> samples;
  nlohmann::json metadata = nlohmann::json::object();

  static Prediction Answer(std::string example_id, std::string method,
                           std::string answer);
  static Prediction Idk(std::string example_id, std::string method);

  bool operator==(const Prediction&) const = default;
};

struct CorpusStats {
  int64_t num_examples = 0;
  int64_t num_relations = 0;
  double mean_answers_per_question = 0.0;
  // Number of answer levels -> fraction of examples.
  std::map<int, double> answer_count_histogram;
};

struct RowError {
  int line = 0;
  std::string message;
};

struct LoadedDataset {
  std::vector<QAExample> examples;
  // Rows rejected in non-strict mode.
  std::vector<RowError> errors;
};

// Throws ValidationError naming the offending field.
void Validate(const QAExample& example);
void Validate(const Prediction& prediction);

QAExample ExampleFromJson(const nlohmann::json& record);
nlohmann::ordered_json ExampleToJson(const QAExample& example);

Prediction PredictionFromJson(const nlohmann::json& record);
nlohmann::ordered_json PredictionToJson(const Prediction& prediction);

// Reads one JSON record per line. Blank lines are skipped. In strict mode
// the first malformed or invalid row throws (ParseError / ValidationError);
// otherwise such rows are reported in LoadedDataset::errors. Duplicate ids
// are treated as validation failures.
LoadedDataset LoadDataset(const std::filesystem::path& path, bool strict);
void WriteDataset(std::span<const QAExample> examples,
                  const std::filesystem::path& path);

std::vector<Prediction> LoadPredictions(const std::filesystem::path& path);
void WritePredictions(std::span<const Prediction> predictions,
                      const std::filesystem::path& path);

CorpusStats ComputeStats(std::span<const QAExample> examples);
nlohmann::ordered_json StatsToJson(const CorpusStats& stats);

// True iff `qid` matches ^Q[0-9]+$ and the number fits in 64 bits.
bool IsValidQid(std::string_view qid);

}  // namespace granola

#endif  // GRANOLA_DATASET_H_
