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

#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "granola/errors.h"
#include "granola/text_match.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string>& KnownExampleFields() {
  static const std::set<std::string> kFields = {
      "id", "question", "relation", "entity", "answers", "popularity",
      "provenance"};
  return kFields;
}

const json& RequireField(const json& record, const std::string& field) {
  auto it = record.find(field);
  if (it == record.end()) {
    throw ValidationError(field, "missing required field");
  }
  return *it;
}

std::string RequireString(const json& record, const std::string& field) {
  const json& value = RequireField(record, field);
  if (!value.is_string()) throw ValidationError(field, "expected a string");
  return value.get<std::string>();
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void CheckWritten(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

Prediction Prediction::Answer(std::string example_id, std::string method,
                              std::string answer) {
  Prediction p;
  p.example_id = std::move(example_id);
  p.method = std::move(method);
  p.answer = std::move(answer);
  return p;
}

Prediction Prediction::Idk(std::string example_id, std::string method) {
  Prediction p;
  p.example_id = std::move(example_id);
  p.method = std::move(method);
  p.idk = true;
  return p;
}

bool IsValidQid(std::string_view qid) {
  if (qid.size() < 2 || qid.size() > 20 || qid[0] != 'Q') return false;
  for (char c : qid.substr(1)) {
    if (c < '0' || c > '9') return false;
  }
  if (qid.size() == 20 && qid.substr(1) > "18446744073709551615") return false;
  return true;
}

void Validate(const QAExample& example) {
  if (example.id.empty()) throw ValidationError("id", "must be non-empty");
  if (example.answers.empty()) {
    throw ValidationError("answers", "at least one answer level is required");
  }
  std::unordered_map<std::string, size_t> seen;
  for (size_t level = 0; level < example.answers.size(); ++level) {
    if (example.answers[level].empty()) {
      throw ValidationError("answers", "level " + std::to_string(level + 1) +
                                           " is empty");
    }
    for (const auto& answer : example.answers[level]) {
      const std::string key = Normalize(answer).Joined();
      auto [it, inserted] = seen.emplace(key, level + 1);
      if (!inserted) {
        throw ValidationError(
            "answers", "answer '" + answer + "' at level " +
                           std::to_string(level + 1) +
                           " duplicates an answer at level " +
                           std::to_string(it->second) + " after normalization");
      }
    }
  }
  if (example.entity.qid && !IsValidQid(*example.entity.qid)) {
    throw ValidationError("entity.qid", "'" + *example.entity.qid +
                                            "' does not match ^Q[0-9]+$");
  }
  if (example.popularity && *example.popularity < 0) {
    throw ValidationError("popularity", "must be non-negative");
  }
}

void Validate(const Prediction& prediction) {
  if (prediction.example_id.empty()) {
    throw ValidationError("id", "must be non-empty");
  }
  if (prediction.idk == prediction.answer.has_value()) {
    throw ValidationError("answer",
                          "exactly one of 'answer' and 'idk' must be set");
  }
}

QAExample ExampleFromJson(const json& record) {
  if (!record.is_object()) throw ValidationError("<record>", "not an object");
  QAExample example;
  example.id = RequireString(record, "id");
  example.question = RequireString(record, "question");
  example.relation = RequireString(record, "relation");

  const json& entity = RequireField(record, "entity");
  if (!entity.is_object()) throw ValidationError("entity", "expected object");
  example.entity.surface = RequireString(entity, "surface");
  if (auto it = entity.find("qid"); it != entity.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("entity.qid", "expected string");
    example.entity.qid = it->get<std::string>();
  }

  const json& answers = RequireField(record, "answers");
  if (!answers.is_array()) {
    throw ValidationError("answers", "expected an array of arrays of strings");
  }
  for (const json& level : answers) {
    if (!level.is_array()) {
      throw ValidationError("answers", "each level must be an array");
    }
    AnswerLevel parsed;
    for (const json& alias : level) {
      if (!alias.is_string()) {
        throw ValidationError("answers", "answers must be strings");
      }
      parsed.push_back(alias.get<std::string>());
    }
    example.answers.push_back(std::move(parsed));
  }

  if (auto it = record.find("popularity");
      it != record.end() && !it->is_null()) {
    if (it->is_number_unsigned()) {
      example.popularity = static_cast<int64_t>(it->get<uint64_t>());
    } else if (it->is_number_integer()) {
      example.popularity = it->get<int64_t>();
    } else {
      throw ValidationError("popularity", "expected an integer");
    }
  }
  if (auto it = record.find("provenance");
      it != record.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("provenance", "expected object");
    example.provenance = *it;
  }
  for (const auto& [key, value] : record.items()) {
    if (!KnownExampleFields().contains(key)) example.extra[key] = value;
  }
  return example;
}

ordered_json ExampleToJson(const QAExample& example) {
  ordered_json record;
  record["id"] = example.id;
  record["question"] = example.question;
  record["relation"] = example.relation;
  ordered_json entity;
  entity["surface"] = example.entity.surface;
  if (example.entity.qid) entity["qid"] = *example.entity.qid;
  record["entity"] = std::move(entity);
  record["answers"] = example.answers;
  if (example.popularity) record["popularity"] = *example.popularity;
  if (example.provenance) {
    record["provenance"] = ordered_json::parse(example.provenance->dump());
  }
  for (const auto& [key, value] : example.extra.items()) {
    record[key] = ordered_json::parse(value.dump());
  }
  return record;
}

Prediction PredictionFromJson(const json& record) {
  if (!record.is_object()) throw ValidationError("<record>", "not an object");
  Prediction prediction;
  prediction.example_id = RequireString(record, "id");
  if (auto it = record.find("method"); it != record.end()) {
    if (!it->is_string()) throw ValidationError("method", "expected string");
    prediction.method = it->get<std::string>();
  }
  if (auto it = record.find("idk"); it != record.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ValidationError("idk", "expected boolean");
    prediction.idk = it->get<bool>();
  }
  if (auto it = record.find("answer"); it != record.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("answer", "expected string");
    prediction.answer = it->get<std::string>();
  }
  if (auto it = record.find("samples"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("samples", "expected array");
    for (const json& sample : *it) {
      if (!sample.is_string()) {
        throw ValidationError("samples", "samples must be strings");
      }
      prediction.samples.push_back(sample.get<std::string>());
    }
  }
  if (auto it = record.find("metadata"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("metadata", "expected object");
    prediction.metadata = *it;
  }
  Validate(prediction);
  return prediction;
}

ordered_json PredictionToJson(const Prediction& prediction) {
  ordered_json record;
  record["id"] = prediction.example_id;
  record["method"] = prediction.method;
  if (prediction.idk) {
    record["idk"] = true;
  } else {
    record["answer"] = prediction.answer.value_or("");
  }
  if (!prediction.samples.empty()) record["samples"] = prediction.samples;
  if (!prediction.metadata.empty()) {
    record["metadata"] = ordered_json::parse(prediction.metadata.dump());
  }
  return record;
}

LoadedDataset LoadDataset(const std::filesystem::path& path, bool strict) {
  std::ifstream in = OpenForRead(path);
  LoadedDataset loaded;
  std::unordered_set<std::string> ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json record;
      try {
        record = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(line_number, e.what());
      }
      QAExample example = ExampleFromJson(record);
      Validate(example);
      if (!ids.insert(example.id).second) {
        throw ValidationError("id", "duplicate id '" + example.id + "'");
      }
      loaded.examples.push_back(std::move(example));
    } catch (const ParseError& e) {
      if (strict) throw;
      loaded.errors.push_back({line_number, e.what()});
    } catch (const ValidationError& e) {
      if (strict) {
        throw e.AtLine(line_number);
      }
      loaded.errors.push_back({line_number, e.what()});
    }
  }
  return loaded;
}

void WriteDataset(std::span<const QAExample> examples,
                  const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  for (const auto& example : examples) {
    out << ExampleToJson(example).dump() << '\n';
  }
  CheckWritten(out, path);
}

std::vector<Prediction> LoadPredictions(const std::filesystem::path& path) {
  std::ifstream in = OpenForRead(path);
  std::vector<Prediction> predictions;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_number, e.what());
    }
    try {
      predictions.push_back(PredictionFromJson(record));
    } catch (const ValidationError& e) {
      throw e.AtLine(line_number);
    }
  }
  return predictions;
}

void WritePredictions(std::span<const Prediction> predictions,
                      const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  for (const auto& prediction : predictions) {
    out << PredictionToJson(prediction).dump() << '\n';
  }
  CheckWritten(out, path);
}

CorpusStats ComputeStats(std::span<const QAExample> examples) {
  CorpusStats stats;
  stats.num_examples = static_cast<int64_t>(examples.size());
  if (examples.empty()) return stats;
  std::set<std::string> relations;
  std::map<int, int64_t> counts;
  int64_t total_levels = 0;
  for (const auto& example : examples) {
    relations.insert(example.relation);
    ++counts[example.num_levels()];
    total_levels += example.num_levels();
  }
  stats.num_relations = static_cast<int64_t>(relations.size());
  const auto n = static_cast<double>(examples.size());
  stats.mean_answers_per_question = static_cast<double>(total_levels) / n;
  for (const auto& [levels, count] : counts) {
    stats.answer_count_histogram[levels] = static_cast<double>(count) / n;
  }
  return stats;
}

ordered_json StatsToJson(const CorpusStats& stats) {
  ordered_json out;
  out["num_examples"] = stats.num_examples;
  out["num_relations"] = stats.num_relations;
  out["mean_answers_per_question"] = stats.mean_answers_per_question;
  ordered_json histogram = ordered_json::object();
  for (const auto& [levels, fraction] : stats.answer_count_histogram) {
    histogram[std::to_string(levels)] = fraction;
  }
  out["answer_count_histogram"] = std::move(histogram);
  return out;
}

}  // namespace granola
