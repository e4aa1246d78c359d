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

#include "granola/enrichment.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "granola/errors.h"
#include "granola/prompts.h"
#include "granola/text_match.h"
#include "parallel.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<RelationInfo, 23> kRelations = {{
    {"P17", "Which country is [X] located in?", false},
    {"P19", "Where was [X] born?", true},
    {"P20", "Where did [X] die?", true},
    {"P26", "Who is [X] married to?", true},
    {"P30", "Which continent is [X] located?", false},
    {"P36", "What is the capital of [X]?", false},
    {"P40", "Who is [X]'s child?", true},
    {"P50", "Who is the author of [X]?", true},
    {"P69", "Where was [X] educated?", true},
    {"P106", "What kind of work does [X] do?", false},
    {"P112", "Who founded [X]?", true},
    {"P127", "Who owns [X]?", true},
    {"P131", "Where is [X] located?", true},
    {"P136", "What type of music does [X] play?", false},
    {"P159", "Where is the headquarter of [X]?", true},
    {"P170", "Who was [X] created by?", true},
    {"P175", "Who performed [X]?", true},
    {"P176", "Which company is [X] produced by?", true},
    {"P264", "What music label is [X] represented by?", true},
    {"P276", "Where is [X] located?", true},
    {"P407", "Which language was [X] written in?", false},
    {"P413", "What position does [X] play?", false},
    {"P495", "Which country was [X] created in?", false},
}};

constexpr std::string_view kSlot = "[X]";

std::string_view TrimView(std::string_view text) {
  const auto not_space = [](char c) {
    return c != ' ' && c != '\t' && c != '\r' && c != '\n';
  };
  while (!text.empty() && !not_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && !not_space(text.back())) text.remove_suffix(1);
  return text;
}

ordered_json EntityJson(const KgEntity& entity) {
  ordered_json out;
  out["qid"] = entity.qid;
  out["label"] = entity.label;
  out["description"] = entity.description;
  return out;
}

// Resolves a surface form to one entity with a non-empty description.
// Returns nullopt and fills `why` when that is impossible.
std::optional<KgEntity> LookUp(const std::string& surface, KnowledgeGraph& kg,
                               std::string* why) {
  const std::vector<KgEntity> candidates = kg.Search(surface);
  if (candidates.empty()) {
    *why = "no knowledge-graph match for '" + surface + "'";
    return std::nullopt;
  }
  KgEntity chosen = Disambiguate(candidates);
  if (chosen.description.empty()) {
    chosen.description = kg.Describe(chosen.qid).value_or("");
  }
  if (chosen.description.empty()) {
    *why = "no description for " + chosen.qid;
    return std::nullopt;
  }
  return chosen;
}

}  // namespace

std::vector<SourceRow> LoadSourceRows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<SourceRow> rows;
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
      SourceRow row;
      row.id = record.contains("id") ? record.at("id").get<std::string>()
                                     : "row-" + std::to_string(line_number);
      row.question = record.at("question").get<std::string>();
      row.relation = record.at("relation").get<std::string>();
      if (record.contains("answers")) {
        row.answers = record.at("answers").get<std::vector<std::string>>();
      } else {
        const json& answer = record.at("answer");
        if (answer.is_array()) {
          row.answers = answer.get<std::vector<std::string>>();
        } else {
          row.answers.push_back(answer.get<std::string>());
        }
      }
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw ParseError(line_number, e.what());
    }
  }
  return rows;
}

std::span<const RelationInfo> KnownRelations() { return kRelations; }

RelationTemplates DefaultAllowList() {
  RelationTemplates templates;
  for (const auto& info : kRelations) {
    if (info.included) {
      templates.emplace(info.relation, info.question_template);
    }
  }
  return templates;
}

RelationTemplates LoadRelationAllowList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open relation allow-list '" + path.string() +
                      "'");
  }
  RelationTemplates templates;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = TrimView(line);
    if (view.empty() || view.front() == '#') continue;
    const size_t tab = view.find('\t');
    const std::string relation(TrimView(view.substr(0, tab)));
    if (tab != std::string_view::npos) {
      const std::string_view tmpl = TrimView(view.substr(tab + 1));
      if (tmpl.find(kSlot) == std::string_view::npos) {
        throw ConfigError("template for " + relation + " has no [X] slot");
      }
      templates[relation] = std::string(tmpl);
      continue;
    }
    const auto it = std::find_if(
        kRelations.begin(), kRelations.end(),
        [&](const RelationInfo& info) { return info.relation == relation; });
    if (it == kRelations.end()) {
      throw ConfigError("relation " + relation +
                        " has no built-in template; give one after a tab");
    }
    templates[relation] = std::string(it->question_template);
  }
  return templates;
}

std::string ExtractEntity(std::string_view question,
                          std::string_view question_template) {
  const size_t slot = question_template.find(kSlot);
  if (slot == std::string_view::npos) {
    throw ConfigError("template '" + std::string(question_template) +
                      "' has no [X] slot");
  }
  const std::string_view prefix = question_template.substr(0, slot);
  const std::string_view suffix = question_template.substr(slot + kSlot.size());
  const bool fits = question.size() > prefix.size() + suffix.size() &&
                    question.substr(0, prefix.size()) == prefix &&
                    question.substr(question.size() - suffix.size()) == suffix;
  if (!fits) {
    throw DataError("question '" + std::string(question) +
                    "' does not match template '" +
                    std::string(question_template) + "'");
  }
  return std::string(question.substr(
      prefix.size(), question.size() - prefix.size() - suffix.size()));
}

KgEntity Disambiguate(std::span<const KgEntity> candidates) {
  if (candidates.empty()) {
    throw DataError("cannot disambiguate an empty candidate list");
  }
  return *std::min_element(candidates.begin(), candidates.end(),
                           [](const KgEntity& a, const KgEntity& b) {
                             return a.QidNumber() < b.QidNumber();
                           });
}

std::vector<std::string> DefaultTrivialBlacklist() {
  return {"person",  "people",   "human",        "place",      "location",
          "country", "city",     "company",      "organization",
          "university", "writer", "author",      "entity"};
}

bool IsTrivialAnswer(std::string_view answer,
                     std::span<const std::string> blacklist) {
  const NormalizedText normalized = Normalize(answer);
  return std::any_of(blacklist.begin(), blacklist.end(),
                     [&](const std::string& entry) {
                       return Normalize(entry) == normalized;
                     });
}

ParsedLevels ParseLevels(std::string_view llm_output,
                         std::span<const std::string> blacklist) {
  std::vector<std::pair<long, std::string>> numbered;
  std::istringstream lines{std::string(llm_output)};
  std::string line;
  while (std::getline(lines, line)) {
    const std::string_view view = TrimView(line);
    size_t digits = 0;
    while (digits < view.size() && view[digits] >= '0' && view[digits] <= '9') {
      ++digits;
    }
    if (digits == 0 || digits > 6 || view.substr(digits, 2) != "::") continue;
    const long index = std::stol(std::string(view.substr(0, digits)));
    numbered.emplace_back(index, std::string(TrimView(view.substr(digits + 2))));
  }
  if (numbered.empty()) throw LevelParseError("no '<n>:: answer' lines");
  for (size_t i = 0; i < numbered.size(); ++i) {
    const long expected = static_cast<long>(i) + 1;
    if (numbered[i].first != expected) {
      throw LevelParseError("expected index " + std::to_string(expected) +
                            ", found " + std::to_string(numbered[i].first));
    }
  }
  ParsedLevels parsed;
  for (size_t i = 0; i < numbered.size(); ++i) {
    std::string& text = numbered[i].second;
    if (i > 0 && (Normalize(text).empty() || IsTrivialAnswer(text, blacklist))) {
      ++parsed.trivial_dropped;
      continue;
    }
    parsed.levels.push_back(std::move(text));
  }
  return parsed;
}

void EnrichmentConfig::Validate() const {
  if (judge_samples < 1) throw ConfigError("judge samples must be >= 1");
  if (!(consistency_threshold >= 0.0 && consistency_threshold <= 1.0)) {
    throw ConfigError("consistency threshold must lie in [0, 1]");
  }
  if (generation_max_tokens < 1) {
    throw ConfigError("generation max tokens must be >= 1");
  }
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
}

ordered_json ToJson(const EnrichmentConfig& config) {
  ordered_json out;
  ordered_json relations = ordered_json::object();
  for (const auto& [relation, tmpl] : config.relations) relations[relation] = tmpl;
  out["relations"] = std::move(relations);
  out["judge_samples"] = config.judge_samples;
  out["judge_temperature"] = config.judge_temperature;
  out["consistency_threshold"] = config.consistency_threshold;
  out["trivial_blacklist"] = config.trivial_blacklist;
  out["generation_max_tokens"] = config.generation_max_tokens;
  out["parallelism"] = config.parallelism;
  return out;
}

EnrichmentConfig EnrichmentConfigFromJson(const json& in) {
  EnrichmentConfig config;
  try {
    if (in.contains("relations")) {
      config.relations.clear();
      for (const auto& [relation, tmpl] : in.at("relations").items()) {
        config.relations.emplace(relation, tmpl.get<std::string>());
      }
    }
    config.judge_samples = in.value("judge_samples", config.judge_samples);
    config.judge_temperature =
        in.value("judge_temperature", config.judge_temperature);
    config.consistency_threshold =
        in.value("consistency_threshold", config.consistency_threshold);
    if (in.contains("trivial_blacklist")) {
      config.trivial_blacklist =
          in.at("trivial_blacklist").get<std::vector<std::string>>();
    }
    config.generation_max_tokens =
        in.value("generation_max_tokens", config.generation_max_tokens);
    config.parallelism = in.value("parallelism", config.parallelism);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad enrichment config: ") + e.what());
  }
  config.Validate();
  return config;
}

std::vector<std::string> GenerateLevels(const SourceRow& row,
                                        std::string_view question_description,
                                        std::string_view answer_description,
                                        const LlmGateway& llm,
                                        const EnrichmentConfig& config) {
  if (row.answers.empty()) throw DataError("row " + row.id + " has no answer");
  GenerationRequest request;
  request.prompt =
      RenderPrompt(PromptKind::kEnrichment,
                   {{"question", row.question},
                    {"answer", row.answers.front()},
                    {"question_description", std::string(question_description)},
                    {"answer_description", std::string(answer_description)}});
  request.temperature = 0.0;
  request.max_tokens = config.generation_max_tokens;
  const std::string output = llm.Generate(request).front();
  ParsedLevels parsed = ParseLevels(output, config.trivial_blacklist);
  // Index 1 stands for the original answer; keep the dataset's spelling.
  parsed.levels.front() = row.answers.front();
  return parsed.levels;
}

Judgment ParseJudgment(std::string_view text) {
  const NormalizedText normalized = Normalize(text);
  if (!normalized.empty() && normalized.tokens.front() == "yes") {
    return Judgment::kYes;
  }
  return Judgment::kNo;
}

double ConsistencyScore(std::string_view question, std::string_view entity,
                        std::string_view description, const LlmGateway& llm,
                        int samples, double temperature) {
  if (samples < 1) throw ConfigError("judge samples must be >= 1");
  GenerationRequest request;
  request.prompt = RenderPrompt(PromptKind::kConsistencyJudge,
                                {{"question", std::string(question)},
                                 {"entity", std::string(entity)},
                                 {"description", std::string(description)}});
  request.temperature = temperature;
  request.num_samples = samples;
  request.max_tokens = 8;
  request.stop_sequences = {"\n"};
  const auto judgments = llm.Generate(request);
  const auto no = std::count_if(
      judgments.begin(), judgments.end(),
      [](const std::string& j) { return ParseJudgment(j) == Judgment::kNo; });
  return static_cast<double>(no) / static_cast<double>(samples);
}

std::string_view StatusName(EnrichmentStatus status) {
  switch (status) {
    case EnrichmentStatus::kOk:
      return "ok";
    case EnrichmentStatus::kFilteredInconsistent:
      return "filtered_inconsistent";
    case EnrichmentStatus::kParseFailed:
      return "parse_failed";
    case EnrichmentStatus::kMissingDescription:
      return "missing_description";
    case EnrichmentStatus::kCleanedOut:
      return "cleaned_out";
  }
  return "unknown";
}

EnrichmentRecord EnrichRow(const SourceRow& row,
                           const std::string& question_template,
                           KnowledgeGraph& kg, const LlmGateway& llm,
                           const EnrichmentConfig& config) {
  EnrichmentRecord record;
  record.source = row;
  record.question_template = question_template;
  if (row.answers.size() != 1) {
    record.status = EnrichmentStatus::kCleanedOut;
    record.detail = "ground truth is not unique";
    return record;
  }
  const std::string& answer = row.answers.front();

  try {
    record.question_surface = ExtractEntity(row.question, question_template);
  } catch (const DataError& e) {
    record.status = EnrichmentStatus::kMissingDescription;
    record.detail = e.what();
    return record;
  }

  try {
    std::string why;
    record.question_entity = LookUp(record.question_surface, kg, &why);
    if (record.question_entity) {
      record.answer_entity = LookUp(answer, kg, &why);
    }
    if (!record.question_entity || !record.answer_entity) {
      record.status = EnrichmentStatus::kMissingDescription;
      record.detail = why;
      return record;
    }
  } catch (const ProviderError& e) {
    record.status = EnrichmentStatus::kMissingDescription;
    record.detail = std::string("knowledge graph failure: ") + e.what();
    return record;
  }

  try {
    const double question_score = ConsistencyScore(
        row.question, record.question_surface,
        record.question_entity->description, llm, config.judge_samples,
        config.judge_temperature);
    const double answer_score = ConsistencyScore(
        row.question, answer, record.answer_entity->description, llm,
        config.judge_samples, config.judge_temperature);
    record.consistency_score = std::max(question_score, answer_score);
    if (*record.consistency_score > config.consistency_threshold) {
      record.status = EnrichmentStatus::kFilteredInconsistent;
      return record;
    }
    record.generated_levels =
        GenerateLevels(row, record.question_entity->description,
                       record.answer_entity->description, llm, config);
    record.status = EnrichmentStatus::kOk;
  } catch (const LevelParseError& e) {
    record.status = EnrichmentStatus::kParseFailed;
    record.detail = e.what();
  } catch (const ProviderError& e) {
    record.status = EnrichmentStatus::kParseFailed;
    record.detail = std::string("provider failure: ") + e.what();
  }
  return record;
}

ordered_json ToJson(const CleanReport& report) {
  ordered_json out;
  out["input_rows"] = report.input_rows;
  out["output_rows"] = report.output_rows;
  ordered_json removed = ordered_json::object();
  for (const auto& [reason, count] : report.removed_rows) removed[reason] = count;
  out["removed_rows"] = std::move(removed);
  out["degraded_rows"] = report.degraded_rows;
  out["duplicate_answers_removed"] = report.duplicate_answers_removed;
  out["trivial_answers_removed"] = report.trivial_answers_removed;
  return out;
}

CleanResult Clean(std::span<const EnrichmentRecord> records,
                  std::span<const std::string> blacklist) {
  CleanResult result;
  CleanReport& report = result.report;
  report.input_rows = static_cast<int64_t>(records.size());
  for (const auto& record : records) {
    if (record.source.answers.size() != 1) {
      ++report.removed_rows["non_unique_ground_truth"];
      continue;
    }
    if (record.status != EnrichmentStatus::kOk &&
        record.status != EnrichmentStatus::kMissingDescription) {
      ++report.removed_rows[std::string(StatusName(record.status))];
      continue;
    }
    const std::string& original = record.source.answers.front();
    if (Normalize(original).empty()) {
      ++report.removed_rows["missing_answers"];
      continue;
    }

    std::vector<std::string> levels = {original};
    if (record.status == EnrichmentStatus::kOk) {
      for (size_t i = 1; i < record.generated_levels.size(); ++i) {
        levels.push_back(record.generated_levels[i]);
      }
    } else {
      ++report.degraded_rows;
    }

    QAExample example;
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < levels.size(); ++i) {
      const std::string key = Normalize(levels[i]).Joined();
      if (i > 0 && (key.empty() || IsTrivialAnswer(levels[i], blacklist))) {
        ++report.trivial_answers_removed;
        continue;
      }
      if (!seen.insert(key).second) {
        ++report.duplicate_answers_removed;
        continue;
      }
      example.answers.push_back({levels[i]});
    }

    example.id = record.source.id;
    example.question = record.source.question;
    example.relation = record.source.relation;
    example.entity.surface = record.question_surface;
    if (record.question_entity) example.entity.qid = record.question_entity->qid;

    json provenance = json::object();
    provenance["status"] = StatusName(record.status);
    provenance["relation_template"] = record.question_template;
    if (record.question_entity) {
      provenance["question_entity"] =
          json::parse(EntityJson(*record.question_entity).dump());
    }
    if (record.answer_entity) {
      provenance["answer_entity"] =
          json::parse(EntityJson(*record.answer_entity).dump());
    }
    if (record.consistency_score) {
      provenance["consistency_score"] = *record.consistency_score;
    }
    if (!record.detail.empty()) provenance["detail"] = record.detail;
    example.provenance = std::move(provenance);

    result.examples.push_back(std::move(example));
  }
  report.output_rows = static_cast<int64_t>(result.examples.size());
  return result;
}

EnrichmentResult EnrichRows(std::span<const SourceRow> rows,
                            KnowledgeGraph& kg, const LlmGateway& llm,
                            const EnrichmentConfig& config) {
  config.Validate();
  std::vector<const SourceRow*> kept;
  std::vector<const std::string*> templates;
  int64_t excluded = 0;
  for (const auto& row : rows) {
    auto it = config.relations.find(row.relation);
    if (it == config.relations.end()) {
      ++excluded;
      continue;
    }
    kept.push_back(&row);
    templates.push_back(&it->second);
  }

  EnrichmentResult result;
  result.records.resize(kept.size());
  internal::ParallelFor(kept.size(), config.parallelism, [&](size_t i) {
    result.records[i] = EnrichRow(*kept[i], *templates[i], kg, llm, config);
  });

  result.cleaned = Clean(result.records, config.trivial_blacklist);
  result.cleaned.report.input_rows += excluded;
  if (excluded > 0) {
    result.cleaned.report.removed_rows["relation_excluded"] = excluded;
  }
  return result;
}

CleanReport EnrichDataset(const std::filesystem::path& input,
                          const std::filesystem::path& output,
                          KnowledgeGraph& kg, const LlmGateway& llm,
                          const EnrichmentConfig& config) {
  const std::vector<SourceRow> rows = LoadSourceRows(input);
  EnrichmentResult result = EnrichRows(rows, kg, llm, config);
  for (const auto& example : result.cleaned.examples) Validate(example);
  WriteDataset(result.cleaned.examples, output);
  return result.cleaned.report;
}

}  // namespace granola
