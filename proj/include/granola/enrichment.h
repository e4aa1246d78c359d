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

// Turns a single-granularity templated QA dataset into multi-granularity
// examples.
//
// Per row: relation filter -> entity extraction from the question template
// -> KG search and disambiguation for the question and answer entities ->
// description consistency judge -> LLM generation of coarser answers ->
// cleaning. Row-level failures never abort the pipeline; they are recorded
// in the row's status and in the cleaning report.

#ifndef GRANOLA_ENRICHMENT_H_
#define GRANOLA_ENRICHMENT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/dataset.h"
#include "granola/errors.h"
#include "granola/kg.h"
#include "granola/llm.h"

namespace granola {

// One row of the source dataset.
struct SourceRow {
  std::string id;
  std::string question;
  std::string relation;
  std::vector<std::string> answers;
};

// JSONL with question, relation and either "answers" (array) or "answer".
// Missing ids become "row-<line>".
std::vector<SourceRow> LoadSourceRows(const std::filesystem::path& path);

struct RelationInfo {
  std::string_view relation;
  std::string_view question_template;
  // Relations whose answers are already coarse are excluded by default.
  bool included;
};

// Templated relations of the source entity-question dataset.
std::span<const RelationInfo> KnownRelations();

// relation -> question template with an "[X]" slot.
using RelationTemplates = std::map<std::string, std::string, std::less<>>;

RelationTemplates DefaultAllowList();

// One relation per line, optionally followed by a tab and a template that
// overrides the built-in one. Blank lines and '#' comments are ignored.
RelationTemplates LoadRelationAllowList(const std::filesystem::path& path);

// Returns the text filling "[X]". Throws DataError if `question` does not
// fit `question_template`.
std::string ExtractEntity(std::string_view question,
                          std::string_view question_template);

// Candidate with the numerically smallest qid. Throws DataError when
// `candidates` is empty.
KgEntity Disambiguate(std::span<const KgEntity> candidates);

std::vector<std::string> DefaultTrivialBlacklist();

// Normalized comparison against each blacklist entry.
bool IsTrivialAnswer(std::string_view answer,
                     std::span<const std::string> blacklist);

// Thrown by ParseLevels when the output is unusable.
class LevelParseError : public DataError {
 public:
  explicit LevelParseError(const std::string& message) : DataError(message) {}
};

struct ParsedLevels {
  std::vector<std::string> levels;
  int trivial_dropped = 0;
};

// Parses "<n>:: <answer>" lines. Indices must start at 1 and be consecutive;
// that check runs on the raw output, before trivial answers (other than
// index 1) are dropped. Lines in any other shape are ignored.
ParsedLevels ParseLevels(std::string_view llm_output,
                         std::span<const std::string> blacklist);

struct EnrichmentConfig {
  RelationTemplates relations = DefaultAllowList();
  int judge_samples = 5;
  double judge_temperature = 1.0;
  // Rows whose "No" fraction exceeds this are dropped.
  double consistency_threshold = 0.5;
  std::vector<std::string> trivial_blacklist = DefaultTrivialBlacklist();
  int generation_max_tokens = 256;
  int parallelism = 1;

  void Validate() const;
};

nlohmann::ordered_json ToJson(const EnrichmentConfig& config);
EnrichmentConfig EnrichmentConfigFromJson(const nlohmann::json& json);

// Level 1 of the result is always the row's original answer.
std::vector<std::string> GenerateLevels(const SourceRow& row,
                                        std::string_view question_description,
                                        std::string_view answer_description,
                                        const LlmGateway& llm,
                                        const EnrichmentConfig& config);

enum class Judgment { kYes, kNo };

// Unparseable output counts as kNo.
Judgment ParseJudgment(std::string_view text);

// Fraction of "No" judgments over `samples` draws of the consistency judge.
double ConsistencyScore(std::string_view question, std::string_view entity,
                        std::string_view description, const LlmGateway& llm,
                        int samples, double temperature = 1.0);

enum class EnrichmentStatus {
  kOk,
  kFilteredInconsistent,
  kParseFailed,
  kMissingDescription,
  kCleanedOut,
};

std::string_view StatusName(EnrichmentStatus status);

struct EnrichmentRecord {
  SourceRow source;
  std::string question_template;
  std::string question_surface;
  std::optional<KgEntity> question_entity;
  std::optional<KgEntity> answer_entity;
  std::vector<std::string> generated_levels;
  std::optional<double> consistency_score;
  EnrichmentStatus status = EnrichmentStatus::kCleanedOut;
  std::string detail;
};

EnrichmentRecord EnrichRow(const SourceRow& row,
                           const std::string& question_template,
                           KnowledgeGraph& kg, const LlmGateway& llm,
                           const EnrichmentConfig& config);

struct CleanReport {
  int64_t input_rows = 0;
  int64_t output_rows = 0;
  // reason -> rows removed; sums to input_rows - output_rows.
  std::map<std::string, int64_t> removed_rows;
  int64_t degraded_rows = 0;
  int64_t duplicate_answers_removed = 0;
  int64_t trivial_answers_removed = 0;
};

nlohmann::ordered_json ToJson(const CleanReport& report);

struct CleanResult {
  std::vector<QAExample> examples;
  CleanReport report;
};

// Drops rows that are not usable, keeps missing-description rows as
// single-level examples, removes trivial and duplicate answers (keeping the
// finest occurrence) and builds dataset examples with provenance.
CleanResult Clean(std::span<const EnrichmentRecord> records,
                  std::span<const std::string> blacklist);

struct EnrichmentResult {
  std::vector<EnrichmentRecord> records;
  CleanResult cleaned;
};

EnrichmentResult EnrichRows(std::span<const SourceRow> rows,
                            KnowledgeGraph& kg, const LlmGateway& llm,
                            const EnrichmentConfig& config);

// Reads `input`, enriches it and writes dataset JSONL to `output`.
CleanReport EnrichDataset(const std::filesystem::path& input,
                          const std::filesystem::path& output,
                          KnowledgeGraph& kg, const LlmGateway& llm,
                          const EnrichmentConfig& config);

}  // namespace granola

#endif  // GRANOLA_ENRICHMENT_H_
