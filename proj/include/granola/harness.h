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

// End-to-end runs (decode -> evaluate -> report), the standard-vs-GRANOLA
// meta-evaluation table, and CSV series for plotting.

#ifndef GRANOLA_HARNESS_H_
#define GRANOLA_HARNESS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/dataset.h"
#include "granola/drag.h"
#include "granola/llm.h"
#include "granola/metrics.h"

namespace granola {

struct StrataSpec {
  bool popularity = true;
  int popularity_bins = 10;
  bool relation = true;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::vector<DecoderConfig> methods;
  EvalConfig eval;
  StrataSpec strata;
  std::filesystem::path output_dir;
  uint64_t seed = 0;
  ModelConfig model;

  void Validate() const;
};

// Relative paths are resolved against `base_dir`.
RunConfig RunConfigFromJson(const nlohmann::json& json,
                            const std::filesystem::path& base_dir);
nlohmann::ordered_json ToJson(const RunConfig& config);

struct MethodArtifacts {
  std::string method;
  std::filesystem::path predictions;
  std::filesystem::path report;
  std::filesystem::path histogram_csv;
  std::vector<std::filesystem::path> strata_csvs;
  MetricsReport metrics;
};

struct RunArtifacts {
  std::vector<MethodArtifacts> methods;
  std::filesystem::path popularity_csv;
  std::filesystem::path scatter_csv;
};

// Writes, per method, "<label>.predictions.jsonl", "<label>.report.json",
// "<label>.histogram.csv" and "<label>.strata_<key>.csv", plus run-level
// "accuracy_vs_popularity.csv" and "standard_vs_granola.csv". The label is
// the method name, suffixed with "-<aggregator>" when a run has several
// DRAG entries. If `llm` is null a gateway is built from config.model with
// config.seed. Decoding errors flush the predictions finished so far before
// propagating.
RunArtifacts Run(const RunConfig& config,
                 std::shared_ptr<const LlmGateway> llm = nullptr);

// (prediction, level-1 gold answer) -> similarity in [0, 1]. May throw; a
// throwing or nullopt result excludes the example from the cell mean only.
using SemanticScorer =
    std::function<std::optional<double>(std::string_view, std::string_view)>;

struct MetaEvalCell {
  bool standard_correct = false;
  bool granola_correct = false;
  int64_t count = 0;
  double fraction = 0.0;
  // Absent when the cell is empty, no scorer is given, or every score
  // in the cell failed.
  std::optional<double> mean_score;
  int64_t scored = 0;
};

struct MetaEvalTable {
  // Rows in order (std, granola): (1,1), (0,1), (1,0), (0,0).
  std::array<MetaEvalCell, 4> cells;
  int64_t n_total = 0;
  int64_t scorer_failures = 0;

  const MetaEvalCell& Cell(bool standard_correct, bool granola_correct) const;
};

// Abstentions are scored against the gold answer with the text "IDK" and
// land in the (0,0) cell.
MetaEvalTable MetaEval(std::span<const Prediction> predictions,
                       std::span<const QAExample> examples,
                       const SemanticScorer& scorer, double tau);

nlohmann::ordered_json ToJson(const MetaEvalTable& table);
std::string MetaEvalCsv(const MetaEvalTable& table);

// Runs `command` once: its stdin receives JSONL {"prediction", "reference"}
// and it must print one score (or an empty line) per input line.
SemanticScorer MakeCommandScorer(
    const std::string& command, std::span<const Prediction> predictions,
    std::span<const QAExample> examples);

struct NamedReport {
  std::string method;
  MetricsReport report;
};

// True if `report` has at least one popularity-binned stratum.
bool HasPopularityBins(const MetricsReport& report);

// method,stratum,popularity_min,popularity_max,n,accuracy_standard,
// accuracy_granola. Throws DataError if a report has no popularity strata.
std::string AccuracyVsPopularityCsv(std::span<const NamedReport> reports);

// method,stratum,accuracy_standard,accuracy_granola: one "all" row per
// method plus one per relation stratum.
std::string StandardVsGranolaCsv(std::span<const NamedReport> reports);

// Reads a report written by Run or the eval command. A top-level "metrics"
// object is unwrapped; popularity/relation strata may be nested under
// "strata_by".
MetricsReport LoadReport(const std::filesystem::path& path,
                         std::string_view strata_key = "popularity");

}  // namespace granola

#endif  // GRANOLA_HARNESS_H_
