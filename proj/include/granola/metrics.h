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

// Multi-granularity accuracy and informativeness.
//
// A prediction is matched against the answer levels in order; the first
// level holding an alias with token F1 >= tau is the match level. GRANOLA
// accuracy is whether any level matched; informativeness decays as
// exp(-lambda * (level - 1)). Standard accuracy only consults level 1.

#ifndef GRANOLA_METRICS_H_
#define GRANOLA_METRICS_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/dataset.h"

namespace granola {

struct EvalConfig {
  double tau = 0.8;
  double lambda = std::log(2.0);
  // Compared against the normalized prediction text.
  std::vector<std::string> idk_markers = {"idk", "i dont know"};

  // Throws ConfigError.
  void Validate() const;
};

nlohmann::ordered_json ToJson(const EvalConfig& config);
EvalConfig EvalConfigFromJson(const nlohmann::json& json);

struct MatchResult {
  // 1-based; absent when nothing matched.
  std::optional<int> matched_level;
  std::optional<std::string> matched_answer;
  double score = 0.0;
};

MatchResult FindMatchIndex(std::string_view prediction,
                           const QAExample& example, double tau);

inline int GranolaAccuracy(const MatchResult& match) {
  return match.matched_level.has_value() ? 1 : 0;
}

double Informativeness(const MatchResult& match, double lambda);

int StandardAccuracy(std::string_view prediction, const QAExample& example,
                     double tau);
// Abstentions score 0.
int StandardAccuracy(const Prediction& prediction, const QAExample& example,
                     const EvalConfig& config);

// Exact match of the normalized text against any normalized marker.
bool IsIdkText(std::string_view text, std::span<const std::string> markers);
bool IsIdk(const Prediction& prediction, const EvalConfig& config);

struct HistogramBin {
  std::string label;  // "1".."L", "idk" or "error"
  int64_t count = 0;
  double fraction = 0.0;
};

struct Stratum;

struct MetricsReport {
  int64_t n_total = 0;
  int64_t n_idk = 0;
  // Zero means selective accuracy is undefined and reported as 0.
  int64_t n_nonidk = 0;
  double accuracy_standard = 0.0;
  double accuracy_granola = 0.0;
  double selective_accuracy_granola = 0.0;
  double mean_informativeness = 0.0;
  double knowledge_gap = 0.0;
  std::vector<HistogramBin> match_level_histogram;
  std::vector<Stratum> strata;

  // Fraction for `label`, zero if the bin is absent.
  double HistogramFraction(std::string_view label) const;
};

struct Stratum {
  std::string key;
  // Popularity range covered, for popularity strata.
  std::optional<int64_t> popularity_min;
  std::optional<int64_t> popularity_max;
  MetricsReport report;
};

// Requires every prediction to reference a known example and at most one
// prediction per example; throws DataError otherwise. The result does not
// depend on the order of `predictions`.
MetricsReport EvaluateCorpus(std::span<const Prediction> predictions,
                             std::span<const QAExample> examples,
                             const EvalConfig& config);

enum class StratifyKey { kPopularity, kRelation };

std::optional<StratifyKey> ParseStratifyKey(std::string_view name);
std::string_view StratifyKeyName(StratifyKey key);

// Full-corpus report whose `strata` hold one nested report per stratum.
// Popularity strata are equal-count quantile bins in ascending order; equal
// popularity values always share a bin, so some bins may be merged away.
// Examples without popularity go to a trailing "unknown" stratum. Relation
// strata are ordered by relation string.
MetricsReport Stratify(std::span<const Prediction> predictions,
                       std::span<const QAExample> examples,
                       const EvalConfig& config, StratifyKey key, int bins);

nlohmann::ordered_json ToJson(const MetricsReport& report);
MetricsReport MetricsReportFromJson(const nlohmann::json& json);

// "label,count,fraction" rows.
std::string HistogramCsv(const MetricsReport& report);
// One row per stratum with its headline metrics.
std::string StrataCsv(const MetricsReport& report);

}  // namespace granola

#endif  // GRANOLA_METRICS_H_
