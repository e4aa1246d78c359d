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

#include "granola/metrics.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "granola/errors.h"
#include "granola/text_match.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

struct Scored {
  const std::string* example_id;
  int standard = 0;
  int granola = 0;
  double informativeness = 0.0;
  bool idk = false;
  std::optional<int> level;
};

using ExampleIndex = std::unordered_map<std::string_view, const QAExample*>;

ExampleIndex IndexExamples(std::span<const QAExample> examples) {
  ExampleIndex index;
  index.reserve(examples.size());
  for (const auto& example : examples) {
    if (!index.emplace(example.id, &example).second) {
      throw DataError("duplicate example id '" + example.id + "'");
    }
  }
  return index;
}

const QAExample& Resolve(const ExampleIndex& index, const Prediction& p) {
  auto it = index.find(p.example_id);
  if (it == index.end()) {
    throw DataError("prediction references unknown example id '" +
                    p.example_id + "'");
  }
  return *it->second;
}

MetricsReport Aggregate(std::vector<Scored> scored, int max_levels) {
  // Sum in id order so the floating-point result is order independent.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return *a.example_id < *b.example_id;
  });
  MetricsReport report;
  report.n_total = static_cast<int64_t>(scored.size());
  std::vector<int64_t> level_counts(static_cast<size_t>(max_levels), 0);
  int64_t idk = 0;
  int64_t unmatched = 0;
  int64_t standard_sum = 0;
  int64_t granola_sum = 0;
  int64_t granola_nonidk = 0;
  double info_sum = 0.0;
  for (const auto& s : scored) {
    standard_sum += s.standard;
    granola_sum += s.granola;
    info_sum += s.informativeness;
    if (s.idk) {
      ++idk;
    } else {
      granola_nonidk += s.granola;
      if (s.level) {
        ++level_counts[static_cast<size_t>(*s.level - 1)];
      } else {
        ++unmatched;
      }
    }
  }
  report.n_idk = idk;
  report.n_nonidk = report.n_total - idk;
  if (report.n_total > 0) {
    const auto n = static_cast<double>(report.n_total);
    report.accuracy_standard = static_cast<double>(standard_sum) / n;
    report.accuracy_granola = static_cast<double>(granola_sum) / n;
    report.mean_informativeness = info_sum / n;
    report.knowledge_gap = report.accuracy_granola - report.accuracy_standard;
    for (int level = 1; level <= max_levels; ++level) {
      const int64_t count = level_counts[static_cast<size_t>(level - 1)];
      report.match_level_histogram.push_back(
          {std::to_string(level), count, static_cast<double>(count) / n});
    }
    report.match_level_histogram.push_back(
        {"idk", idk, static_cast<double>(idk) / n});
    report.match_level_histogram.push_back(
        {"error", unmatched, static_cast<double>(unmatched) / n});
  }
  if (report.n_nonidk > 0) {
    report.selective_accuracy_granola =
        static_cast<double>(granola_nonidk) /
        static_cast<double>(report.n_nonidk);
  }
  return report;
}

std::vector<Scored> ScoreAll(std::span<const Prediction> predictions,
                             const ExampleIndex& index,
                             const EvalConfig& config, int* max_levels) {
  std::unordered_set<std::string_view> seen;
  std::vector<Scored> scored;
  scored.reserve(predictions.size());
  *max_levels = 0;
  for (const auto& prediction : predictions) {
    const QAExample& example = Resolve(index, prediction);
    if (!seen.insert(prediction.example_id).second) {
      throw DataError("more than one prediction for example id '" +
                      prediction.example_id + "'");
    }
    *max_levels = std::max(*max_levels, example.num_levels());
    Scored s;
    s.example_id = &example.id;
    if (IsIdk(prediction, config)) {
      s.idk = true;
    } else {
      const std::string& answer = *prediction.answer;
      const MatchResult match = FindMatchIndex(answer, example, config.tau);
      s.level = match.matched_level;
      s.granola = GranolaAccuracy(match);
      s.informativeness = Informativeness(match, config.lambda);
      s.standard = StandardAccuracy(answer, example, config.tau);
    }
    scored.push_back(s);
  }
  return scored;
}

}  // namespace

void EvalConfig::Validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("tau must lie in (0, 1], got " + FormatDouble(tau));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a finite value >= 0, got " +
                      FormatDouble(lambda));
  }
  if (idk_markers.empty()) throw ConfigError("idk_markers must be non-empty");
}

ordered_json ToJson(const EvalConfig& config) {
  ordered_json out;
  out["tau"] = config.tau;
  out["lambda"] = config.lambda;
  out["idk_markers"] = config.idk_markers;
  return out;
}

EvalConfig EvalConfigFromJson(const json& in) {
  EvalConfig config;
  try {
    if (in.contains("tau")) config.tau = in.at("tau").get<double>();
    if (in.contains("lambda")) config.lambda = in.at("lambda").get<double>();
    if (in.contains("idk_markers")) {
      config.idk_markers = in.at("idk_markers").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad eval config: ") + e.what());
  }
  config.Validate();
  return config;
}

MatchResult FindMatchIndex(std::string_view prediction,
                           const QAExample& example, double tau) {
  const NormalizedText normalized = Normalize(prediction);
  for (size_t level = 0; level < example.answers.size(); ++level) {
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& alias : example.answers[level]) {
      const double score = TokenF1(normalized, Normalize(alias));
      if (best == nullptr || score > best_score) {
        best = &alias;
        best_score = score;
      }
    }
    if (best != nullptr && best_score >= tau) {
      return {static_cast<int>(level) + 1, *best, best_score};
    }
  }
  return {};
}

double Informativeness(const MatchResult& match, double lambda) {
  if (!match.matched_level) return 0.0;
  return std::exp(-lambda * static_cast<double>(*match.matched_level - 1));
}

int StandardAccuracy(std::string_view prediction, const QAExample& example,
                     double tau) {
  if (example.answers.empty()) return 0;
  const NormalizedText normalized = Normalize(prediction);
  for (const auto& alias : example.answers.front()) {
    if (TokenF1(normalized, Normalize(alias)) >= tau) return 1;
  }
  return 0;
}

int StandardAccuracy(const Prediction& prediction, const QAExample& example,
                     const EvalConfig& config) {
  if (IsIdk(prediction, config)) return 0;
  return StandardAccuracy(*prediction.answer, example, config.tau);
}

bool IsIdkText(std::string_view text, std::span<const std::string> markers) {
  const std::string normalized = Normalize(text).Joined();
  return std::any_of(markers.begin(), markers.end(), [&](const auto& marker) {
    return Normalize(marker).Joined() == normalized;
  });
}

bool IsIdk(const Prediction& prediction, const EvalConfig& config) {
  if (prediction.idk || !prediction.answer) return true;
  return IsIdkText(*prediction.answer, config.idk_markers);
}

double MetricsReport::HistogramFraction(std::string_view label) const {
  for (const auto& bin : match_level_histogram) {
    if (bin.label == label) return bin.fraction;
  }
  return 0.0;
}

MetricsReport EvaluateCorpus(std::span<const Prediction> predictions,
                             std::span<const QAExample> examples,
                             const EvalConfig& config) {
  config.Validate();
  const ExampleIndex index = IndexExamples(examples);
  int max_levels = 0;
  auto scored = ScoreAll(predictions, index, config, &max_levels);
  return Aggregate(std::move(scored), max_levels);
}

std::optional<StratifyKey> ParseStratifyKey(std::string_view name) {
  if (name == "popularity") return StratifyKey::kPopularity;
  if (name == "relation") return StratifyKey::kRelation;
  return std::nullopt;
}

std::string_view StratifyKeyName(StratifyKey key) {
  return key == StratifyKey::kPopularity ? "popularity" : "relation";
}

MetricsReport Stratify(std::span<const Prediction> predictions,
                       std::span<const QAExample> examples,
                       const EvalConfig& config, StratifyKey key, int bins) {
  if (key == StratifyKey::kPopularity && bins < 1) {
    throw ConfigError("number of popularity bins must be >= 1");
  }
  MetricsReport report = EvaluateCorpus(predictions, examples, config);
  const ExampleIndex index = IndexExamples(examples);

  auto evaluate_group = [&](const std::vector<const Prediction*>& group) {
    std::vector<Prediction> subset;
    subset.reserve(group.size());
    for (const Prediction* p : group) subset.push_back(*p);
    return EvaluateCorpus(subset, examples, config);
  };

  if (key == StratifyKey::kRelation) {
    std::map<std::string, std::vector<const Prediction*>> groups;
    for (const auto& p : predictions) {
      groups[Resolve(index, p).relation].push_back(&p);
    }
    for (const auto& [relation, group] : groups) {
      report.strata.push_back({relation, std::nullopt, std::nullopt,
                               evaluate_group(group)});
    }
    return report;
  }

  struct Ranked {
    int64_t popularity;
    const Prediction* prediction;
  };
  std::vector<Ranked> ranked;
  std::vector<const Prediction*> unknown;
  for (const auto& p : predictions) {
    const QAExample& example = Resolve(index, p);
    if (example.popularity) {
      ranked.push_back({*example.popularity, &p});
    } else {
      unknown.push_back(&p);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.popularity != b.popularity) return a.popularity < b.popularity;
    return a.prediction->example_id < b.prediction->example_id;
  });

  // Bin by the rank of the first member of each tie group, so equal values
  // never straddle a boundary.
  const auto n = static_cast<int64_t>(ranked.size());
  std::map<int64_t, std::vector<const Ranked*>> bins_by_index;
  int64_t tie_start = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (i > 0 && ranked[i].popularity != ranked[i - 1].popularity) {
      tie_start = i;
    }
    const int64_t bin = tie_start * bins / n;
    bins_by_index[bin].push_back(&ranked[i]);
  }
  for (const auto& [bin, members] : bins_by_index) {
    std::vector<const Prediction*> group;
    for (const Ranked* r : members) group.push_back(r->prediction);
    report.strata.push_back({"bin_" + std::to_string(bin + 1),
                             members.front()->popularity,
                             members.back()->popularity,
                             evaluate_group(group)});
  }
  if (!unknown.empty()) {
    report.strata.push_back(
        {"unknown", std::nullopt, std::nullopt, evaluate_group(unknown)});
  }
  return report;
}

ordered_json ToJson(const MetricsReport& report) {
  ordered_json out;
  out["n_total"] = report.n_total;
  out["n_idk"] = report.n_idk;
  out["n_nonidk"] = report.n_nonidk;
  out["accuracy_standard"] = report.accuracy_standard;
  out["accuracy_granola"] = report.accuracy_granola;
  out["selective_accuracy_granola"] = report.selective_accuracy_granola;
  out["mean_informativeness"] = report.mean_informativeness;
  out["knowledge_gap"] = report.knowledge_gap;
  ordered_json histogram = ordered_json::object();
  for (const auto& bin : report.match_level_histogram) {
    histogram[bin.label] = {{"count", bin.count}, {"fraction", bin.fraction}};
  }
  out["match_level_histogram"] = std::move(histogram);
  if (!report.strata.empty()) {
    ordered_json strata = ordered_json::array();
    for (const auto& stratum : report.strata) {
      ordered_json entry;
      entry["key"] = stratum.key;
      if (stratum.popularity_min) {
        entry["popularity_min"] = *stratum.popularity_min;
      }
      if (stratum.popularity_max) {
        entry["popularity_max"] = *stratum.popularity_max;
      }
      entry["report"] = ToJson(stratum.report);
      strata.push_back(std::move(entry));
    }
    out["strata"] = std::move(strata);
  }
  return out;
}

MetricsReport MetricsReportFromJson(const json& in) {
  MetricsReport report;
  try {
    report.n_total = in.at("n_total").get<int64_t>();
    report.n_idk = in.at("n_idk").get<int64_t>();
    report.n_nonidk = in.at("n_nonidk").get<int64_t>();
    report.accuracy_standard = in.at("accuracy_standard").get<double>();
    report.accuracy_granola = in.at("accuracy_granola").get<double>();
    report.selective_accuracy_granola =
        in.at("selective_accuracy_granola").get<double>();
    report.mean_informativeness = in.at("mean_informativeness").get<double>();
    report.knowledge_gap = in.at("knowledge_gap").get<double>();
    // nlohmann::json sorts object keys, so rebuild the canonical bin order.
    const json& histogram = in.at("match_level_histogram");
    std::vector<HistogramBin> levels;
    std::optional<HistogramBin> idk;
    std::optional<HistogramBin> error;
    for (const auto& [label, bin] : histogram.items()) {
      HistogramBin parsed{label, bin.at("count").get<int64_t>(),
                          bin.at("fraction").get<double>()};
      if (label == "idk") {
        idk = parsed;
      } else if (label == "error") {
        error = parsed;
      } else {
        levels.push_back(parsed);
      }
    }
    std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) {
      return std::stoi(a.label) < std::stoi(b.label);
    });
    report.match_level_histogram = std::move(levels);
    if (idk) report.match_level_histogram.push_back(*idk);
    if (error) report.match_level_histogram.push_back(*error);
    if (auto it = in.find("strata"); it != in.end()) {
      for (const json& entry : *it) {
        Stratum stratum;
        stratum.key = entry.at("key").get<std::string>();
        if (entry.contains("popularity_min")) {
          stratum.popularity_min = entry.at("popularity_min").get<int64_t>();
        }
        if (entry.contains("popularity_max")) {
          stratum.popularity_max = entry.at("popularity_max").get<int64_t>();
        }
        stratum.report = MetricsReportFromJson(entry.at("report"));
        report.strata.push_back(std::move(stratum));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
  return report;
}

std::string HistogramCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "label,count,fraction\n";
  for (const auto& bin : report.match_level_histogram) {
    out << bin.label << ',' << bin.count << ',' << FormatDouble(bin.fraction)
        << '\n';
  }
  return out.str();
}

std::string StrataCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "stratum,popularity_min,popularity_max,n_total,n_idk,"
         "accuracy_standard,accuracy_granola,selective_accuracy_granola,"
         "mean_informativeness,knowledge_gap\n";
  for (const auto& s : report.strata) {
    const MetricsReport& r = s.report;
    out << s.key << ','
        << (s.popularity_min ? std::to_string(*s.popularity_min) : "") << ','
        << (s.popularity_max ? std::to_string(*s.popularity_max) : "") << ','
        << r.n_total << ',' << r.n_idk << ','
        << FormatDouble(r.accuracy_standard) << ','
        << FormatDouble(r.accuracy_granola) << ','
        << FormatDouble(r.selective_accuracy_granola) << ','
        << FormatDouble(r.mean_informativeness) << ','
        << FormatDouble(r.knowledge_gap) << '\n';
  }
  return out.str();
}

}  // namespace granola
