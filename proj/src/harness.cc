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

#include "granola/harness.h"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "granola/errors.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::string& value) {
  std::filesystem::path path(value);
  return path.is_absolute() ? path : base / path;
}

std::vector<std::string> MethodLabels(std::span<const DecoderConfig> methods) {
  std::map<std::string, int> uses;
  for (const auto& m : methods) ++uses[std::string(MethodName(m.method))];
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const auto& m : methods) {
    std::string label(MethodName(m.method));
    if (uses[label] > 1) {
      if (m.method == DecodeMethod::kDrag) {
        label += "-" + std::string(AggregatorName(m.aggregator));
      }
      if (++seen[label] > 1) label += "-" + std::to_string(seen[label]);
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

}  // namespace

void RunConfig::Validate() const {
  if (dataset.empty()) throw ConfigError("run config needs a dataset path");
  if (output_dir.empty()) throw ConfigError("run config needs an output dir");
  if (methods.empty()) throw ConfigError("run config lists no methods");
  for (const auto& method : methods) method.Validate();
  eval.Validate();
  if (strata.popularity && strata.popularity_bins < 1) {
    throw ConfigError("popularity bins must be >= 1");
  }
}

RunConfig RunConfigFromJson(const json& in,
                            const std::filesystem::path& base_dir) {
  RunConfig config;
  try {
    config.dataset = Resolve(base_dir, in.at("dataset").get<std::string>());
    config.output_dir =
        Resolve(base_dir, in.value("output_dir", std::string("granola_run")));
    config.seed = in.value("seed", uint64_t{0});
    if (in.contains("eval")) config.eval = EvalConfigFromJson(in.at("eval"));
    if (in.contains("strata")) {
      const json& strata = in.at("strata");
      config.strata.popularity = strata.value("popularity", true);
      config.strata.popularity_bins = strata.value("bins", 10);
      config.strata.relation = strata.value("relation", true);
    }
    if (in.contains("model")) {
      config.model = ModelConfigFromJson(in.at("model"), base_dir);
    }
    for (const json& method : in.at("methods")) {
      config.methods.push_back(DecoderConfigFromJson(method));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  config.Validate();
  return config;
}

ordered_json ToJson(const RunConfig& config) {
  ordered_json out;
  out["dataset"] = config.dataset.string();
  out["output_dir"] = config.output_dir.string();
  out["seed"] = config.seed;
  out["eval"] = ToJson(config.eval);
  out["strata"] = {{"popularity", config.strata.popularity},
                   {"bins", config.strata.popularity_bins},
                   {"relation", config.strata.relation}};
  out["model"] = ToJson(config.model);
  ordered_json methods = ordered_json::array();
  for (const auto& method : config.methods) methods.push_back(ToJson(method));
  out["methods"] = std::move(methods);
  return out;
}

RunArtifacts Run(const RunConfig& config,
                 std::shared_ptr<const LlmGateway> llm) {
  config.Validate();
  if (!std::filesystem::exists(config.dataset)) {
    throw IoError("dataset '" + config.dataset.string() + "' does not exist");
  }
  const LoadedDataset loaded = LoadDataset(config.dataset, /*strict=*/true);
  if (!llm) llm = MakeGateway(config.model, config.seed);

  std::filesystem::create_directories(config.output_dir);
  RunArtifacts artifacts;
  std::vector<NamedReport> popularity_reports;
  std::vector<NamedReport> relation_reports;
  const std::vector<std::string> labels = MethodLabels(config.methods);

  for (size_t m = 0; m < config.methods.size(); ++m) {
    const DecoderConfig& method = config.methods[m];
    MethodArtifacts out;
    out.method = labels[m];
    const std::filesystem::path dir = config.output_dir;
    out.predictions = dir / (out.method + ".predictions.jsonl");
    out.report = dir / (out.method + ".report.json");
    out.histogram_csv = dir / (out.method + ".histogram.csv");

    std::ofstream stream(out.predictions, std::ios::binary | std::ios::trunc);
    if (!stream) {
      throw IoError("cannot open '" + out.predictions.string() + "'");
    }
    const std::vector<Prediction> predictions = DecodeDataset(
        loaded.examples, *llm, method, [&](const Prediction& p) {
          stream << PredictionToJson(p).dump() << '\n';
          stream.flush();
        });
    stream.close();

    out.metrics = EvaluateCorpus(predictions, loaded.examples, config.eval);
    ordered_json report;
    report["config"] = ToJson(config);
    report["method"] = ToJson(method);
    report["label"] = out.method;
    report["metrics"] = ToJson(out.metrics);
    ordered_json strata_by = ordered_json::object();

    auto stratify = [&](StratifyKey key, int bins,
                        std::vector<NamedReport>* sink) {
      MetricsReport stratified =
          Stratify(predictions, loaded.examples, config.eval, key, bins);
      const std::string name(StratifyKeyName(key));
      strata_by[name] = ToJson(stratified);
      const auto csv = dir / (out.method + ".strata_" + name + ".csv");
      WriteText(csv, StrataCsv(stratified));
      out.strata_csvs.push_back(csv);
      sink->push_back({out.method, std::move(stratified)});
    };
    if (config.strata.popularity) {
      stratify(StratifyKey::kPopularity, config.strata.popularity_bins,
               &popularity_reports);
    }
    if (config.strata.relation) {
      stratify(StratifyKey::kRelation, 0, &relation_reports);
    } else {
      relation_reports.push_back({out.method, out.metrics});
    }
    report["strata_by"] = std::move(strata_by);

    WriteText(out.report, report.dump(2) + "\n");
    WriteText(out.histogram_csv, HistogramCsv(out.metrics));
    artifacts.methods.push_back(std::move(out));
  }

  if (!popularity_reports.empty() &&
      HasPopularityBins(popularity_reports.front().report)) {
    artifacts.popularity_csv = config.output_dir / "accuracy_vs_popularity.csv";
    WriteText(artifacts.popularity_csv,
              AccuracyVsPopularityCsv(popularity_reports));
  }
  artifacts.scatter_csv = config.output_dir / "standard_vs_granola.csv";
  WriteText(artifacts.scatter_csv, StandardVsGranolaCsv(relation_reports));
  return artifacts;
}

const MetaEvalCell& MetaEvalTable::Cell(bool standard_correct,
                                        bool granola_correct) const {
  for (const auto& cell : cells) {
    if (cell.standard_correct == standard_correct &&
        cell.granola_correct == granola_correct) {
      return cell;
    }
  }
  throw std::logic_error("meta-eval table is missing a cell");
}

MetaEvalTable MetaEval(std::span<const Prediction> predictions,
                       std::span<const QAExample> examples,
                       const SemanticScorer& scorer, double tau) {
  EvalConfig config;
  config.tau = tau;
  config.Validate();
  std::unordered_map<std::string_view, const QAExample*> index;
  for (const auto& example : examples) index.emplace(example.id, &example);

  MetaEvalTable table;
  const bool order[4][2] = {{true, true}, {false, true}, {true, false},
                            {false, false}};
  for (int i = 0; i < 4; ++i) {
    table.cells[i].standard_correct = order[i][0];
    table.cells[i].granola_correct = order[i][1];
  }
  std::array<double, 4> sums{};
  for (const auto& prediction : predictions) {
    auto it = index.find(prediction.example_id);
    if (it == index.end()) {
      throw DataError("prediction references unknown example id '" +
                      prediction.example_id + "'");
    }
    const QAExample& example = *it->second;
    const bool idk = IsIdk(prediction, config);
    const std::string text = idk ? "IDK" : *prediction.answer;
    const bool standard =
        !idk && StandardAccuracy(text, example, config.tau) == 1;
    const bool granola =
        !idk && GranolaAccuracy(FindMatchIndex(text, example, config.tau)) == 1;
    const size_t slot = standard ? (granola ? 0 : 2) : (granola ? 1 : 3);
    MetaEvalCell& cell = table.cells[slot];
    ++cell.count;
    ++table.n_total;
    if (!scorer) continue;
    try {
      const std::optional<double> score =
          scorer(text, example.answers.front().front());
      if (score) {
        sums[slot] += *score;
        ++cell.scored;
      } else {
        ++table.scorer_failures;
      }
    } catch (const std::exception&) {
      ++table.scorer_failures;
    }
  }
  for (size_t i = 0; i < table.cells.size(); ++i) {
    MetaEvalCell& cell = table.cells[i];
    if (table.n_total > 0) {
      cell.fraction = static_cast<double>(cell.count) /
                      static_cast<double>(table.n_total);
    }
    if (cell.scored > 0) {
      cell.mean_score = sums[i] / static_cast<double>(cell.scored);
    }
  }
  return table;
}

ordered_json ToJson(const MetaEvalTable& table) {
  ordered_json out;
  out["n_total"] = table.n_total;
  out["scorer_failures"] = table.scorer_failures;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : table.cells) {
    ordered_json entry;
    entry["standard_correct"] = cell.standard_correct;
    entry["granola_correct"] = cell.granola_correct;
    entry["count"] = cell.count;
    entry["fraction"] = cell.fraction;
    entry["mean_score"] =
        cell.mean_score ? ordered_json(*cell.mean_score) : ordered_json();
    entry["scored"] = cell.scored;
    cells.push_back(std::move(entry));
  }
  out["cells"] = std::move(cells);
  return out;
}

std::string MetaEvalCsv(const MetaEvalTable& table) {
  std::ostringstream out;
  out << "standard_correct,granola_correct,count,fraction,mean_score\n";
  for (const auto& cell : table.cells) {
    out << (cell.standard_correct ? 1 : 0) << ','
        << (cell.granola_correct ? 1 : 0) << ',' << cell.count << ','
        << FormatDouble(cell.fraction) << ','
        << (cell.mean_score ? FormatDouble(*cell.mean_score) : "") << '\n';
  }
  return out.str();
}

SemanticScorer MakeCommandScorer(const std::string& command,
                                 std::span<const Prediction> predictions,
                                 std::span<const QAExample> examples) {
  std::unordered_map<std::string_view, const QAExample*> index;
  for (const auto& example : examples) index.emplace(example.id, &example);

  static std::atomic<int> counter{0};
  const auto stem = std::filesystem::temp_directory_path() /
                    ("granola-scorer-" + std::to_string(::getpid()) + "-" +
                     std::to_string(counter++));
  const auto input = stem.string() + ".in.jsonl";
  const auto output = stem.string() + ".out.txt";

  std::vector<std::pair<std::string, std::string>> pairs;
  {
    std::ofstream in(input);
    if (!in) throw IoError("cannot create scorer input '" + input + "'");
    for (const auto& p : predictions) {
      auto it = index.find(p.example_id);
      if (it == index.end()) continue;
      std::string text = p.idk || !p.answer ? "IDK" : *p.answer;
      std::string reference = it->second->answers.front().front();
      in << json{{"prediction", text}, {"reference", reference}}.dump() << '\n';
      pairs.emplace_back(std::move(text), std::move(reference));
    }
  }
  const std::string shell = command + " < '" + input + "' > '" + output + "'";
  const int status = std::system(shell.c_str());
  std::filesystem::remove(input);
  if (status != 0) {
    std::filesystem::remove(output);
    throw ConfigError("scorer command failed: " + command);
  }

  auto scores = std::make_shared<std::map<std::pair<std::string, std::string>,
                                          std::optional<double>>>();
  {
    std::ifstream in(output);
    std::string line;
    for (const auto& pair : pairs) {
      std::optional<double> score;
      if (std::getline(in, line)) {
        double value = 0.0;
        const auto [ptr, ec] =
            std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec == std::errc() && ptr != line.data()) score = value;
      }
      scores->emplace(pair, score);
    }
  }
  std::filesystem::remove(output);
  return [scores](std::string_view prediction,
                  std::string_view reference) -> std::optional<double> {
    auto it = scores->find({std::string(prediction), std::string(reference)});
    if (it == scores->end()) return std::nullopt;
    return it->second;
  };
}

bool HasPopularityBins(const MetricsReport& report) {
  return std::any_of(report.strata.begin(), report.strata.end(),
                     [](const Stratum& s) { return s.popularity_min.has_value(); });
}

std::string AccuracyVsPopularityCsv(std::span<const NamedReport> reports) {
  std::ostringstream out;
  out << "method,stratum,popularity_min,popularity_max,n,accuracy_standard,"
         "accuracy_granola\n";
  for (const auto& named : reports) {
    bool any = false;
    for (const auto& s : named.report.strata) {
      if (!s.popularity_min) continue;
      any = true;
      out << named.method << ',' << s.key << ',' << *s.popularity_min << ','
          << *s.popularity_max << ',' << s.report.n_total << ','
          << FormatDouble(s.report.accuracy_standard) << ','
          << FormatDouble(s.report.accuracy_granola) << '\n';
    }
    if (!any) {
      throw DataError("report for '" + named.method +
                      "' has no popularity strata");
    }
  }
  return out.str();
}

std::string StandardVsGranolaCsv(std::span<const NamedReport> reports) {
  std::ostringstream out;
  out << "method,stratum,accuracy_standard,accuracy_granola\n";
  for (const auto& named : reports) {
    out << named.method << ",all,"
        << FormatDouble(named.report.accuracy_standard) << ','
        << FormatDouble(named.report.accuracy_granola) << '\n';
    for (const auto& s : named.report.strata) {
      out << named.method << ',' << s.key << ','
          << FormatDouble(s.report.accuracy_standard) << ','
          << FormatDouble(s.report.accuracy_granola) << '\n';
    }
  }
  return out.str();
}

MetricsReport LoadReport(const std::filesystem::path& path,
                         std::string_view strata_key) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("report '" + path.string() + "': " + e.what());
  }
  if (auto by = parsed.find("strata_by"); by != parsed.end()) {
    if (auto it = by->find(std::string(strata_key)); it != by->end()) {
      return MetricsReportFromJson(*it);
    }
  }
  if (auto it = parsed.find("metrics"); it != parsed.end()) {
    return MetricsReportFromJson(*it);
  }
  return MetricsReportFromJson(parsed);
}

}  // namespace granola
