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

// Command-line front end: stats, enrich, decode, eval, meta-eval, report
// and run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "granola/dataset.h"
#include "granola/drag.h"
#include "granola/enrichment.h"
#include "granola/errors.h"
#include "granola/harness.h"
#include "granola/kg.h"
#include "granola/llm.h"
#include "granola/metrics.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string mock_llm;
  std::string mock_kg;

  json config = json::object();
  fs::path config_dir = fs::current_path();

  void LoadConfig() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config '" + config_path + "'");
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + config_path + "': " + e.what());
    }
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    config_dir = fs::absolute(config_path).parent_path();
  }

  json Section(const char* name) const {
    auto it = config.find(name);
    return it == config.end() ? json::object() : *it;
  }

  uint64_t Seed() const {
    if (seed) return *seed;
    return config.value("seed", uint64_t{0});
  }

  ModelConfig Model(const std::string& model_path) const {
    ModelConfig model;
    if (!model_path.empty()) {
      model = LoadModelConfig(model_path);
    } else if (config.contains("model")) {
      model = ModelConfigFromJson(config.at("model"), config_dir);
    }
    if (!mock_llm.empty()) {
      model.provider = "mock";
      model.script = mock_llm;
    }
    return model;
  }
};

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void Emit(const std::string& out_path, const ordered_json& value) {
  const std::string text = value.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    WriteFile(out_path, text);
  }
}

std::vector<QAExample> LoadExamples(const std::string& path) {
  if (path.empty()) throw ConfigError("--dataset is required");
  return LoadDataset(path, /*strict=*/true).examples;
}

struct StatsArgs {
  std::string dataset;
  bool lenient = false;
  std::string out;
};

int RunStats(const GlobalOptions&, const StatsArgs& args) {
  if (args.dataset.empty()) throw ConfigError("--dataset is required");
  const LoadedDataset loaded = LoadDataset(args.dataset, !args.lenient);
  for (const auto& error : loaded.errors) {
    std::cerr << args.dataset << ":" << error.line << ": " << error.message
              << "\n";
  }
  ordered_json out = StatsToJson(ComputeStats(loaded.examples));
  out["rejected_rows"] = loaded.errors.size();
  Emit(args.out, out);
  return 0;
}

struct EnrichArgs {
  std::string input;
  std::string output;
  std::string relations;
  std::string kg;
  std::string model;
  std::optional<int> judge_samples;
  std::optional<int> parallelism;
  std::string report;
};

int RunEnrich(const GlobalOptions& global, const EnrichArgs& args) {
  if (args.input.empty() || args.output.empty()) {
    throw ConfigError("--input and --output are required");
  }
  const json section = global.Section("enrich");
  EnrichmentConfig config = EnrichmentConfigFromJson(section);
  std::string relations = args.relations;
  if (relations.empty() && section.contains("relations_file")) {
    relations = (global.config_dir /
                 section.at("relations_file").get<std::string>()).string();
  }
  if (!relations.empty()) config.relations = LoadRelationAllowList(relations);
  if (args.judge_samples) config.judge_samples = *args.judge_samples;
  if (args.parallelism) config.parallelism = *args.parallelism;
  config.Validate();

  std::string kg_spec = args.kg;
  if (kg_spec.empty()) kg_spec = global.mock_kg;
  if (kg_spec.empty() && section.contains("kg")) {
    kg_spec = section.at("kg").get<std::string>();
    if (kg_spec.rfind("http", 0) != 0) {
      kg_spec = (global.config_dir / kg_spec).string();
    }
  }
  if (kg_spec.empty()) throw ConfigError("no knowledge graph: pass --kg");

  auto llm = MakeGateway(global.Model(args.model), global.Seed());
  auto kg = MakeKnowledgeGraph(kg_spec, llm->limiter());
  const CleanReport report =
      EnrichDataset(args.input, args.output, *kg, *llm, config);
  ordered_json out;
  out["config"] = ToJson(config);
  out["report"] = ToJson(report);
  Emit(args.report, out);
  return 0;
}

struct DecodeArgs {
  std::string method;
  std::optional<int> n;
  std::optional<double> temperature;
  std::string aggregator;
  std::string sample_prompt;
  std::string fallback;
  std::optional<int> parallelism;
  std::string dataset;
  std::string model;
  std::string out;
};

int RunDecode(const GlobalOptions& global, const DecodeArgs& args) {
  json section = global.Section("decode");
  if (!args.method.empty()) section["method"] = args.method;
  if (args.n) section["n"] = *args.n;
  if (args.temperature) section["temperature"] = *args.temperature;
  if (!args.aggregator.empty()) section["aggregator"] = args.aggregator;
  if (!args.sample_prompt.empty()) section["sample_prompt"] = args.sample_prompt;
  if (!args.fallback.empty()) section["fallback"] = args.fallback;
  if (args.parallelism) section["parallelism"] = *args.parallelism;
  const DecoderConfig config = DecoderConfigFromJson(section);
  config.Validate();
  if (args.out.empty()) throw ConfigError("--out is required");

  const std::vector<QAExample> examples = LoadExamples(args.dataset);
  auto llm = MakeGateway(global.Model(args.model), global.Seed());
  const fs::path out_path(args.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + args.out + "' for writing");
  DecodeDataset(examples, *llm, config, [&](const Prediction& prediction) {
    out << PredictionToJson(prediction).dump() << '\n';
    out.flush();
  });
  return 0;
}

EvalConfig ResolveEval(const GlobalOptions& global, std::optional<double> tau,
                       std::optional<double> lambda) {
  EvalConfig config = EvalConfigFromJson(global.Section("eval"));
  if (tau) config.tau = *tau;
  if (lambda) config.lambda = *lambda;
  config.Validate();
  return config;
}

struct EvalArgs {
  std::string dataset;
  std::string predictions;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::vector<std::string> strata;
  int bins = 10;
  std::string out;
  std::string csv_dir;
};

int RunEval(const GlobalOptions& global, const EvalArgs& args) {
  const EvalConfig config = ResolveEval(global, args.tau, args.lambda);
  if (args.predictions.empty()) throw ConfigError("--predictions is required");
  if (args.bins < 1) throw ConfigError("--bins must be >= 1");
  std::vector<StratifyKey> keys;
  for (const auto& name : args.strata) {
    const auto key = ParseStratifyKey(name);
    if (!key) throw ConfigError("unknown strata key '" + name + "'");
    keys.push_back(*key);
  }
  const std::vector<QAExample> examples = LoadExamples(args.dataset);
  const std::vector<Prediction> predictions = LoadPredictions(args.predictions);

  const MetricsReport report = EvaluateCorpus(predictions, examples, config);
  ordered_json out;
  out["config"] = ToJson(config);
  out["metrics"] = ToJson(report);
  ordered_json strata_by = ordered_json::object();
  for (StratifyKey key : keys) {
    const MetricsReport stratified =
        Stratify(predictions, examples, config, key, args.bins);
    const std::string name(StratifyKeyName(key));
    strata_by[name] = ToJson(stratified);
    if (!args.csv_dir.empty()) {
      WriteFile(fs::path(args.csv_dir) / ("strata_" + name + ".csv"),
                StrataCsv(stratified));
    }
  }
  if (!keys.empty()) out["strata_by"] = std::move(strata_by);
  if (!args.csv_dir.empty()) {
    WriteFile(fs::path(args.csv_dir) / "histogram.csv", HistogramCsv(report));
  }
  Emit(args.out, out);
  return 0;
}

struct MetaEvalArgs {
  std::string dataset;
  std::string predictions;
  std::optional<double> tau;
  std::string scorer_cmd;
  std::string out;
  std::string csv;
};

int RunMetaEval(const GlobalOptions& global, const MetaEvalArgs& args) {
  const EvalConfig config = ResolveEval(global, args.tau, std::nullopt);
  if (args.predictions.empty()) throw ConfigError("--predictions is required");
  const std::vector<QAExample> examples = LoadExamples(args.dataset);
  const std::vector<Prediction> predictions = LoadPredictions(args.predictions);
  SemanticScorer scorer;
  if (!args.scorer_cmd.empty()) {
    scorer = MakeCommandScorer(args.scorer_cmd, predictions, examples);
  }
  const MetaEvalTable table = MetaEval(predictions, examples, scorer, config.tau);
  if (table.scorer_failures > 0) {
    std::cerr << "scorer gave no score for " << table.scorer_failures
              << " example(s); they are excluded from the means\n";
  }
  if (!args.csv.empty()) WriteFile(args.csv, MetaEvalCsv(table));
  ordered_json out;
  out["tau"] = config.tau;
  out["table"] = ToJson(table);
  Emit(args.out, out);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> reports;
  std::string out_dir;
};

std::string ReportLabel(const fs::path& path) {
  std::ifstream in(path);
  json parsed = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_object() && parsed.contains("label")) {
    return parsed.at("label").get<std::string>();
  }
  std::string stem = path.filename().string();
  if (const auto dot = stem.find('.'); dot != std::string::npos) {
    stem.resize(dot);
  }
  return stem;
}

int RunReport(const GlobalOptions&, const ReportArgs& args) {
  if (args.reports.empty()) throw ConfigError("no reports given");
  if (args.out_dir.empty()) throw ConfigError("--out-dir is required");
  std::vector<NamedReport> popularity;
  std::vector<NamedReport> relation;
  for (const auto& path : args.reports) {
    const std::string label = ReportLabel(path);
    MetricsReport binned = LoadReport(path, "popularity");
    if (HasPopularityBins(binned)) {
      popularity.push_back({label, std::move(binned)});
    } else {
      std::cerr << "note: " << path << " has no popularity bins\n";
    }
    relation.push_back({label, LoadReport(path, "relation")});
  }
  const fs::path dir(args.out_dir);
  if (!popularity.empty()) {
    WriteFile(dir / "accuracy_vs_popularity.csv",
              AccuracyVsPopularityCsv(popularity));
  }
  WriteFile(dir / "standard_vs_granola.csv", StandardVsGranolaCsv(relation));
  return 0;
}

struct RunArgs {
  std::string output_dir;
  std::string dataset;
};

int RunPipeline(const GlobalOptions& global, const RunArgs& args) {
  if (global.config_path.empty()) throw ConfigError("run needs --config");
  json section = global.config;
  if (!args.dataset.empty()) {
    section["dataset"] = fs::absolute(args.dataset).string();
  }
  if (!args.output_dir.empty()) {
    section["output_dir"] = fs::absolute(args.output_dir).string();
  }
  RunConfig config = RunConfigFromJson(section, global.config_dir);
  config.seed = global.Seed();
  config.model = global.Model("");
  const RunArtifacts artifacts = Run(config);
  ordered_json out = ordered_json::object();
  for (const auto& method : artifacts.methods) {
    out[method.method] = {{"report", method.report.string()},
                          {"accuracy_standard", method.metrics.accuracy_standard},
                          {"accuracy_granola", method.metrics.accuracy_granola},
                          {"knowledge_gap", method.metrics.knowledge_gap}};
  }
  Emit("", out);
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Multi-granularity QA evaluation toolkit", "granola"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON config file");
  app.add_option("--seed", global.seed, "Seed for mock providers");
  app.add_option("--mock-llm", global.mock_llm, "Mock LLM script (JSON)");
  app.add_option("--mock-kg", global.mock_kg, "Mock KG fixture (JSON)");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Summarize a dataset");
  stats_cmd->add_option("dataset,--dataset", stats.dataset, "Dataset JSONL");
  stats_cmd->add_flag("--lenient", stats.lenient,
                      "Skip invalid rows instead of failing");
  stats_cmd->add_option("--out", stats.out, "Write JSON here");

  EnrichArgs enrich;
  auto* enrich_cmd =
      app.add_subcommand("enrich", "Add multi-granularity answers");
  enrich_cmd->add_option("--input", enrich.input, "Source rows JSONL");
  enrich_cmd->add_option("--output", enrich.output, "Output dataset JSONL");
  enrich_cmd->add_option("--relations", enrich.relations,
                         "Relation allow-list file");
  enrich_cmd->add_option("--kg", enrich.kg, "KG endpoint URL or fixture");
  enrich_cmd->add_option("--model", enrich.model, "Model config JSON");
  enrich_cmd->add_option("--judge-samples", enrich.judge_samples,
                         "Consistency judge samples");
  enrich_cmd->add_option("--parallelism", enrich.parallelism,
                         "Rows processed concurrently");
  enrich_cmd->add_option("--report", enrich.report,
                         "Write the cleaning report here");

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "Produce predictions");
  decode_cmd->add_option("--method", decode.method)
      ->check(CLI::IsMember({"greedy", "idk", "idk-uncertain", "idk-agg",
                             "self-consistency", "drag"}));
  decode_cmd->add_option("--n", decode.n, "Samples per question");
  decode_cmd->add_option("--temperature", decode.temperature);
  decode_cmd->add_option("--aggregator", decode.aggregator)
      ->check(CLI::IsMember({"llm", "majority", "identity"}));
  decode_cmd->add_option("--sample-prompt", decode.sample_prompt,
                         "Prompt kind used to draw samples");
  decode_cmd->add_option("--fallback", decode.fallback)
      ->check(CLI::IsMember({"error", "majority"}));
  decode_cmd->add_option("--parallelism", decode.parallelism);
  decode_cmd->add_option("--dataset", decode.dataset, "Dataset JSONL");
  decode_cmd->add_option("--model", decode.model, "Model config JSON");
  decode_cmd->add_option("--out", decode.out, "Predictions JSONL");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset JSONL");
  eval_cmd->add_option("--predictions", eval.predictions, "Predictions JSONL");
  eval_cmd->add_option("--tau", eval.tau, "Token F1 match threshold");
  eval_cmd->add_option("--lambda", eval.lambda, "Informativeness decay");
  eval_cmd->add_option("--strata", eval.strata, "popularity and/or relation")
      ->delimiter(',');
  eval_cmd->add_option("--bins", eval.bins, "Popularity bins");
  eval_cmd->add_option("--out", eval.out, "Write report JSON here");
  eval_cmd->add_option("--csv-dir", eval.csv_dir, "Write CSV tables here");

  MetaEvalArgs meta;
  auto* meta_cmd = app.add_subcommand(
      "meta-eval", "Standard vs multi-granularity correctness table");
  meta_cmd->add_option("--dataset", meta.dataset, "Dataset JSONL");
  meta_cmd->add_option("--predictions", meta.predictions, "Predictions JSONL");
  meta_cmd->add_option("--tau", meta.tau, "Token F1 match threshold");
  meta_cmd->add_option("--scorer-cmd", meta.scorer_cmd,
                       "Shell command scoring JSONL pairs on stdin");
  meta_cmd->add_option("--out", meta.out, "Write JSON here");
  meta_cmd->add_option("--csv", meta.csv, "Write CSV here");

  ReportArgs report;
  auto* report_cmd =
      app.add_subcommand("report", "Emit plot series from reports");
  report_cmd->add_option("reports,--report", report.reports,
                         "Report JSON files");
  report_cmd->add_option("--out-dir", report.out_dir, "Output directory");

  RunArgs run;
  auto* run_cmd = app.add_subcommand(
      "run", "Decode, evaluate and report every method in --config");
  run_cmd->add_option("--dataset", run.dataset, "Override the dataset");
  run_cmd->add_option("--output-dir", run.output_dir,
                      "Override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ExitCode(ErrorKind::kConfig);
  }

  try {
    global.LoadConfig();
    if (*stats_cmd) return RunStats(global, stats);
    if (*enrich_cmd) return RunEnrich(global, enrich);
    if (*decode_cmd) return RunDecode(global, decode);
    if (*eval_cmd) return RunEval(global, eval);
    if (*meta_cmd) return RunMetaEval(global, meta);
    if (*report_cmd) return RunReport(global, report);
    if (*run_cmd) return RunPipeline(global, run);
  } catch (const Error& e) {
    std::cerr << "granola: " << e.what() << "\n";
    return ExitCode(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "granola: " << e.what() << "\n";
    return ExitCode(ErrorKind::kData);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "granola: " << e.what() << "\n";
    return ExitCode(ErrorKind::kData);
  }
  return ExitCode(ErrorKind::kConfig);
}

}  // namespace
}  // namespace granola

int main(int argc, char** argv) { return granola::Main(argc, argv); }
