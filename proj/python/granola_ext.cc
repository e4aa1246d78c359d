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

// Python bindings. Structured values cross the boundary as plain dicts and
// lists, using the same JSON shapes as the on-disk formats.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "granola/dataset.h"
#include "granola/drag.h"
#include "granola/enrichment.h"
#include "granola/errors.h"
#include "granola/harness.h"
#include "granola/llm.h"
#include "granola/metrics.h"
#include "granola/prompts.h"
#include "granola/text_match.h"

namespace py = pybind11;

namespace granola {
namespace {

using nlohmann::json;

json ToNative(const py::handle& value) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(value).cast<std::string>());
}

py::object FromNative(const nlohmann::ordered_json& value) {
  const auto loads = py::module_::import("json").attr("loads");
  return loads(value.dump());
}

std::vector<QAExample> Examples(const py::list& rows) {
  std::vector<QAExample> examples;
  for (const auto& row : rows) {
    QAExample example = ExampleFromJson(ToNative(row));
    Validate(example);
    examples.push_back(std::move(example));
  }
  return examples;
}

std::vector<Prediction> Predictions(const py::list& rows) {
  std::vector<Prediction> predictions;
  for (const auto& row : rows) {
    predictions.push_back(PredictionFromJson(ToNative(row)));
  }
  return predictions;
}

EvalConfig MakeEvalConfig(double tau, double lambda) {
  EvalConfig config;
  config.tau = tau;
  config.lambda = lambda;
  config.Validate();
  return config;
}

std::shared_ptr<LlmGateway> MockGateway(const py::dict& script,
                                        uint64_t seed) {
  auto provider = std::make_shared<MockProvider>(
      MockProvider::ParseScript(ToNative(script)), seed);
  GatewayConfig config;
  config.max_retries = 0;
  return std::make_shared<LlmGateway>(std::move(provider), config);
}

py::object Evaluate(const py::list& predictions, const py::list& examples,
                    double tau, double lambda,
                    const std::optional<std::string>& strata, int bins) {
  const EvalConfig config = MakeEvalConfig(tau, lambda);
  const auto ex = Examples(examples);
  const auto preds = Predictions(predictions);
  if (!strata) return FromNative(ToJson(EvaluateCorpus(preds, ex, config)));
  const auto key = ParseStratifyKey(*strata);
  if (!key) throw ConfigError("unknown strata key '" + *strata + "'");
  return FromNative(ToJson(Stratify(preds, ex, config, *key, bins)));
}

py::object Decode(const py::list& examples, const py::dict& script,
                  const py::dict& config, uint64_t seed) {
  const auto ex = Examples(examples);
  const DecoderConfig decoder = DecoderConfigFromJson(ToNative(config));
  decoder.Validate();
  auto llm = MockGateway(script, seed);
  std::vector<Prediction> predictions;
  {
    py::gil_scoped_release release;
    predictions = DecodeDataset(ex, *llm, decoder);
  }
  py::list out;
  for (const auto& p : predictions) out.append(FromNative(PredictionToJson(p)));
  return out;
}

py::object RunFromConfig(const py::dict& config, const std::string& base_dir) {
  const RunConfig run = RunConfigFromJson(ToNative(config), base_dir);
  RunArtifacts artifacts;
  {
    py::gil_scoped_release release;
    artifacts = Run(run);
  }
  py::dict out;
  for (const auto& method : artifacts.methods) {
    py::dict entry;
    entry["predictions"] = method.predictions.string();
    entry["report"] = method.report.string();
    entry["metrics"] = FromNative(ToJson(method.metrics));
    out[py::str(method.method)] = entry;
  }
  return out;
}

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-granularity QA evaluation core";

  // Translators run newest first, so the base class is registered first.
  auto base = py::register_exception<Error>(m, "GranolaError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<ProviderError>(m, "ProviderError", base);

  m.def(
      "normalize",
      [](const std::string& text) { return Normalize(text).tokens; },
      py::arg("text"));
  m.def(
      "token_f1",
      [](const std::string& a, const std::string& b) { return TokenF1(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "exact_match",
      [](const std::string& a, const std::string& b) {
        return ExactMatch(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "match_level",
      [](const std::string& prediction, const py::dict& example,
         double tau) -> std::optional<int> {
        QAExample ex = ExampleFromJson(ToNative(example));
        Validate(ex);
        return FindMatchIndex(prediction, ex, tau).matched_level;
      },
      py::arg("prediction"), py::arg("example"), py::arg("tau") = 0.8,
      "1-based level of the first matching answer, or None.");
  m.def("evaluate", &Evaluate, py::arg("predictions"), py::arg("examples"),
        py::arg("tau") = 0.8, py::arg("lam") = std::log(2.0),
        py::arg("strata") = std::nullopt, py::arg("bins") = 10);
  m.def(
      "meta_eval",
      [](const py::list& predictions, const py::list& examples, double tau) {
        return FromNative(
            ToJson(MetaEval(Predictions(predictions), Examples(examples),
                            SemanticScorer(), tau)));
      },
      py::arg("predictions"), py::arg("examples"), py::arg("tau") = 0.8);
  m.def(
      "load_dataset",
      [](const std::string& path, bool strict) {
        py::list out;
        for (const auto& ex : LoadDataset(path, strict).examples) {
          out.append(FromNative(ExampleToJson(ex)));
        }
        return out;
      },
      py::arg("path"), py::arg("strict") = true);
  m.def(
      "dataset_stats",
      [](const py::list& examples) {
        return FromNative(StatsToJson(ComputeStats(Examples(examples))));
      },
      py::arg("examples"));
  m.def(
      "render_prompt",
      [](const std::string& kind, const py::dict& slots) {
        const auto parsed = ParsePromptKind(kind);
        if (!parsed) throw ConfigError("unknown prompt kind '" + kind + "'");
        PromptSlots values;
        for (const auto& [key, value] : slots) {
          if (py::isinstance<py::str>(value)) {
            values.emplace(key.cast<std::string>(), value.cast<std::string>());
          } else {
            values.emplace(key.cast<std::string>(),
                           value.cast<std::vector<std::string>>());
          }
        }
        return RenderPrompt(*parsed, values);
      },
      py::arg("kind"), py::arg("slots"));
  m.def(
      "aggregate_majority",
      [](const std::vector<std::string>& responses) {
        SampleSet samples;
        samples.responses = responses;
        return *AggregateMajority(samples).answer;
      },
      py::arg("responses"));
  m.def(
      "disambiguate",
      [](const py::list& candidates) {
        std::vector<KgEntity> entities;
        for (const auto& c : candidates) {
          const json j = ToNative(c);
          entities.push_back({j.at("qid").get<std::string>(),
                              j.value("label", std::string()),
                              j.value("description", std::string())});
        }
        const KgEntity best = Disambiguate(entities);
        py::dict out;
        out["qid"] = best.qid;
        out["label"] = best.label;
        out["description"] = best.description;
        return out;
      },
      py::arg("candidates"));
  m.def(
      "parse_levels",
      [](const std::string& text,
         const std::optional<std::vector<std::string>>& blacklist) {
        const std::vector<std::string> words =
            blacklist ? *blacklist : DefaultTrivialBlacklist();
        return ParseLevels(text, words).levels;
      },
      py::arg("text"), py::arg("blacklist") = std::nullopt);
  m.def("decode", &Decode, py::arg("examples"), py::arg("script"),
        py::arg("config"), py::arg("seed") = 0,
        "Decodes examples against a scripted mock model.");
  m.def("run", &RunFromConfig, py::arg("config"), py::arg("base_dir") = ".");
}

}  // namespace
}  // namespace granola
