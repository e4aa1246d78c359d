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

#include "granola/drag.h"

#include <array>
#include <mutex>
#include <unordered_map>

#include "granola/errors.h"
#include "granola/metrics.h"
#include "granola/text_match.h"
#include "parallel.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct MethodInfo {
  DecodeMethod method;
  std::string_view name;
};

constexpr std::array<MethodInfo, 6> kMethods = {{
    {DecodeMethod::kGreedy, "greedy"},
    {DecodeMethod::kIdk, "idk"},
    {DecodeMethod::kIdkUncertain, "idk-uncertain"},
    {DecodeMethod::kIdkAgg, "idk-agg"},
    {DecodeMethod::kSelfConsistency, "self-consistency"},
    {DecodeMethod::kDrag, "drag"},
}};

GenerationRequest MakeRequest(std::string prompt, double temperature, int n,
                              const SamplingOptions& options) {
  GenerationRequest request;
  request.prompt = std::move(prompt);
  request.temperature = temperature;
  request.num_samples = n;
  request.max_tokens = options.max_tokens;
  request.stop_sequences = options.stop_sequences;
  return request;
}

Prediction FromOutcome(std::string_view example_id, std::string_view method,
                       const AggregationOutcome& outcome,
                       std::span<const std::string> idk_markers) {
  if (outcome.idk) return Prediction::Idk(std::string(example_id),
                                          std::string(method));
  const std::string& answer = *outcome.answer;
  if (IsIdkText(answer, idk_markers)) {
    Prediction p = Prediction::Idk(std::string(example_id), std::string(method));
    p.metadata["raw_answer"] = answer;
    return p;
  }
  return Prediction::Answer(std::string(example_id), std::string(method),
                            answer);
}

PromptKind PromptFor(DecodeMethod method) {
  switch (method) {
    case DecodeMethod::kIdk:
      return PromptKind::kIdk;
    case DecodeMethod::kIdkUncertain:
      return PromptKind::kIdkIfUncertain;
    case DecodeMethod::kIdkAgg:
      return PromptKind::kIdkWithAggregation;
    default:
      return PromptKind::kVanilla;
  }
}

}  // namespace

std::string_view AggregatorName(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kLlm:
      return "llm";
    case AggregatorKind::kMajority:
      return "majority";
    case AggregatorKind::kIdentity:
      return "identity";
  }
  return "unknown";
}

std::optional<AggregatorKind> ParseAggregator(std::string_view name) {
  if (name == "llm") return AggregatorKind::kLlm;
  if (name == "majority") return AggregatorKind::kMajority;
  if (name == "identity") return AggregatorKind::kIdentity;
  return std::nullopt;
}

SampleSet SampleResponses(const LlmGateway& llm, std::string_view question,
                          int n, double temperature, PromptKind prompt_kind,
                          const SamplingOptions& options) {
  if (n < 1) throw ConfigError("number of samples must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  SampleSet samples;
  samples.question = std::string(question);
  samples.temperature = temperature;
  samples.prompt_kind = prompt_kind;
  samples.responses = llm.Generate(MakeRequest(
      RenderPrompt(prompt_kind, {{"question", std::string(question)}}),
      temperature, n, options));
  return samples;
}

AggregationOutcome AggregateMajority(const SampleSet& samples) {
  if (samples.responses.empty()) {
    throw ConfigError("cannot aggregate an empty sample set");
  }
  struct Group {
    size_t first;
    int count;
  };
  std::unordered_map<std::string, Group> groups;
  std::vector<std::string> order;
  for (size_t i = 0; i < samples.responses.size(); ++i) {
    std::string key = Normalize(samples.responses[i]).Joined();
    auto [it, inserted] = groups.try_emplace(key, Group{i, 0});
    ++it->second.count;
    if (inserted) order.push_back(std::move(key));
  }
  // `order` lists groups by first occurrence, so a strict > keeps the
  // earliest among equally large groups.
  const Group* best = nullptr;
  for (const auto& key : order) {
    const Group& group = groups.at(key);
    if (best == nullptr || group.count > best->count) best = &group;
  }
  return {samples.responses[best->first], false, AggregatorKind::kMajority};
}

AggregationOutcome AggregateIdentity(const SampleSet& samples) {
  if (samples.responses.empty()) {
    throw ConfigError("cannot aggregate an empty sample set");
  }
  return {samples.responses.front(), false, AggregatorKind::kIdentity};
}

AggregationOutcome AggregateLlm(const SampleSet& samples,
                                const LlmGateway& llm,
                                const LlmAggregatorOptions& options) {
  if (samples.responses.empty()) {
    throw ConfigError("cannot aggregate an empty sample set");
  }
  const std::string prompt =
      RenderPrompt(PromptKind::kAggregation,
                   {{"question", samples.question},
                    {"responses", samples.responses}});
  std::string output;
  try {
    output = llm.Generate(MakeRequest(prompt, 0.0, 1, options.sampling)).front();
  } catch (const ProviderError&) {
    if (options.fallback == AggregatorFallback::kMajority) {
      return AggregateMajority(samples);
    }
    throw;
  }
  if (IsIdkText(output, options.idk_markers)) {
    return {std::nullopt, true, AggregatorKind::kLlm};
  }
  return {std::move(output), false, AggregatorKind::kLlm};
}

Prediction Drag(std::string_view example_id, std::string_view question,
                const LlmGateway& llm, const DragOptions& options) {
  const SampleSet samples =
      SampleResponses(llm, question, options.n, options.temperature,
                      options.sample_prompt, options.sampling);
  AggregationOutcome outcome;
  switch (options.aggregator) {
    case AggregatorKind::kLlm:
      outcome = AggregateLlm(samples, llm, options.llm_aggregator);
      break;
    case AggregatorKind::kMajority:
      outcome = AggregateMajority(samples);
      break;
    case AggregatorKind::kIdentity:
      outcome = AggregateIdentity(samples);
      break;
  }
  Prediction prediction = FromOutcome(example_id, "drag", outcome,
                                      options.llm_aggregator.idk_markers);
  prediction.samples = samples.responses;
  prediction.metadata["aggregator"] = AggregatorName(outcome.aggregator);
  prediction.metadata["n"] = options.n;
  prediction.metadata["temperature"] = options.temperature;
  return prediction;
}

std::string_view MethodName(DecodeMethod method) {
  for (const auto& info : kMethods) {
    if (info.method == method) return info.name;
  }
  return "unknown";
}

std::optional<DecodeMethod> ParseMethod(std::string_view name) {
  for (const auto& info : kMethods) {
    if (info.name == name) return info.method;
  }
  return std::nullopt;
}

void DecoderConfig::Validate() const {
  if (n < 1) throw ConfigError("--n must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (sampling.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (idk_markers.empty()) throw ConfigError("idk_markers must be non-empty");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
}

ordered_json ToJson(const DecoderConfig& config) {
  ordered_json out;
  out["method"] = MethodName(config.method);
  out["n"] = config.n;
  out["temperature"] = config.temperature;
  out["aggregator"] = AggregatorName(config.aggregator);
  out["sample_prompt"] = PromptKindName(config.sample_prompt);
  out["fallback"] =
      config.fallback == AggregatorFallback::kMajority ? "majority" : "error";
  out["max_tokens"] = config.sampling.max_tokens;
  out["stop"] = config.sampling.stop_sequences;
  out["idk_markers"] = config.idk_markers;
  return out;
}

DecoderConfig DecoderConfigFromJson(const json& in) {
  DecoderConfig config;
  try {
    if (in.contains("method")) {
      const auto name = in.at("method").get<std::string>();
      const auto method = ParseMethod(name);
      if (!method) throw ConfigError("unknown method '" + name + "'");
      config.method = *method;
    }
    config.n = in.value("n", config.n);
    config.temperature = in.value("temperature", config.temperature);
    if (in.contains("aggregator")) {
      const auto name = in.at("aggregator").get<std::string>();
      const auto aggregator = ParseAggregator(name);
      if (!aggregator) throw ConfigError("unknown aggregator '" + name + "'");
      config.aggregator = *aggregator;
    }
    if (in.contains("sample_prompt")) {
      const auto name = in.at("sample_prompt").get<std::string>();
      const auto kind = ParsePromptKind(name);
      if (!kind) throw ConfigError("unknown prompt kind '" + name + "'");
      config.sample_prompt = *kind;
    }
    if (in.contains("fallback")) {
      const auto name = in.at("fallback").get<std::string>();
      if (name == "majority") {
        config.fallback = AggregatorFallback::kMajority;
      } else if (name == "error") {
        config.fallback = AggregatorFallback::kError;
      } else {
        throw ConfigError("unknown fallback '" + name + "'");
      }
    }
    config.sampling.max_tokens =
        in.value("max_tokens", config.sampling.max_tokens);
    if (in.contains("stop")) {
      config.sampling.stop_sequences =
          in.at("stop").get<std::vector<std::string>>();
    }
    if (in.contains("idk_markers")) {
      config.idk_markers = in.at("idk_markers").get<std::vector<std::string>>();
    }
    config.parallelism = in.value("parallelism", config.parallelism);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad decoder config: ") + e.what());
  }
  config.Validate();
  return config;
}

Prediction DecodeExample(const QAExample& example, const LlmGateway& llm,
                         const DecoderConfig& config) {
  const std::string_view method = MethodName(config.method);
  try {
    switch (config.method) {
      case DecodeMethod::kGreedy:
      case DecodeMethod::kIdk:
      case DecodeMethod::kIdkUncertain:
      case DecodeMethod::kIdkAgg: {
        const SampleSet samples =
            SampleResponses(llm, example.question, 1, 0.0,
                            PromptFor(config.method), config.sampling);
        Prediction p = FromOutcome(example.id, method,
                                   AggregateIdentity(samples),
                                   config.idk_markers);
        p.samples = samples.responses;
        return p;
      }
      case DecodeMethod::kSelfConsistency: {
        const SampleSet samples =
            SampleResponses(llm, example.question, config.n,
                            config.temperature, config.sample_prompt,
                            config.sampling);
        Prediction p = FromOutcome(example.id, method,
                                   AggregateMajority(samples),
                                   config.idk_markers);
        p.samples = samples.responses;
        p.metadata["n"] = config.n;
        p.metadata["temperature"] = config.temperature;
        return p;
      }
      case DecodeMethod::kDrag: {
        DragOptions options;
        options.n = config.n;
        options.temperature = config.temperature;
        options.aggregator = config.aggregator;
        options.sample_prompt = config.sample_prompt;
        options.sampling = config.sampling;
        options.llm_aggregator.idk_markers = config.idk_markers;
        options.llm_aggregator.fallback = config.fallback;
        options.llm_aggregator.sampling = config.sampling;
        return Drag(example.id, example.question, llm, options);
      }
    }
  } catch (const RefusalError& e) {
    Prediction p = Prediction::Answer(example.id, std::string(method), "");
    p.metadata["error"] = std::string("refusal: ") + e.what();
    return p;
  }
  throw ConfigError("unknown decoding method");
}

std::vector<Prediction> DecodeDataset(
    std::span<const QAExample> examples, const LlmGateway& llm,
    const DecoderConfig& config,
    const std::function<void(const Prediction&)>& on_prediction) {
  config.Validate();
  std::vector<std::optional<Prediction>> slots(examples.size());
  std::mutex mutex;
  size_t emitted = 0;
  auto emit_ready = [&] {
    while (emitted < slots.size() && slots[emitted]) {
      if (on_prediction) on_prediction(*slots[emitted]);
      ++emitted;
    }
  };
  try {
    internal::ParallelFor(examples.size(), config.parallelism, [&](size_t i) {
      try {
        Prediction p = DecodeExample(examples[i], llm, config);
        std::lock_guard lock(mutex);
        slots[i] = std::move(p);
        emit_ready();
      } catch (const Error& e) {
        RethrowWithPrefix(e, "example " + examples[i].id + ": ");
      }
    });
  } catch (...) {
    std::lock_guard lock(mutex);
    emit_ready();
    throw;
  }
  std::vector<Prediction> predictions;
  predictions.reserve(slots.size());
  for (auto& slot : slots) predictions.push_back(std::move(*slot));
  return predictions;
}

}  // namespace granola
