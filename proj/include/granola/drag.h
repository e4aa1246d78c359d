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

// Decoding strategies: the prompt-only baselines (greedy, IDK variants),
// self-consistency, and decoding with response aggregation (DRAG).
//
// DRAG samples N responses at temperature T and then replaces them with the
// most specific answer consistent with all of them, or IDK. Self-consistency
// is the same pipeline with a majority-vote aggregator; N = 1 with the
// identity aggregator is plain decoding.

#ifndef GRANOLA_DRAG_H_
#define GRANOLA_DRAG_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/dataset.h"
#include "granola/llm.h"
#include "granola/prompts.h"

namespace granola {

struct SampleSet {
  std::string question;
  std::vector<std::string> responses;
  double temperature = 0.0;
  PromptKind prompt_kind = PromptKind::kVanilla;
};

enum class AggregatorKind { kLlm, kMajority, kIdentity };

std::string_view AggregatorName(AggregatorKind kind);
std::optional<AggregatorKind> ParseAggregator(std::string_view name);

struct AggregationOutcome {
  std::optional<std::string> answer;
  bool idk = false;
  AggregatorKind aggregator = AggregatorKind::kIdentity;
};

// Settings for the generation calls a decoder makes.
struct SamplingOptions {
  int max_tokens = 64;
  std::vector<std::string> stop_sequences = {"\n"};
};

// Throws ConfigError when n < 1 or temperature < 0.
SampleSet SampleResponses(const LlmGateway& llm, std::string_view question,
                          int n, double temperature, PromptKind prompt_kind,
                          const SamplingOptions& options = {});

// Groups responses by normalized form and returns the earliest raw response
// of the largest group; equal-size groups are ordered by first occurrence.
// Never abstains.
AggregationOutcome AggregateMajority(const SampleSet& samples);

// The first (for N = 1, the only) response, unchanged.
AggregationOutcome AggregateIdentity(const SampleSet& samples);

enum class AggregatorFallback { kError, kMajority };

struct LlmAggregatorOptions {
  std::vector<std::string> idk_markers = {"idk", "i dont know"};
  AggregatorFallback fallback = AggregatorFallback::kError;
  SamplingOptions sampling;
};

// One greedy call with the aggregation prompt over the sampled responses.
// Answers outside the sample set are accepted as they are.
AggregationOutcome AggregateLlm(const SampleSet& samples,
                                const LlmGateway& llm,
                                const LlmAggregatorOptions& options = {});

struct DragOptions {
  int n = 5;
  double temperature = 0.7;
  AggregatorKind aggregator = AggregatorKind::kLlm;
  PromptKind sample_prompt = PromptKind::kVanilla;
  LlmAggregatorOptions llm_aggregator;
  SamplingOptions sampling;
};

// Prediction with method "drag", the raw samples, and the outcome.
Prediction Drag(std::string_view example_id, std::string_view question,
                const LlmGateway& llm, const DragOptions& options);

enum class DecodeMethod {
  kGreedy,
  kIdk,
  kIdkUncertain,
  kIdkAgg,
  kSelfConsistency,
  kDrag,
};

std::string_view MethodName(DecodeMethod method);
std::optional<DecodeMethod> ParseMethod(std::string_view name);

struct DecoderConfig {
  DecodeMethod method = DecodeMethod::kGreedy;
  int n = 5;
  double temperature = 0.7;
  AggregatorKind aggregator = AggregatorKind::kLlm;
  PromptKind sample_prompt = PromptKind::kVanilla;
  AggregatorFallback fallback = AggregatorFallback::kError;
  SamplingOptions sampling;
  std::vector<std::string> idk_markers = {"idk", "i dont know"};
  int parallelism = 1;

  void Validate() const;
};

nlohmann::ordered_json ToJson(const DecoderConfig& config);
DecoderConfig DecoderConfigFromJson(const nlohmann::json& json);

// Refusals become an empty answer with the error kept in metadata; other
// provider errors propagate.
Prediction DecodeExample(const QAExample& example, const LlmGateway& llm,
                         const DecoderConfig& config);

// Decodes every example, in input order. `on_prediction`, if set, is called
// in input order as soon as each prefix of predictions is complete. On
// failure the error is rethrown with the failing example id prepended.
std::vector<Prediction> DecodeDataset(
    std::span<const QAExample> examples, const LlmGateway& llm,
    const DecoderConfig& config,
    const std::function<void(const Prediction&)>& on_prediction = {});

}  // namespace granola

#endif  // GRANOLA_DRAG_H_
