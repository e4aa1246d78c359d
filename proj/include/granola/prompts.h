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

// Prompt templates for the decoding baselines, response aggregation,
// answer-level generation and the description consistency judge.
//
// Templates use `{name}` placeholders. A list-valued slot renders as one
// "- item" line per element.

#ifndef GRANOLA_PROMPTS_H_
#define GRANOLA_PROMPTS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace granola {

enum class PromptKind {
  kVanilla,
  kIdk,
  kIdkIfUncertain,
  kIdkWithAggregation,
  kAggregation,
  kEnrichment,
  kConsistencyJudge,
};

std::string_view PromptKindName(PromptKind kind);
std::optional<PromptKind> ParsePromptKind(std::string_view name);

using SlotValue = std::variant<std::string, std::vector<std::string>>;
using PromptSlots = std::map<std::string, SlotValue, std::less<>>;

// Raw template text for `kind`.
std::string_view PromptTemplate(PromptKind kind);

// Placeholder names used by `kind`, in order of first appearance.
std::vector<std::string> PromptPlaceholders(PromptKind kind);

// Throws TemplateError when a placeholder has no slot.
std::string RenderPrompt(PromptKind kind, const PromptSlots& slots);

}  // namespace granola

#endif  // GRANOLA_PROMPTS_H_
