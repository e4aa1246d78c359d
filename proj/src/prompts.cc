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

#include "granola/prompts.h"

#include <array>

#include "granola/errors.h"

namespace granola {
namespace {

constexpr std::string_view kVanilla =
    "Question: {question}\n"
    "Answer:";

constexpr std::string_view kIdk =
    "You will be given a question. Answer the question, or output IDK. "
    "Question: {question}\n"
    "Answer:";

constexpr std::string_view kIdkIfUncertain =
    "You will be given a question. Answer the question, or, if you are not "
    "certain of the answer, output IDK.\n"
    "Question: {question}\n"
    "Answer:";

constexpr std::string_view kIdkWithAggregation =
    "You will be given a question. Answer the question at a level of "
    "granularity that fits your uncertainty, or output IDK.\n"
    "Question: {question}\n"
    "Answer:";

constexpr std::string_view kAggregation =
    "You will be given a list of responses; replace them with the most "
    "specific answer that is still consistent with all the original "
    "responses. If the responses have nothing meaningful in common with "
    "respect to the question, output IDK.\n"
    "Here are some examples:\n"
    "\n"
    "Question: Where was [X] born?\n"
    "Responses:\n"
    "- Hamburg\n"
    "- Hamburg\n"
    "- Bonn\n"
    "- Berlin\n"
    "Correct aggregated answer: Germany\n"
    "Incorrect aggregated answer: Hamburg\n"
    "Explanation: These are all different cities in Germany. Hamburg is not "
    "a correct aggregation, since it is not consistent with other responses, "
    "such as Berlin or Bonn.\n"
    "\n"
    "Question: When was [X] born?\n"
    "Responses:\n"
    "- February 1, 1937\n"
    "- November 20, 1937\n"
    "- January 1937\n"
    "Correct aggregated answer: 1937\n"
    "Incorrect aggregated answer: November 1937\n"
    "Explanation: These are all dates in 1937.\n"
    "\n"
    "Question: {question}\n"
    "Responses:\n"
    "{responses}\n"
    "Correct aggregated answer:";

constexpr std::string_view kEnrichment =
    "You will be given a pair of question and answer. You will also receive "
    "some additional description about the entity in the question and the "
    "entity in the answer.\n"
    "Your task is to write NEW ANSWERS for the original question at various "
    "levels of granularity. Number these answers starting from 1 (with 1 "
    "being the most fine grained answer -- the original answer), and larger "
    "indices corresponding to coarser answers.\n"
    "The idea is that someone might not know the answer at the most "
    "fine-grained level, but perhaps know the answer at coarser levels.\n"
    "Important: STOP generating answers BEFORE you reach trivial answers. "
    "For example, given the question \"who wrote the book X\", answers such "
    "as \"a writer\" or \"a person\" are considered trivial, as these are "
    "completely uninformative and can be guessed even without knowing what X "
    "is.\n"
    "In your answers, use the format '1:: answer', etc.\n"
    "\n"
    "Question: {question}\n"
    "Answer: {answer}\n"
    "Description of the entity in the question: {question_description}\n"
    "Description of the entity in the answer: {answer_description}\n"
    "Answers:";

// Five demonstrations: two consistent, three taken from known
// disambiguation failures.
constexpr std::string_view kConsistencyJudge =
    "You will be given a question, an entity mentioned in it, and a short "
    "description of a knowledge-base entry for that entity. Answer Yes if "
    "the description is consistent with the entity the question refers to, "
    "and No otherwise.\n"
    "\n"
    "Question: Where was Fiona Lewis born?\n"
    "Entity: Fiona Lewis\n"
    "Description: English actress\n"
    "Consistent: Yes\n"
    "\n"
    "Question: Who is the author of Enduring Love?\n"
    "Entity: Enduring Love\n"
    "Description: 2004 film by Roger Michell\n"
    "Consistent: No\n"
    "\n"
    "Question: Who translated the play Neel Darpan into English?\n"
    "Entity: Michael Madhusudan Dutta\n"
    "Description: Bengali poet and dramatist\n"
    "Consistent: Yes\n"
    "\n"
    "Question: Who performed Orbit?\n"
    "Entity: Orbit\n"
    "Description: historical motorcycle manufacturer\n"
    "Consistent: No\n"
    "\n"
    "Question: Who is the author of Hollywood?\n"
    "Entity: Hollywood\n"
    "Description: neighborhood in Los Angeles, California, United States\n"
    "Consistent: No\n"
    "\n"
    "Question: {question}\n"
    "Entity: {entity}\n"
    "Description: {description}\n"
    "Consistent:";

struct KindInfo {
  PromptKind kind;
  std::string_view name;
  std::string_view text;
};

constexpr std::array<KindInfo, 7> kKinds = {{
    {PromptKind::kVanilla, "vanilla", kVanilla},
    {PromptKind::kIdk, "idk", kIdk},
    {PromptKind::kIdkIfUncertain, "idk_if_uncertain", kIdkIfUncertain},
    {PromptKind::kIdkWithAggregation, "idk_with_aggregation",
     kIdkWithAggregation},
    {PromptKind::kAggregation, "aggregation", kAggregation},
    {PromptKind::kEnrichment, "enrichment", kEnrichment},
    {PromptKind::kConsistencyJudge, "consistency_judge", kConsistencyJudge},
}};

const KindInfo& Info(PromptKind kind) {
  for (const auto& info : kKinds) {
    if (info.kind == kind) return info;
  }
  throw ConfigError("unknown prompt kind");
}

bool IsPlaceholderChar(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

// Calls `literal(text)` and `placeholder(name)` in template order.
template <typename OnLiteral, typename OnPlaceholder>
void Scan(std::string_view text, OnLiteral literal, OnPlaceholder placeholder) {
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const size_t close = text.find('}', open + 1);
    if (close == std::string_view::npos) break;
    const std::string_view name = text.substr(open + 1, close - open - 1);
    bool valid = !name.empty();
    for (char c : name) valid = valid && IsPlaceholderChar(c);
    if (!valid) {
      literal(text.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    literal(text.substr(pos, open - pos));
    placeholder(name);
    pos = close + 1;
  }
  literal(text.substr(pos));
}

}  // namespace

std::string_view PromptKindName(PromptKind kind) { return Info(kind).name; }

std::optional<PromptKind> ParsePromptKind(std::string_view name) {
  for (const auto& info : kKinds) {
    if (info.name == name) return info.kind;
  }
  return std::nullopt;
}

std::string_view PromptTemplate(PromptKind kind) { return Info(kind).text; }

std::vector<std::string> PromptPlaceholders(PromptKind kind) {
  std::vector<std::string> names;
  Scan(
      PromptTemplate(kind), [](std::string_view) {},
      [&](std::string_view name) {
        for (const auto& existing : names) {
          if (existing == name) return;
        }
        names.emplace_back(name);
      });
  return names;
}

std::string RenderPrompt(PromptKind kind, const PromptSlots& slots) {
  std::string out;
  Scan(
      PromptTemplate(kind), [&](std::string_view text) { out += text; },
      [&](std::string_view name) {
        auto it = slots.find(name);
        if (it == slots.end()) throw TemplateError(std::string(name));
        if (const auto* text = std::get_if<std::string>(&it->second)) {
          out += *text;
          return;
        }
        const auto& items = std::get<std::vector<std::string>>(it->second);
        for (size_t i = 0; i < items.size(); ++i) {
          if (i > 0) out += '\n';
          out += "- ";
          out += items[i];
        }
      });
  return out;
}

}  // namespace granola
