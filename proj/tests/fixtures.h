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

// Scripted mock-model scenarios shared by unit and acceptance tests. Every
// fixture is built in code so mock scripts stay keyed by the exact rendered
// prompts.

#ifndef GRANOLA_TESTS_FIXTURES_H_
#define GRANOLA_TESTS_FIXTURES_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/dataset.h"
#include "granola/enrichment.h"
#include "granola/prompts.h"
#include "test_util.h"

namespace granola::testing {

inline std::string VanillaPrompt(const std::string& question) {
  return RenderPrompt(PromptKind::kVanilla, {{"question", question}});
}

inline std::string AggregationPrompt(const std::string& question,
                                     const std::vector<std::string>& samples) {
  return RenderPrompt(PromptKind::kAggregation,
                      {{"question", question}, {"responses", samples}});
}

// Scripts `samples` for the question and the aggregator's reply for every
// rotation of them, so any mock seed sees a scripted aggregation prompt.
inline void ScriptDragQuestion(nlohmann::json& script,
                               const std::string& question,
                               const std::vector<std::string>& samples,
                               const std::string& aggregate) {
  script[VanillaPrompt(question)] = samples;
  for (size_t shift = 0; shift < samples.size(); ++shift) {
    std::vector<std::string> rotated;
    for (size_t i = 0; i < samples.size(); ++i) {
      rotated.push_back(samples[(shift + i) % samples.size()]);
    }
    script[AggregationPrompt(question, rotated)] = {aggregate};
  }
}

struct Place {
  const char* city;
  const char* country;
  const char* continent;
};

inline const std::vector<Place>& Places() {
  static const std::vector<Place> places = {
      {"Hamburg", "Germany", "Europe"},     {"Lyon", "France", "Europe"},
      {"Osaka", "Japan", "Asia"},           {"Porto", "Portugal", "Europe"},
      {"Calgary", "Canada", "North America"}, {"Cusco", "Peru", "South America"},
      {"Pune", "India", "Asia"},            {"Perth", "Australia", "Oceania"},
      {"Seville", "Spain", "Europe"},       {"Mombasa", "Kenya", "Africa"}};
  return places;
}

// Other cities in the same country as Places()[i].
inline std::vector<std::string> WrongCities(size_t i) {
  static const std::vector<std::vector<std::string>> cities = {
      {"Bonn", "Berlin", "Munich", "Cologne"},
      {"Paris", "Nice", "Lille", "Nantes"},
      {"Kyoto", "Tokyo", "Nagoya", "Sapporo"},
      {"Lisbon", "Braga", "Faro", "Coimbra"},
      {"Toronto", "Ottawa", "Halifax", "Regina"},
      {"Lima", "Arequipa", "Trujillo", "Piura"},
      {"Delhi", "Mumbai", "Chennai", "Kolkata"},
      {"Sydney", "Hobart", "Darwin", "Adelaide"},
      {"Madrid", "Bilbao", "Valencia", "Malaga"},
      {"Nairobi", "Kisumu", "Nakuru", "Eldoret"}};
  return cities[i % cities.size()];
}

enum class Knowledge { kFine, kCoarse, kNone };

struct Scenario {
  std::vector<QAExample> examples;
  nlohmann::json script = nlohmann::json::object();
};

// Adds one "Where was <person> born?" example whose model behaviour is
// scripted according to `knowledge`:
//   kFine:   every sample names the right city; the aggregate is that city.
//   kCoarse: greedy and samples name different wrong cities of the right
//            country; the aggregator answers with the country.
//   kNone:   samples span unrelated countries; the aggregator abstains.
inline void AddScenarioExample(Scenario& scenario, const std::string& id,
                               size_t place_index, Knowledge knowledge,
                               std::optional<int64_t> popularity) {
  const Place& place = Places()[place_index % Places().size()];
  const std::string question = "Where was Person " + id + " born?";
  QAExample example = MakeExample(
      id, {{place.city}, {place.country}, {place.continent}}, popularity,
      "P19", question);
  example.entity.surface = "Person " + id;
  scenario.examples.push_back(example);

  std::vector<std::string> samples;
  std::string aggregate;
  switch (knowledge) {
    case Knowledge::kFine:
      samples.assign(5, place.city);
      aggregate = place.city;
      break;
    case Knowledge::kCoarse: {
      const auto wrong = WrongCities(place_index);
      samples = {wrong[0], wrong[1], wrong[2], wrong[3], wrong[0]};
      aggregate = place.country;
      break;
    }
    case Knowledge::kNone: {
      samples = {"Quito", "Oslo", "Hanoi", "Dakar", "Reno"};
      aggregate = "IDK";
      break;
    }
  }
  ScriptDragQuestion(scenario.script, question, samples, aggregate);
}

// 50 questions: 10 known at the finest level, 30 known only coarsely, 10
// unknown.
inline Scenario CoarseKnowerScenario() {
  Scenario scenario;
  for (int i = 0; i < 50; ++i) {
    const Knowledge knowledge = i < 10   ? Knowledge::kFine
                                : i < 40 ? Knowledge::kCoarse
                                         : Knowledge::kNone;
    AddScenarioExample(scenario, "ck" + std::to_string(i),
                       static_cast<size_t>(i), knowledge, std::nullopt);
  }
  return scenario;
}

// Five popularity tiers of 20 questions. Fine knowledge falls from 16 to 4
// questions per tier from the most to the least popular tier, while coarse
// knowledge fills most of the gap.
inline Scenario PopularityScenario() {
  Scenario scenario;
  const int fine[5] = {16, 13, 10, 7, 4};
  const int none[5] = {1, 1, 2, 2, 3};
  int serial = 0;
  for (int tier = 0; tier < 5; ++tier) {
    // Tier 0 is the most popular.
    const int64_t base = (5 - tier) * 10000;
    for (int j = 0; j < 20; ++j) {
      const Knowledge knowledge = j < fine[tier]             ? Knowledge::kFine
                                  : j < 20 - none[tier] ? Knowledge::kCoarse
                                                             : Knowledge::kNone;
      AddScenarioExample(scenario, "pop" + std::to_string(serial),
                         static_cast<size_t>(serial), knowledge, base + j);
      ++serial;
    }
  }
  return scenario;
}

struct EnrichmentFixture {
  std::vector<SourceRow> rows;
  nlohmann::json kg = nlohmann::json::object();
  nlohmann::json script = nlohmann::json::object();
  std::map<std::string, std::string> expected_status;
  // Rows whose judged "No" fraction exceeds one half.
  std::set<std::string> expected_inconsistent;
};

inline std::string JudgePrompt(const std::string& question,
                               const std::string& entity,
                               const std::string& description) {
  return RenderPrompt(PromptKind::kConsistencyJudge,
                      {{"question", question},
                       {"entity", entity},
                       {"description", description}});
}

inline std::string EnrichmentPrompt(const std::string& question,
                                    const std::string& answer,
                                    const std::string& question_description,
                                    const std::string& answer_description) {
  return RenderPrompt(PromptKind::kEnrichment,
                      {{"question", question},
                       {"answer", answer},
                       {"question_description", question_description},
                       {"answer_description", answer_description}});
}

// Twenty source rows covering every pipeline outcome.
inline EnrichmentFixture BuildEnrichmentFixture() {
  EnrichmentFixture f;
  struct Spec {
    const char* relation;
    const char* entity;
    const char* answer;
    // Judge replies for the question and the answer entity.
    std::vector<std::string> question_judge;
    std::vector<std::string> answer_judge;
    const char* generation;
    const char* status;
  };
  const std::vector<std::string> yes(5, "Yes");
  const std::vector<Spec> specs = {
      {"P19", "Fiona Lewis", "Westcliff-on-Sea", yes, yes,
       "1:: Westcliff-on-Sea\n2:: Essex\n3:: England\n4:: a person", "ok"},
      {"P19", "Michael Madhusudan Dutta", "Jessore", yes, yes,
       "1:: Jessore\n2:: Bengal\n3:: British India", "ok"},
      {"P264", "Courage", "Rock Records", yes, yes,
       "1:: Rock Records\n2:: a Taiwanese record label", "ok"},
      {"P20", "Ada Lovelace", "Marylebone", yes, yes,
       "1:: Marylebone\n2:: London\n3:: london\n4:: England", "ok"},
      {"P69", "Alan Turing", "King's College", yes, yes,
       "1:: King's College\n2:: University of Cambridge\n3:: university",
       "ok"},
      {"P50", "Enduring Love", "Ian McEwan",
       {"No", "No", "No", "Yes", "Yes"}, yes,
       "1:: Ian McEwan\n2:: a British novelist", "filtered_inconsistent"},
      {"P175", "Orbit", "Roger Hodgson", yes,
       {"No", "No", "No", "No", "No"},
       "1:: Roger Hodgson\n2:: a musician", "filtered_inconsistent"},
      {"P50", "Hollywood", "Gore Vidal",
       {"No", "No", "Yes", "Yes", "Yes"}, {"No", "Yes", "Yes", "Yes", "Yes"},
       "1:: Gore Vidal\n2:: an American writer", "ok"},
      {"P112", "Acme Widgets", "Jane Roe", yes, yes,
       "Jane Roe founded it.", "parse_failed"},
      {"P112", "Blue Harbor", "John Doe", yes, yes,
       "2:: a businessman\n3:: person", "parse_failed"},
      {"P19", "Nobody Known", "Atlantis", yes, yes, "", "missing_description"},
      {"P30", "Kenya", "Africa", yes, yes, "", "relation_excluded"},
      {"P127", "Tower Mall", "Zed Holdings", yes, yes,
       "1:: Zed Holdings\n2:: a company\n3:: company", "ok"},
      {"P131", "Old Bridge", "Mostar", yes, yes,
       "1:: Mostar\n2:: Herzegovina\n3:: Bosnia and Herzegovina", "ok"},
      {"P159", "Nordic Air", "Oslo", yes, yes,
       "1:: Oslo\n2:: Norway\n3:: Scandinavia\n4:: Europe", "ok"},
      {"P176", "Roadster Z", "Zeta Motors", yes, yes,
       "1:: Zeta Motors\n2:: a German carmaker", "ok"},
      {"P170", "Blue Fox", "Ann Lee", {"Yes", "No", "Yes", "No", "Yes"}, yes,
       "1:: Ann Lee\n2:: an illustrator", "ok"},
      {"P26", "Grace Kelly", "Rainier III", yes,
       {"No", "No", "No", "Yes", "No"},
       "1:: Rainier III\n2:: a prince", "filtered_inconsistent"},
      {"P40", "Queen Anne", "Prince William", yes, yes,
       "1:: Prince William\n2:: a royal", "ok"}};

  const RelationTemplates templates = [] {
    RelationTemplates all;
    for (const auto& info : KnownRelations()) {
      all.emplace(std::string(info.relation),
                  std::string(info.question_template));
    }
    return all;
  }();

  int index = 0;
  for (const auto& spec : specs) {
    const std::string id = "row" + std::to_string(index);
    std::string question = templates.at(spec.relation);
    question.replace(question.find("[X]"), 3, spec.entity);
    f.rows.push_back({id, question, spec.relation, {spec.answer}});
    f.expected_status[id] = spec.status;
    const std::string status = spec.status;
    if (status == "filtered_inconsistent") f.expected_inconsistent.insert(id);

    const std::string entity_qid = "Q" + std::to_string(1000 + 2 * index);
    const std::string answer_qid = "Q" + std::to_string(1001 + 2 * index);
    const std::string entity_description =
        std::string("description of ") + spec.entity;
    const std::string answer_description =
        std::string("description of ") + spec.answer;
    if (status != "missing_description") {
      f.kg[spec.entity] = {
          {{"qid", "Q" + std::to_string(900000 + index)},
           {"description", "a decoy with a larger id"}},
          {{"qid", entity_qid}, {"description", entity_description}}};
      f.kg[spec.answer] = {
          {{"qid", answer_qid}, {"description", answer_description}}};
    }
    f.script[JudgePrompt(question, spec.entity, entity_description)] =
        spec.question_judge;
    f.script[JudgePrompt(question, spec.answer, answer_description)] =
        spec.answer_judge;
    if (spec.generation[0] != '\0') {
      f.script[EnrichmentPrompt(question, spec.answer, entity_description,
                                answer_description)] = {spec.generation};
    }
    ++index;
  }
  // A second ground truth makes the last row ambiguous; it is dropped up
  // front.
  f.rows.push_back({"row19", "Where was Fiona Lewis born?", "P19",
                    {"Westcliff-on-Sea", "Southend"}});
  f.expected_status["row19"] = "non_unique_ground_truth";
  return f;
}

}  // namespace granola::testing

#endif  // GRANOLA_TESTS_FIXTURES_H_
