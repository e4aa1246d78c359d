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

// Knowledge-graph lookup: surface form -> candidate entities with short
// descriptions, and entity id -> English description.

#ifndef GRANOLA_KG_H_
#define GRANOLA_KG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "granola/llm.h"

namespace granola {

struct KgEntity {
  std::string qid;
  std::string label;
  std::string description;

  // Numeric part of the qid. Throws DataError for a malformed qid.
  uint64_t QidNumber() const;

  bool operator==(const KgEntity&) const = default;
};

class KnowledgeGraph {
 public:
  virtual ~KnowledgeGraph() = default;

  // Candidates in endpoint order; empty when nothing matches.
  virtual std::vector<KgEntity> Search(std::string_view surface) = 0;
  // English description, or nullopt when the entity is unknown.
  virtual std::optional<std::string> Describe(std::string_view qid) = 0;
};

// Offline fixture: {"<surface>": [{"qid": "Q64", "label": "Berlin",
// "description": "..."}]}.
class FixtureKnowledgeGraph : public KnowledgeGraph {
 public:
  explicit FixtureKnowledgeGraph(
      std::map<std::string, std::vector<KgEntity>, std::less<>> entries);

  static FixtureKnowledgeGraph FromJson(const nlohmann::json& json);
  static std::unique_ptr<FixtureKnowledgeGraph> FromFile(
      const std::filesystem::path& path);

  std::vector<KgEntity> Search(std::string_view surface) override;
  std::optional<std::string> Describe(std::string_view qid) override;

 private:
  std::map<std::string, std::vector<KgEntity>, std::less<>> entries_;
  std::map<std::string, std::string, std::less<>> descriptions_;
};

struct WikidataConfig {
  // MediaWiki API endpoint.
  std::string api_url = "https://www.wikidata.org/w/api.php";
  int search_limit = 10;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

// Uses the wbsearchentities and wbgetentities actions, language "en".
class WikidataClient : public KnowledgeGraph {
 public:
  WikidataClient(WikidataConfig config, std::shared_ptr<RateLimiter> limiter);

  std::vector<KgEntity> Search(std::string_view surface) override;
  std::optional<std::string> Describe(std::string_view qid) override;

 private:
  nlohmann::json Get(
      const std::vector<std::pair<std::string, std::string>>& params);

  WikidataConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
};

// `spec` is either an http(s) endpoint or a fixture path.
std::unique_ptr<KnowledgeGraph> MakeKnowledgeGraph(
    const std::string& spec, std::shared_ptr<RateLimiter> limiter);

}  // namespace granola

#endif  // GRANOLA_KG_H_
