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

#include "granola/kg.h"

#include <charconv>
#include <fstream>
#include <thread>

#include "granola/dataset.h"
#include "granola/errors.h"
#include "http.h"

namespace granola {
namespace {

using nlohmann::json;

KgEntity EntityFromJson(const json& in) {
  KgEntity entity;
  entity.qid = in.at("qid").get<std::string>();
  entity.label = in.value("label", std::string());
  entity.description = in.value("description", std::string());
  if (!IsValidQid(entity.qid)) {
    throw ConfigError("fixture qid '" + entity.qid + "' is malformed");
  }
  return entity;
}

}  // namespace

uint64_t KgEntity::QidNumber() const {
  if (!IsValidQid(qid)) throw DataError("malformed qid '" + qid + "'");
  uint64_t value = 0;
  std::from_chars(qid.data() + 1, qid.data() + qid.size(), value);
  return value;
}

FixtureKnowledgeGraph::FixtureKnowledgeGraph(
    std::map<std::string, std::vector<KgEntity>, std::less<>> entries)
    : entries_(std::move(entries)) {
  for (const auto& [surface, candidates] : entries_) {
    for (const auto& candidate : candidates) {
      // A qid may be listed under several surfaces; keep a non-empty text.
      auto& description = descriptions_[candidate.qid];
      if (description.empty()) description = candidate.description;
    }
  }
}

FixtureKnowledgeGraph FixtureKnowledgeGraph::FromJson(const json& in) {
  if (!in.is_object()) throw ConfigError("KG fixture must be a JSON object");
  std::map<std::string, std::vector<KgEntity>, std::less<>> entries;
  try {
    for (const auto& [surface, candidates] : in.items()) {
      auto& list = entries[surface];
      for (const json& candidate : candidates) {
        list.push_back(EntityFromJson(candidate));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad KG fixture: ") + e.what());
  }
  return FixtureKnowledgeGraph(std::move(entries));
}

std::unique_ptr<FixtureKnowledgeGraph> FixtureKnowledgeGraph::FromFile(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open KG fixture '" + path.string() + "'");
  try {
    return std::make_unique<FixtureKnowledgeGraph>(FromJson(json::parse(in)));
  } catch (const json::parse_error& e) {
    throw ConfigError("KG fixture '" + path.string() + "': " + e.what());
  }
}

std::vector<KgEntity> FixtureKnowledgeGraph::Search(std::string_view surface) {
  auto it = entries_.find(surface);
  if (it == entries_.end()) return {};
  return it->second;
}

std::optional<std::string> FixtureKnowledgeGraph::Describe(
    std::string_view qid) {
  auto it = descriptions_.find(qid);
  if (it == descriptions_.end()) return std::nullopt;
  return it->second;
}

WikidataClient::WikidataClient(WikidataConfig config,
                               std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  if (!limiter_) limiter_ = std::make_shared<RateLimiter>(4, 0.0);
}

json WikidataClient::Get(
    const std::vector<std::pair<std::string, std::string>>& params) {
  auto backoff = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      internal::HttpResponse response;
      {
        auto permit = limiter_->Acquire();
        response =
            internal::HttpGet(config_.api_url, params, config_.timeout_seconds);
      }
      if (response.status == 429 || response.status >= 500) {
        throw TransportError("knowledge graph returned HTTP " +
                             std::to_string(response.status));
      }
      if (response.status != 200) {
        throw ProviderError("knowledge graph returned HTTP " +
                                std::to_string(response.status),
                            /*retryable=*/false);
      }
      try {
        return json::parse(response.body);
      } catch (const json::parse_error& e) {
        throw TransportError(std::string("unparseable KG response: ") +
                             e.what());
      }
    } catch (const TransportError&) {
      if (attempt >= config_.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::vector<KgEntity> WikidataClient::Search(std::string_view surface) {
  const json response = Get({{"action", "wbsearchentities"},
                             {"search", std::string(surface)},
                             {"language", "en"},
                             {"uselang", "en"},
                             {"type", "item"},
                             {"limit", std::to_string(config_.search_limit)},
                             {"format", "json"}});
  std::vector<KgEntity> candidates;
  auto it = response.find("search");
  if (it == response.end() || !it->is_array()) return candidates;
  for (const json& hit : *it) {
    KgEntity entity;
    entity.qid = hit.value("id", std::string());
    if (!IsValidQid(entity.qid)) continue;
    entity.label = hit.value("label", std::string());
    entity.description = hit.value("description", std::string());
    candidates.push_back(std::move(entity));
  }
  return candidates;
}

std::optional<std::string> WikidataClient::Describe(std::string_view qid) {
  const json response = Get({{"action", "wbgetentities"},
                             {"ids", std::string(qid)},
                             {"props", "descriptions"},
                             {"languages", "en"},
                             {"format", "json"}});
  const json* entity = nullptr;
  if (auto entities = response.find("entities"); entities != response.end()) {
    if (auto e = entities->find(std::string(qid)); e != entities->end()) {
      entity = &*e;
    }
  }
  if (entity == nullptr || entity->contains("missing")) return std::nullopt;
  auto descriptions = entity->find("descriptions");
  if (descriptions == entity->end()) return std::string();
  auto en = descriptions->find("en");
  if (en == descriptions->end()) return std::string();
  return en->value("value", std::string());
}

std::unique_ptr<KnowledgeGraph> MakeKnowledgeGraph(
    const std::string& spec, std::shared_ptr<RateLimiter> limiter) {
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    WikidataConfig config;
    config.api_url = spec;
    return std::make_unique<WikidataClient>(config, std::move(limiter));
  }
  return FixtureKnowledgeGraph::FromFile(spec);
}

}  // namespace granola
