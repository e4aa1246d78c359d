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

#include "granola/llm.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "granola/errors.h"
#include "http.h"

namespace granola {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

std::string_view Trim(std::string_view text) {
  while (!text.empty() && IsAsciiSpace(text.front())) text.remove_prefix(1);
  while (!text.empty() && IsAsciiSpace(text.back())) text.remove_suffix(1);
  return text;
}

}  // namespace

void GenerationRequest::Validate() const {
  if (num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be a finite value >= 0");
  }
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
}

std::string Sha256Hex(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorKind::kConfig, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0x0F]);
  }
  return hex;
}

// ---------------------------------------------------------------------------
// MockProvider

MockProvider::MockProvider(Script script, uint64_t seed)
    : script_(std::move(script)), seed_(seed) {
  for (const auto& [key, entries] : script_) {
    if (entries.empty()) {
      throw ConfigError("mock script entry '" + key + "' has no responses");
    }
  }
}

MockProvider::Script MockProvider::ParseScript(const json& in) {
  if (!in.is_object()) throw ConfigError("mock script must be a JSON object");
  Script script;
  for (const auto& [key, value] : in.items()) {
    if (!value.is_array()) {
      throw ConfigError("mock script entry '" + key + "' must be an array");
    }
    std::vector<Entry> entries;
    for (const json& item : value) {
      if (item.is_string()) {
        entries.emplace_back(item.get<std::string>());
      } else if (item.is_object() && item.contains("refusal")) {
        entries.emplace_back(Refusal{item.at("refusal").get<std::string>()});
      } else {
        throw ConfigError("mock script entry '" + key +
                          "' holds an unsupported response");
      }
    }
    script.emplace(key, std::move(entries));
  }
  return script;
}

std::unique_ptr<MockProvider> MockProvider::FromFile(
    const std::filesystem::path& path, uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script '" + path.string() + "'");
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("mock script '" + path.string() + "': " + e.what());
  }
  return std::make_unique<MockProvider>(ParseScript(parsed), seed);
}

const std::vector<MockProvider::Entry>& MockProvider::Lookup(
    const std::string& prompt) const {
  if (auto it = script_.find(prompt); it != script_.end()) return it->second;
  const std::string digest = Sha256Hex(prompt);
  if (auto it = script_.find(digest); it != script_.end()) return it->second;
  if (auto it = script_.find("*"); it != script_.end()) return it->second;
  throw ProviderError("mock script has no entry for prompt sha256=" + digest,
                      /*retryable=*/false);
}

std::vector<std::string> MockProvider::Generate(
    const GenerationRequest& request) {
  const auto& entries = Lookup(request.prompt);
  const size_t size = entries.size();
  const size_t offset =
      request.temperature == 0.0 ? 0 : static_cast<size_t>(seed_ % size);
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(request.num_samples));
  for (int i = 0; i < request.num_samples; ++i) {
    const size_t index =
        request.temperature == 0.0 ? 0 : (offset + static_cast<size_t>(i)) % size;
    const Entry& entry = entries[index];
    if (const auto* refusal = std::get_if<Refusal>(&entry)) {
      throw RefusalError(refusal->message);
    }
    out.push_back(std::get<std::string>(entry));
  }
  return out;
}

// ---------------------------------------------------------------------------
// HttpProvider

HttpProvider::HttpProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
  if (config_.url.empty()) throw ConfigError("http provider needs a url");
}

std::vector<std::string> HttpProvider::Generate(
    const GenerationRequest& request) {
  ordered_json body;
  if (!config_.model.empty()) body["model"] = config_.model;
  body["prompt"] = request.prompt;
  body["temperature"] = request.temperature;
  body["n"] = request.num_samples;
  body["max_tokens"] = request.max_tokens;
  body["stop"] = request.stop_sequences;

  internal::HttpHeaders headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr) {
      throw ConfigError("environment variable " + config_.api_key_env +
                        " is not set");
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  const internal::HttpResponse response = internal::HttpPostJson(
      config_.url, headers, body.dump(), config_.timeout_seconds);

  const int status = response.status;
  if (status == 408 || status == 429 || status >= 500) {
    throw TransportError("provider returned HTTP " + std::to_string(status));
  }
  if (status >= 400) {
    throw RefusalError("provider returned HTTP " + std::to_string(status) +
                       ": " + response.body);
  }
  json parsed;
  try {
    parsed = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("unparseable provider response: ") +
                         e.what());
  }
  std::vector<std::string> out;
  try {
    if (parsed.contains("responses")) {
      out = parsed.at("responses").get<std::vector<std::string>>();
    } else if (parsed.contains("choices")) {
      for (const json& choice : parsed.at("choices")) {
        if (choice.value("finish_reason", "") == "content_filter") {
          throw RefusalError("provider filtered the completion");
        }
        out.push_back(choice.at("text").get<std::string>());
      }
    } else {
      throw TransportError("provider response has neither 'responses' nor "
                           "'choices'");
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed provider response: ") +
                         e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// RateLimiter

RateLimiter::RateLimiter(int max_in_flight, double requests_per_second)
    : max_in_flight_(max_in_flight),
      interval_(requests_per_second > 0.0
                    ? std::chrono::nanoseconds(static_cast<int64_t>(
                          1e9 / requests_per_second))
                    : std::chrono::nanoseconds(0)),
      next_start_(std::chrono::steady_clock::now()) {
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (requests_per_second < 0.0) {
    throw ConfigError("requests_per_second must be >= 0");
  }
}

RateLimiter::Permit RateLimiter::Acquire() {
  std::chrono::steady_clock::time_point start;
  {
    std::unique_lock lock(mutex_);
    released_.wait(lock, [this] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
    const auto now = std::chrono::steady_clock::now();
    start = std::max(now, next_start_);
    next_start_ = start + interval_;
  }
  std::this_thread::sleep_until(start);
  return Permit(this);
}

void RateLimiter::Release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  released_.notify_one();
}

int RateLimiter::peak_in_flight() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

// ---------------------------------------------------------------------------
// LlmGateway

std::string PostProcessResponse(std::string_view raw,
                                const std::vector<std::string>& stops) {
  std::string_view text = Trim(raw);
  size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  return std::string(Trim(text.substr(0, cut)));
}

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider,
                       GatewayConfig config)
    : LlmGateway(provider, config,
                 std::make_shared<RateLimiter>(config.max_in_flight,
                                               config.requests_per_second)) {}

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider,
                       GatewayConfig config,
                       std::shared_ptr<RateLimiter> limiter)
    : provider_(std::move(provider)),
      config_(config),
      limiter_(std::move(limiter)) {
  if (!provider_) throw ConfigError("gateway needs a provider");
  if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

std::vector<std::string> LlmGateway::CallWithRetry(
    const GenerationRequest& request) const {
  auto backoff = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      auto permit = limiter_->Acquire();
      return provider_->Generate(request);
    } catch (const TransportError& e) {
      if (attempt >= config_.max_retries) {
        throw TransportError(std::string(e.what()) + " (gave up after " +
                             std::to_string(attempt + 1) + " attempts)");
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(static_cast<int64_t>(
        static_cast<double>(backoff.count()) * config_.backoff_multiplier));
  }
}

std::vector<std::string> LlmGateway::Generate(
    const GenerationRequest& request) const {
  request.Validate();
  GenerationRequest upstream = request;
  const bool greedy = request.temperature == 0.0;
  if (greedy) upstream.num_samples = 1;
  std::vector<std::string> raw = CallWithRetry(upstream);
  if (raw.size() != static_cast<size_t>(upstream.num_samples)) {
    throw ProviderError("provider '" + provider_->Name() + "' returned " +
                            std::to_string(raw.size()) + " samples, expected " +
                            std::to_string(upstream.num_samples),
                        /*retryable=*/false);
  }
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(request.num_samples));
  for (const auto& response : raw) {
    out.push_back(PostProcessResponse(response, request.stop_sequences));
  }
  if (greedy) out.resize(static_cast<size_t>(request.num_samples), out.front());
  return out;
}

// ---------------------------------------------------------------------------
// ModelConfig

ModelConfig ModelConfigFromJson(const json& in,
                                const std::filesystem::path& base_dir) {
  ModelConfig config;
  try {
    config.provider = in.value("provider", std::string("mock"));
    if (config.provider == "mock") {
      if (in.contains("script")) {
        std::filesystem::path script = in.at("script").get<std::string>();
        config.script = script.is_absolute() ? script : base_dir / script;
      }
    } else if (config.provider == "http") {
      config.http.url = in.at("url").get<std::string>();
      config.http.model = in.value("model", std::string());
      config.http.api_key_env = in.value("api_key_env", std::string());
      config.http.timeout_seconds = in.value("timeout_s", 60.0);
    } else {
      throw ConfigError("unknown provider '" + config.provider + "'");
    }
    config.gateway.max_in_flight = in.value("max_in_flight", 4);
    config.gateway.requests_per_second = in.value("requests_per_second", 0.0);
    config.gateway.max_retries = in.value("max_retries", 3);
    config.gateway.initial_backoff =
        std::chrono::milliseconds(in.value("backoff_ms", 200));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  return config;
}

ModelConfig LoadModelConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config '" + path.string() + "'");
  try {
    return ModelConfigFromJson(json::parse(in), path.parent_path());
  } catch (const json::parse_error& e) {
    throw ConfigError("model config '" + path.string() + "': " + e.what());
  }
}

ordered_json ToJson(const ModelConfig& config) {
  ordered_json out;
  out["provider"] = config.provider;
  if (config.provider == "mock") {
    out["script"] = config.script.string();
  } else {
    out["url"] = config.http.url;
    out["model"] = config.http.model;
    out["api_key_env"] = config.http.api_key_env;
    out["timeout_s"] = config.http.timeout_seconds;
  }
  out["max_in_flight"] = config.gateway.max_in_flight;
  out["requests_per_second"] = config.gateway.requests_per_second;
  out["max_retries"] = config.gateway.max_retries;
  out["backoff_ms"] = config.gateway.initial_backoff.count();
  return out;
}

std::shared_ptr<LlmGateway> MakeGateway(const ModelConfig& config,
                                        uint64_t seed) {
  std::shared_ptr<LlmProvider> provider;
  if (config.provider == "mock") {
    if (config.script.empty()) {
      throw ConfigError("mock provider needs a script (--mock-llm)");
    }
    provider = MockProvider::FromFile(config.script, seed);
  } else {
    provider = std::make_shared<HttpProvider>(config.http);
  }
  return std::make_shared<LlmGateway>(std::move(provider), config.gateway);
}

}  // namespace granola
