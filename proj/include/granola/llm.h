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

// Provider-agnostic LLM access.
//
// Providers implement one batch call: a prompt plus the number of samples to
// draw. LlmGateway wraps a provider with concurrency and rate limits, retry
// with exponential backoff on transport failures, and response
// post-processing (trim, truncate at the first stop sequence).

#ifndef GRANOLA_LLM_H_
#define GRANOLA_LLM_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace granola {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int num_samples = 1;
  int max_tokens = 64;
  std::vector<std::string> stop_sequences;

  // Throws ConfigError.
  void Validate() const;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;

  // Returns exactly `request.num_samples` raw continuations or throws a
  // ProviderError. Must be safe to call concurrently.
  virtual std::vector<std::string> Generate(
      const GenerationRequest& request) = 0;

  virtual std::string Name() const = 0;
};

// Lowercase hex SHA-256 of `text`.
std::string Sha256Hex(std::string_view text);

// Scripted responses keyed by the exact prompt or its SHA-256 hex digest,
// with "*" as an optional catch-all. An entry may be a refusal marker.
//
// Greedy requests (temperature 0) always get the first scripted response.
// Sampled requests cycle through the script starting at `seed % size`, so
// the output depends only on (script, seed, prompt) and never on call order.
class MockProvider : public LlmProvider {
 public:
  struct Refusal {
    std::string message;
  };
  using Entry = std::variant<std::string, Refusal>;
  using Script = std::map<std::string, std::vector<Entry>, std::less<>>;

  MockProvider(Script script, uint64_t seed);

  // Script JSON: {"<prompt or sha256>": ["r1", "r2", {"refusal": "..."}]}.
  static Script ParseScript(const nlohmann::json& json);
  static std::unique_ptr<MockProvider> FromFile(
      const std::filesystem::path& path, uint64_t seed);

  std::vector<std::string> Generate(const GenerationRequest& request) override;
  std::string Name() const override { return "mock"; }

 private:
  const std::vector<Entry>& Lookup(const std::string& prompt) const;

  Script script_;
  uint64_t seed_;
};

struct HttpProviderConfig {
  // Full endpoint URL, e.g. "https://llm.example.com/v1/completions".
  std::string url;
  std::string model;
  // Name of the environment variable holding a bearer token; may be empty.
  std::string api_key_env;
  double timeout_seconds = 60.0;
};

// JSON-over-HTTP(S) provider.
//
// Request body: {"model", "prompt", "temperature", "n", "max_tokens",
// "stop"}. The response is either {"responses": [...]} or an
// OpenAI-completions style {"choices": [{"text": ..., "finish_reason": ...}]}.
// 408/429/5xx and connection failures are transport errors; other 4xx
// responses and "content_filter" finishes are refusals.
class HttpProvider : public LlmProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  std::vector<std::string> Generate(const GenerationRequest& request) override;
  std::string Name() const override { return "http"; }

 private:
  HttpProviderConfig config_;
};

// Caps in-flight requests and spaces request starts to at most
// `requests_per_second` (0 disables the rate limit). Shareable between the
// LLM gateway and knowledge-graph clients.
class RateLimiter {
 public:
  RateLimiter(int max_in_flight, double requests_per_second);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(other.owner_) {
      other.owner_ = nullptr;
    }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_ != nullptr) owner_->Release();
    }

   private:
    RateLimiter* owner_;
  };

  Permit Acquire();

  int max_in_flight() const { return max_in_flight_; }
  // Highest number of simultaneously held permits observed.
  int peak_in_flight() const;

 private:
  void Release();

  const int max_in_flight_;
  const std::chrono::nanoseconds interval_;
  mutable std::mutex mutex_;
  std::condition_variable released_;
  int in_flight_ = 0;
  int peak_ = 0;
  std::chrono::steady_clock::time_point next_start_;
};

struct GatewayConfig {
  int max_in_flight = 4;
  double requests_per_second = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
};

// Trims surrounding whitespace and cuts at the earliest stop sequence.
std::string PostProcessResponse(std::string_view raw,
                                const std::vector<std::string>& stops);

class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayConfig config);
  LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayConfig config,
             std::shared_ptr<RateLimiter> limiter);

  // Exactly `request.num_samples` post-processed responses. At temperature 0
  // the provider is asked for a single continuation which is replicated.
  std::vector<std::string> Generate(const GenerationRequest& request) const;

  const std::shared_ptr<RateLimiter>& limiter() const { return limiter_; }
  LlmProvider& provider() const { return *provider_; }

 private:
  std::vector<std::string> CallWithRetry(
      const GenerationRequest& request) const;

  std::shared_ptr<LlmProvider> provider_;
  GatewayConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
};

// Model configuration file, e.g.
//   {"provider": "mock", "script": "script.json", "seed": 0}
//   {"provider": "http", "url": "...", "model": "...", "api_key_env": "KEY",
//    "max_in_flight": 4, "requests_per_second": 2, "max_retries": 3,
//    "backoff_ms": 200}
struct ModelConfig {
  std::string provider = "mock";
  std::filesystem::path script;
  HttpProviderConfig http;
  GatewayConfig gateway;
};

// Relative script paths are resolved against `base_dir`.
ModelConfig ModelConfigFromJson(const nlohmann::json& json,
                                const std::filesystem::path& base_dir);
ModelConfig LoadModelConfig(const std::filesystem::path& path);
nlohmann::ordered_json ToJson(const ModelConfig& config);

std::shared_ptr<LlmGateway> MakeGateway(const ModelConfig& config,
                                        uint64_t seed);

}  // namespace granola

#endif  // GRANOLA_LLM_H_
