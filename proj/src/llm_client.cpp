#include "gnas/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace gnas {
namespace {

using nlohmann::json;

class HttpBackend final : public LLMBackend {
 public:
  explicit HttpBackend(const LLMConfig& cfg) {
    cfg.validate();
    const char* key = std::getenv(cfg.api_key_env_var.c_str());
    if (!key || !*key)
      throw ConfigError("API key environment variable is not set: " + cfg.api_key_env_var);
    api_key_ = key;
  }

  std::string name() const override { return "http"; }
  bool deterministic() const override { return false; }

  std::string complete(const LLMConfig& cfg, const PromptBundle& prompt,
                       int& attempts_out) override {
    json payload;
    payload["model"] = cfg.model_name;
    payload["messages"] = json::array({
        json{{"role", "system"}, {"content", prompt.system_text}},
        json{{"role", "user"}, {"content", prompt.user_text}},
    });
    payload["temperature"] = cfg.temperature;
    if (cfg.max_tokens > 0) payload["max_tokens"] = cfg.max_tokens;
    const std::string body = payload.dump();

    httplib::Client client(cfg.endpoint_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout));
    client.set_read_timeout(cfg.timeout);
    client.set_write_timeout(cfg.timeout);
    client.set_bearer_token_auth(api_key_);

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
      attempts_out = attempt + 1;
      if (attempt > 0) {
        const auto delay = cfg.backoff * (1LL << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      httplib::Result res = client.Post(cfg.api_path, body, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;  // retryable
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;  // retryable
      }
      if (res->status < 200 || res->status >= 300)
        throw TransportError("non-retryable API error, HTTP status " +
                             std::to_string(res->status) + ": " + res->body);
      return extract_content(res->body);
    }
    throw TransportError("completion failed after " + std::to_string(cfg.retries + 1) +
                         " attempts; last error: " + last_error);
  }

 private:
  static std::string extract_content(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content"))
      throw TransportError("malformed chat-completion response: " + body.substr(0, 200));
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }

  std::string api_key_;
};

class ScriptedBackend final : public LLMBackend {
 public:
  explicit ScriptedBackend(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open playback script: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
      throw StructuralError("playback script must be a JSON array of strings: " + path.string());
    for (const json& entry : doc) {
      if (!entry.is_string())
        throw StructuralError("playback script entry is not a string: " + path.string());
      responses_.push_back(entry.get<std::string>());
    }
  }

  std::string name() const override { return "scripted"; }

  std::string complete(const LLMConfig&, const PromptBundle&, int& attempts_out) override {
    attempts_out = 1;
    if (next_ >= responses_.size())
      throw TransportError("playback script exhausted after " + std::to_string(responses_.size()) +
                           " responses");
    return responses_[next_++];
  }

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

class GreedyOracleBackend final : public LLMBackend {
 public:
  GreedyOracleBackend(const BenchmarkTable& table, const SearchSpace& space, int batch_size)
      : table_(table), space_(space), batch_size_(batch_size) {
    if (batch_size_ < 1) throw ContractError("mock backend batch size must be >= 1");
  }

  std::string name() const override { return "mock-greedy"; }

  std::string complete(const LLMConfig&, const PromptBundle&, int& attempts_out) override {
    attempts_out = 1;
    const OperationRegistry registry(space_.operations());
    const std::vector<MacroTopology> topo{space_.topology()};
    std::vector<Architecture> batch;
    for (const std::string& key : table_.rank_index()) {
      if (static_cast<int>(batch.size()) >= batch_size_) break;
      if (emitted_.count(key)) continue;
      emitted_.insert(key);
      batch.push_back(decode_architecture(key, registry, topo));
    }
    return format_architectures_for_llm(batch);
  }

 private:
  const BenchmarkTable& table_;
  const SearchSpace& space_;
  int batch_size_;
  std::unordered_set<std::string> emitted_;
};

class RandomMockBackend final : public LLMBackend {
 public:
  RandomMockBackend(const SearchSpace& space, std::uint64_t seed, int batch_size)
      : space_(space), rng_(seed), batch_size_(batch_size) {
    if (batch_size_ < 1) throw ContractError("mock backend batch size must be >= 1");
  }

  std::string name() const override { return "mock-random"; }

  std::string complete(const LLMConfig&, const PromptBundle&, int& attempts_out) override {
    attempts_out = 1;
    std::vector<Architecture> batch;
    batch.reserve(batch_size_);
    for (int i = 0; i < batch_size_; ++i) batch.push_back(random_architecture(space_, rng_));
    return format_architectures_for_llm(batch);
  }

 private:
  const SearchSpace& space_;
  Rng rng_;
  int batch_size_;
};

}  // namespace

void LLMConfig::validate() const {
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (retries < 0) throw ConfigError("retries must be >= 0");
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (backoff.count() < 0) throw ConfigError("backoff must be >= 0");
}

LLMClient::LLMClient(LLMBackend& backend, LLMConfig cfg) : backend_(backend), cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::string LLMClient::complete(const PromptBundle& prompt) {
  if (cfg_.min_request_interval.count() > 0 &&
      last_request_.time_since_epoch().count() != 0) {
    const auto elapsed = std::chrono::steady_clock::now() - last_request_;
    if (elapsed < cfg_.min_request_interval)
      std::this_thread::sleep_for(cfg_.min_request_interval - elapsed);
  }
  const auto start = std::chrono::steady_clock::now();
  int attempts = 1;
  std::string response = backend_.complete(cfg_, prompt, attempts);
  last_request_ = std::chrono::steady_clock::now();

  CompletionTranscript transcript;
  transcript.request_prompt = prompt;
  transcript.response_text = response;
  transcript.backend = backend_.name();
  transcript.attempt_count = attempts;
  transcript.latency_ms =
      backend_.deterministic()
          ? 0
          : std::chrono::duration_cast<std::chrono::milliseconds>(last_request_ - start).count();
  transcripts_.push_back(std::move(transcript));
  return response;
}

std::unique_ptr<LLMBackend> make_http_backend(const LLMConfig& cfg) {
  return std::make_unique<HttpBackend>(cfg);
}

std::unique_ptr<LLMBackend> make_scripted_backend(const std::filesystem::path& script_path) {
  return std::make_unique<ScriptedBackend>(script_path);
}

std::unique_ptr<LLMBackend> make_mock_greedy(const BenchmarkTable& table, const SearchSpace& space,
                                             int batch_size) {
  return std::make_unique<GreedyOracleBackend>(table, space, batch_size);
}

std::unique_ptr<LLMBackend> make_mock_random(const SearchSpace& space, std::uint64_t seed,
                                             int batch_size) {
  return std::make_unique<RandomMockBackend>(space, seed, batch_size);
}

}  // namespace gnas
