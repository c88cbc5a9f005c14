#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gnas/oracle.hpp"
#include "gnas/prompting.hpp"

namespace gnas {

/// Connection settings for the OpenAI-compatible HTTP backend. The API key
/// is read from the named environment variable only; it is never stored in
/// config files, transcripts, or reports.
struct LLMConfig {
  std::string endpoint_url = "https://api.openai.com";
  std::string api_path = "/v1/chat/completions";
  std::string model_name = "gpt-4";
  std::string api_key_env_var = "GNAS_LLM_API_KEY";
  double temperature = 0.0;
  int max_tokens = 0;  // 0 = omit from the request
  std::chrono::milliseconds timeout{60000};
  int retries = 3;
  std::chrono::milliseconds backoff{500};
  /// Optional floor between consecutive requests (rate-limit friendliness).
  std::chrono::milliseconds min_request_interval{0};

  void validate() const;
};

/// One completion, as recorded in the run transcript. Deterministic backends
/// report zero latency so seeded runs serialize byte-identically.
struct CompletionTranscript {
  PromptBundle request_prompt;
  std::string response_text;
  std::string backend;
  std::int64_t latency_ms = 0;
  int attempt_count = 1;
};

/// A completion source. Implementations must be independent per run: no
/// shared mutable state between concurrently running searches.
class LLMBackend {
 public:
  virtual ~LLMBackend() = default;
  virtual std::string name() const = 0;
  /// Returns raw response text. Throws TransportError when the source is
  /// exhausted or unreachable after retries.
  virtual std::string complete(const LLMConfig& cfg, const PromptBundle& prompt,
                               int& attempts_out) = 0;
  /// Deterministic backends replay identically under a fixed seed/script.
  virtual bool deterministic() const { return true; }
};

/// Per-run completion front end: forwards to one backend, enforces the
/// request-interval floor, and appends one transcript per completion.
class LLMClient {
 public:
  LLMClient(LLMBackend& backend, LLMConfig cfg);

  std::string complete(const PromptBundle& prompt);

  const std::vector<CompletionTranscript>& transcripts() const { return transcripts_; }
  const LLMConfig& config() const { return cfg_; }

 private:
  LLMBackend& backend_;
  LLMConfig cfg_;
  std::vector<CompletionTranscript> transcripts_;
  std::chrono::steady_clock::time_point last_request_{};
};

/// Live OpenAI-compatible chat-completions backend. Reads the API key env
/// var at construction (ConfigError when missing). Retries transport
/// failures, 5xx, and 429 with exponential backoff; other 4xx fail fast.
std::unique_ptr<LLMBackend> make_http_backend(const LLMConfig& cfg);

/// Plays back a JSON array of response strings, one per completion, in
/// order. A request past the end raises TransportError.
std::unique_ptr<LLMBackend> make_scripted_backend(const std::filesystem::path& script_path);

/// Always proposes the best not-yet-emitted architectures of the table, in
/// rank order, formatted through the contracted output format.
std::unique_ptr<LLMBackend> make_mock_greedy(const BenchmarkTable& table, const SearchSpace& space,
                                             int batch_size);

/// Proposes uniform random architectures (duplicates possible; the parser
/// dedupes), formatted through the contracted output format.
std::unique_ptr<LLMBackend> make_mock_random(const SearchSpace& space, std::uint64_t seed,
                                             int batch_size);

}  // namespace gnas
