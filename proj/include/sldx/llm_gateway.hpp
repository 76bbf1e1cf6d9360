#pragma once

// Completion gateway: live chat-completions endpoint, content-addressed
// response cache, and a scripted backend for offline runs.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sldx/digest.hpp"
#include "sldx/error.hpp"
#include "sldx/prompting.hpp"

namespace sldx {

inline constexpr const char* kApiKeyEnv = "SLDX_API_KEY";
inline constexpr const char* kOfflineEnv = "SLDX_OFFLINE";

enum class BackendKind { Live, Replay, Scripted };

std::string_view backend_kind_name(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);  // "live" | "replay" | "scripted"

struct BackendConfig {
  BackendKind backend = BackendKind::Scripted;
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.0;
  int timeout_ms = 60000;
  int max_retries = 3;
  std::filesystem::path cache_dir;
  std::filesystem::path script_path;  // Scripted only

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct CompletionRequest {
  RenderedPrompt prompt;
  BackendConfig config;
};

enum class ResultSource { Network, Cache, Script };

std::string_view source_name(ResultSource s);

struct CompletionResult {
  std::string text;
  ResultSource source = ResultSource::Network;
  std::int64_t latency_ms = 0;
  std::string model_id;
  Digest request_hash;
};

/// sha256 over the model id and the prompt's content hash.
Digest request_hash(std::string_view model_id, const Digest& prompt_hash);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptEntry {
  /// Hex request hash or prompt content hash; absent entries are consumed FIFO.
  std::optional<std::string> prompt_hash;
  std::string response_text;
};

/// Replays canned responses. Keyed entries are looked up by request hash,
/// then by prompt content hash, and may be reused; unkeyed entries are handed
/// out once each in script order; then the default response, if any.
class ScriptedBackend final : public CompletionBackend {
 public:
  using DelayFn = std::function<std::chrono::milliseconds(const CompletionRequest&)>;

  explicit ScriptedBackend(std::vector<ScriptEntry> entries,
                           std::optional<std::string> default_response = std::nullopt);

  /// Script file: a JSON array of {"prompt_hash"?, "response_text"}, or an
  /// object {"entries": [...], "default_response"?: str}.
  static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  CompletionResult complete(const CompletionRequest& req) override;

  /// Test hook: sleep for the returned duration before answering.
  void set_delay(DelayFn fn) { delay_ = std::move(fn); }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> keyed_;
  std::deque<std::string> fifo_;
  std::optional<std::string> default_;
  DelayFn delay_;
  std::mutex mu_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Live backend

struct HttpResponse {
  bool transport_ok = false;  // false: connection error or timeout
  int status = 0;
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body, int timeout_ms) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport();

/// Exponential backoff: base * factor^attempt, scaled by a uniform jitter in
/// [1 - jitter, 1 + jitter].
struct BackoffPolicy {
  std::chrono::milliseconds base{500};
  double factor = 2.0;
  double jitter = 0.2;

  std::chrono::milliseconds delay(int attempt, std::mt19937_64& rng) const;
};

/// Request body: model, temperature and a single user message holding the prompt.
std::string build_chat_payload(const std::string& model_id, double temperature, const std::string& prompt);

/// Extracts choices[0].message.content. Throws Error(NonTransientApiError).
std::string parse_chat_response(const std::string& body);

class LiveBackend final : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  /// Throws Error(OfflineMode) when SLDX_OFFLINE=1.
  explicit LiveBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport = nullptr,
                       Sleeper sleeper = nullptr, std::uint64_t jitter_seed = 0x5eed);

  /// Reads SLDX_API_KEY first (Error(CredentialMissing) before any I/O).
  /// Retries timeouts, 429 and 5xx up to max_retries times.
  CompletionResult complete(const CompletionRequest& req) override;

  std::size_t network_attempts() const { return attempts_.load(); }

 private:
  BackendConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  BackoffPolicy backoff_;
  std::mt19937_64 rng_;
  std::mutex rng_mu_;
  std::atomic<std::size_t> attempts_{0};
};

// ---------------------------------------------------------------------------
// Cache

/// One JSON file per entry, named <request_hash>.json, written via
/// temp-file rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  /// Throws Error(CacheCorrupt) on digest or key mismatch.
  std::optional<std::string> lookup(const std::string& model_id, const Digest& prompt_hash) const;
  void store(const std::string& model_id, const Digest& prompt_hash, const std::string& text) const;

  std::filesystem::path entry_path(const Digest& request_hash) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Backend that only answers from the cache (Error(ReplayMiss) otherwise).
class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(std::filesystem::path cache_dir) : cache_(std::move(cache_dir)) {}
  CompletionResult complete(const CompletionRequest& req) override;

 private:
  ResponseCache cache_;
};

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config);

// ---------------------------------------------------------------------------
// Gateway

class Gateway {
 public:
  /// cache_dir may be empty, which disables caching.
  Gateway(std::unique_ptr<CompletionBackend> backend, std::filesystem::path cache_dir);

  CompletionResult complete(const CompletionRequest& req);
  /// Cache hit: source=Cache. Miss: complete(), persist, return.
  CompletionResult cached_complete(const CompletionRequest& req);

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::unique_ptr<CompletionBackend> backend_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

struct BatchItem {
  std::optional<CompletionResult> result;
  std::optional<ErrorCode> error_code;
  std::string error_message;

  bool ok() const { return result.has_value(); }
};

/// Results in input order; at most `parallelism` requests in flight; a failed
/// request becomes an error record and never aborts the batch.
std::vector<BatchItem> run_batch(Gateway& gateway, std::span<const CompletionRequest> reqs, int parallelism);

}  // namespace sldx
