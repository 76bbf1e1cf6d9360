#include "sldx/llm_gateway.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sldx/text.hpp"

namespace sldx {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::string utc_now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool env_is(const char* name, std::string_view value) {
  const char* v = std::getenv(name);
  return v != nullptr && value == v;
}

}  // namespace

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::Live: return "live";
    case BackendKind::Replay: return "replay";
    case BackendKind::Scripted: return "scripted";
  }
  return "scripted";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "live") return BackendKind::Live;
  if (name == "replay") return BackendKind::Replay;
  if (name == "scripted") return BackendKind::Scripted;
  throw Error(ErrorCode::InvalidConfig, "unknown backend '" + std::string(name) + "'");
}

std::string_view source_name(ResultSource s) {
  switch (s) {
    case ResultSource::Network: return "network";
    case ResultSource::Cache: return "cache";
    case ResultSource::Script: return "script";
  }
  return "network";
}

void BackendConfig::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  if (max_retries < 0 || max_retries > 8) throw Error(ErrorCode::InvalidConfig, "max_retries must be in 0..8");
  if (timeout_ms <= 0) throw Error(ErrorCode::InvalidConfig, "timeout_ms must be positive");
  if (model_id.empty()) throw Error(ErrorCode::InvalidConfig, "model_id empty");
  if (backend == BackendKind::Live && endpoint_url.empty()) {
    throw Error(ErrorCode::InvalidConfig, "endpoint_url required for the live backend");
  }
  if (backend == BackendKind::Scripted && script_path.empty()) {
    throw Error(ErrorCode::InvalidConfig, "script path required for the scripted backend");
  }
  if (backend == BackendKind::Replay && cache_dir.empty()) {
    throw Error(ErrorCode::InvalidConfig, "cache_dir required for the replay backend");
  }
}

Digest request_hash(std::string_view model_id, const Digest& prompt_hash) {
  std::string material(model_id);
  material.push_back('\0');
  material += prompt_hash.hex();
  return sha256(material);
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, std::optional<std::string> default_response)
    : default_(std::move(default_response)) {
  for (auto& e : entries) {
    if (e.prompt_hash) {
      keyed_[text::ascii_lower(*e.prompt_hash)] = std::move(e.response_text);
    } else {
      fifo_.push_back(std::move(e.response_text));
    }
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  json root;
  try {
    root = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
  }
  const json* list = &root;
  std::optional<std::string> fallback;
  if (root.is_object()) {
    if (!root.contains("entries") || !root["entries"].is_array()) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": expected 'entries' array");
    }
    list = &root["entries"];
    if (root.contains("default_response")) {
      if (!root["default_response"].is_string()) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": default_response must be a string");
      }
      fallback = root["default_response"].get<std::string>();
    }
  } else if (!root.is_array()) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": expected array or object");
  }
  std::vector<ScriptEntry> entries;
  for (const auto& e : *list) {
    if (!e.is_object() || !e.contains("response_text") || !e["response_text"].is_string()) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": entry needs string response_text");
    }
    ScriptEntry entry;
    entry.response_text = e["response_text"].get<std::string>();
    if (e.contains("prompt_hash") && !e["prompt_hash"].is_null()) {
      if (!e["prompt_hash"].is_string()) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": prompt_hash must be a string");
      }
      entry.prompt_hash = e["prompt_hash"].get<std::string>();
    }
    entries.push_back(std::move(entry));
  }
  return std::make_unique<ScriptedBackend>(std::move(entries), std::move(fallback));
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& req) {
  const auto start = Clock::now();
  ++calls_;
  if (delay_) std::this_thread::sleep_for(delay_(req));

  CompletionResult result;
  result.source = ResultSource::Script;
  result.model_id = req.config.model_id;
  result.request_hash = request_hash(req.config.model_id, req.prompt.content_hash);
  {
    std::lock_guard lock(mu_);
    if (auto it = keyed_.find(result.request_hash.hex()); it != keyed_.end()) {
      result.text = it->second;
    } else if (auto it2 = keyed_.find(req.prompt.content_hash.hex()); it2 != keyed_.end()) {
      result.text = it2->second;
    } else if (!fifo_.empty()) {
      result.text = std::move(fifo_.front());
      fifo_.pop_front();
    } else if (default_) {
      result.text = *default_;
    } else {
      throw Error(ErrorCode::ScriptExhausted, "no scripted response for prompt " + req.prompt.content_hash.hex());
    }
  }
  result.latency_ms = elapsed_ms(start);
  return result;
}

// ---------------------------------------------------------------------------
// Live

std::chrono::milliseconds BackoffPolicy::delay(int attempt, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> dist(1.0 - jitter, 1.0 + jitter);
  const double ms = static_cast<double>(base.count()) * std::pow(factor, attempt) * dist(rng);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

std::string build_chat_payload(const std::string& model_id, double temperature, const std::string& prompt) {
  json body;
  body["model"] = model_id;
  body["temperature"] = temperature;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  return body.dump();
}

std::string parse_chat_response(const std::string& body) {
  try {
    const json root = json::parse(body);
    const json& content = root.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::NonTransientApiError, "content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::NonTransientApiError, std::string("unexpected response body: ") + e.what());
  }
}

LiveBackend::LiveBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport, Sleeper sleeper,
                         std::uint64_t jitter_seed)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      rng_(jitter_seed) {
  if (env_is(kOfflineEnv, "1")) {
    throw Error(ErrorCode::OfflineMode, "live backend disabled by SLDX_OFFLINE=1");
  }
  if (!transport_) transport_ = make_http_transport();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

CompletionResult LiveBackend::complete(const CompletionRequest& req) {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::CredentialMissing, std::string(kApiKeyEnv) + " is not set");
  }
  const auto start = Clock::now();
  const std::string payload = build_chat_payload(req.config.model_id, req.config.temperature, req.prompt.text);
  const std::vector<std::pair<std::string, std::string>> headers = {
      {"Authorization", std::string("Bearer ") + key},
      {"Content-Type", "application/json"},
  };

  std::string last_error;
  for (int attempt = 0; attempt <= req.config.max_retries; ++attempt) {
    ++attempts_;
    HttpResponse resp = transport_->post(req.config.endpoint_url, headers, payload, req.config.timeout_ms);
    if (!resp.transport_ok) {
      last_error = "transport: " + resp.error;
    } else if (resp.status >= 200 && resp.status < 300) {
      CompletionResult result;
      result.text = parse_chat_response(resp.body);
      result.source = ResultSource::Network;
      result.model_id = req.config.model_id;
      result.request_hash = request_hash(req.config.model_id, req.prompt.content_hash);
      result.latency_ms = elapsed_ms(start);
      return result;
    } else if (resp.status == 429 || resp.status >= 500) {
      last_error = "HTTP " + std::to_string(resp.status);
    } else {
      throw Error(ErrorCode::NonTransientApiError,
                  "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200));
    }
    if (attempt < req.config.max_retries) {
      std::chrono::milliseconds wait;
      {
        std::lock_guard lock(rng_mu_);
        wait = backoff_.delay(attempt, rng_);
      }
      sleeper_(wait);
    }
  }
  throw Error(ErrorCode::TransportFailure,
              last_error + " after " + std::to_string(req.config.max_retries + 1) + " attempts");
}

// ---------------------------------------------------------------------------
// Cache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache dir " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const Digest& request_hash) const {
  return dir_ / (request_hash.hex() + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& model_id, const Digest& prompt_hash) const {
  const Digest rh = request_hash(model_id, prompt_hash);
  const auto path = entry_path(rh);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    const json entry = json::parse(ss.str());
    const std::string text = entry.at("text").get<std::string>();
    if (entry.at("text_sha256").get<std::string>() != sha256(text).hex()) {
      throw Error(ErrorCode::CacheCorrupt, path.string() + ": text digest mismatch");
    }
    if (entry.at("model_id").get<std::string>() != model_id ||
        entry.at("prompt_hash").get<std::string>() != prompt_hash.hex()) {
      throw Error(ErrorCode::CacheCorrupt, path.string() + ": key mismatch");
    }
    return text;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.what());
  }
}

void ResponseCache::store(const std::string& model_id, const Digest& prompt_hash, const std::string& text) const {
  static std::atomic<std::uint64_t> counter{0};
  const Digest rh = request_hash(model_id, prompt_hash);
  json entry;
  entry["model_id"] = model_id;
  entry["prompt_hash"] = prompt_hash.hex();
  entry["request_hash"] = rh.hex();
  entry["text"] = text;
  entry["text_sha256"] = sha256(text).hex();
  entry["created_at"] = utc_now_iso();

  const auto final_path = entry_path(rh);
  const auto tmp = dir_ / (rh.hex() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << entry.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot publish cache entry " + final_path.string());
  }
}

CompletionResult ReplayBackend::complete(const CompletionRequest& req) {
  auto text = cache_.lookup(req.config.model_id, req.prompt.content_hash);
  if (!text) throw Error(ErrorCode::ReplayMiss, "no cached response for prompt " + req.prompt.content_hash.hex());
  CompletionResult result;
  result.text = std::move(*text);
  result.source = ResultSource::Cache;
  result.model_id = req.config.model_id;
  result.request_hash = request_hash(req.config.model_id, req.prompt.content_hash);
  return result;
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.backend) {
    case BackendKind::Live: return std::make_unique<LiveBackend>(config);
    case BackendKind::Replay: return std::make_unique<ReplayBackend>(config.cache_dir);
    case BackendKind::Scripted: return ScriptedBackend::from_file(config.script_path);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown backend");
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::unique_ptr<CompletionBackend> backend, std::filesystem::path cache_dir)
    : backend_(std::move(backend)) {
  if (!cache_dir.empty()) cache_.emplace(std::move(cache_dir));
}

CompletionResult Gateway::complete(const CompletionRequest& req) {
  if (req.prompt.text.empty()) throw Error(ErrorCode::InvalidConfig, "empty prompt");
  ++backend_calls_;
  return backend_->complete(req);
}

CompletionResult Gateway::cached_complete(const CompletionRequest& req) {
  if (cache_) {
    if (auto text = cache_->lookup(req.config.model_id, req.prompt.content_hash)) {
      ++cache_hits_;
      CompletionResult hit;
      hit.text = std::move(*text);
      hit.source = ResultSource::Cache;
      hit.model_id = req.config.model_id;
      hit.request_hash = request_hash(req.config.model_id, req.prompt.content_hash);
      return hit;
    }
  }
  CompletionResult result = complete(req);
  if (cache_) cache_->store(req.config.model_id, req.prompt.content_hash, result.text);
  return result;
}

std::vector<BatchItem> run_batch(Gateway& gateway, std::span<const CompletionRequest> reqs, int parallelism) {
  if (parallelism < 1) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  std::vector<BatchItem> items(reqs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < reqs.size(); i = next++) {
      try {
        items[i].result = gateway.cached_complete(reqs[i]);
      } catch (const Error& e) {
        items[i].error_code = e.code();
        items[i].error_message = e.what();
      } catch (const std::exception& e) {
        items[i].error_code = ErrorCode::TransportFailure;
        items[i].error_message = e.what();
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), reqs.size());
  if (n_workers <= 1) {
    worker();
    return items;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return items;
}

}  // namespace sldx
