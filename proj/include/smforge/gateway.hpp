#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace smforge {

enum class Role { kSystem, kUser, kAssistant };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

inline constexpr int kDefaultMaxTokens = 1500;

struct CompletionRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.01;
  int max_tokens = kDefaultMaxTokens;

  /// Throws std::invalid_argument on empty messages, max_tokens < 1 or a
  /// temperature outside [0, 2].
  void validate() const;

  friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

enum class Finish { kStop, kLength, kError };

std::string_view finish_name(Finish finish);
Finish finish_from_name(std::string_view name);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

struct CompletionResponse {
  std::string content;
  Finish finish = Finish::kStop;
  Usage usage;

  bool truncated() const { return finish == Finish::kLength; }

  friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

nlohmann::json to_json(const CompletionRequest& req);
nlohmann::json to_json(const CompletionResponse& resp);
CompletionRequest request_from_json(const nlohmann::json& j);
CompletionResponse response_from_json(const nlohmann::json& j);

/// 16 hex digits: FNV-1a 64 over the canonical JSON of
/// (model, messages, temperature, max_tokens).
std::string request_digest(const CompletionRequest& req);

// ---------------------------------------------------------------------------
// Errors

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  /// Pipeline step that issued the failing call, once known.
  const std::string& step() const { return step_; }
  void set_step(std::string step) { step_ = std::move(step); }

 private:
  std::string step_;
};

class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RateLimited : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class Timeout : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ReplayMiss : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Connection failures, malformed provider payloads, exhausted 5xx retries.
class ProviderError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class TranscriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Backends

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

/// Answers through a callback. Used for stubs and fixture synthesis.
class FunctionBackend : public Backend {
 public:
  using Handler = std::function<CompletionResponse(const CompletionRequest&)>;
  explicit FunctionBackend(Handler handler) : handler_(std::move(handler)) {}
  CompletionResponse complete(const CompletionRequest& req) override;

 private:
  Handler handler_;
  std::mutex mu_;
};

struct TranscriptEntry {
  std::string digest;
  CompletionRequest request;
  CompletionResponse response;
  std::int64_t ms = 0;
};

nlohmann::json to_json(const TranscriptEntry& entry);
TranscriptEntry entry_from_json(const nlohmann::json& j);

struct Transcript {
  std::string strategy_id;
  std::string scenario_id;
  std::vector<TranscriptEntry> entries;
};

/// One JSON object per line. Throws TranscriptError on unreadable files or
/// malformed lines.
std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path);
std::vector<TranscriptEntry> parse_transcript(std::string_view text);
std::string format_transcript_line(const TranscriptEntry& entry);

/// Serves recorded responses by request digest, first-in first-out per
/// digest. Throws ReplayMiss when no unused entry matches.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries);
  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path);

  CompletionResponse complete(const CompletionRequest& req) override;
  std::size_t remaining() const;

 private:
  std::map<std::string, std::vector<CompletionResponse>> queues_;
  std::map<std::string, std::size_t> cursor_;
  mutable std::mutex mu_;
};

/// Pass-through that appends every completed call to a transcript sink and
/// keeps the entries in memory.
class RecordingBackend : public Backend {
 public:
  /// No sink: entries are only kept in memory.
  explicit RecordingBackend(BackendPtr inner);
  /// Truncates and writes `path`; throws TranscriptError if not writable.
  RecordingBackend(BackendPtr inner, const std::filesystem::path& path);

  CompletionResponse complete(const CompletionRequest& req) override;
  std::vector<TranscriptEntry> entries() const;

 private:
  BackendPtr inner_;
  std::optional<std::ofstream> sink_;
  std::filesystem::path path_;
  std::vector<TranscriptEntry> entries_;
  mutable std::mutex mu_;
};

std::shared_ptr<RecordingBackend> record_wrap(BackendPtr inner);
std::shared_ptr<RecordingBackend> record_wrap(BackendPtr inner,
                                              const std::filesystem::path& sink);

// ---------------------------------------------------------------------------
// Live providers

enum class Provider { kOpenAI, kAnthropic };

std::string_view provider_name(Provider provider);
std::optional<Provider> provider_from_name(std::string_view name);

struct RetryPolicy {
  /// One entry per retry; only 429 and 5xx are retried.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4),
                                                 std::chrono::seconds(16)};
  std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for
};

struct LiveConfig {
  Provider provider = Provider::kOpenAI;
  std::string api_key;
  /// scheme://host[:port][/prefix]; empty uses the provider default.
  std::string base_url;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  /// Minimum spacing between request starts for this provider, shared by
  /// every backend in the process.
  std::chrono::milliseconds min_interval{0};
  std::string anthropic_version = "2023-06-01";
};

/// Reads SMFORGE_OPENAI_KEY / SMFORGE_ANTHROPIC_KEY and SMFORGE_BASE_URL.
/// Throws AuthError when the key is missing.
LiveConfig live_config_from_env(Provider provider);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(LiveConfig config);
  CompletionResponse complete(const CompletionRequest& req) override;

  /// Wire-format helpers, exposed for tests.
  static nlohmann::json encode(Provider provider, const CompletionRequest& req);
  static CompletionResponse decode(Provider provider, const nlohmann::json& body);

 private:
  LiveConfig config_;
  std::string origin_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Sampling profiles

enum class Profile { kDeterministic, kCreative };

std::string_view profile_name(Profile profile);

struct SamplingConfig {
  double deterministic = 0.01;
  double creative = 0.5;
  int max_tokens = kDefaultMaxTokens;

  double temperature(Profile profile) const {
    return profile == Profile::kCreative ? creative : deterministic;
  }

  /// `key = value` lines (deterministic, creative, max_tokens); `#` starts
  /// a comment. Throws std::invalid_argument on unknown keys or bad values.
  void apply_overrides(std::string_view text);
  void apply_overrides_file(const std::filesystem::path& path);
};

double profile(Profile kind, const SamplingConfig& config = {});

}  // namespace smforge
