#include "smforge/gateway.hpp"

#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "text_util.hpp"

namespace smforge {

using nlohmann::json;

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw std::invalid_argument("unknown message role '" + std::string(name) + "'");
}

std::string_view finish_name(Finish finish) {
  switch (finish) {
    case Finish::kStop: return "stop";
    case Finish::kLength: return "length";
    case Finish::kError: return "error";
  }
  return "error";
}

Finish finish_from_name(std::string_view name) {
  if (name == "stop") return Finish::kStop;
  if (name == "length") return Finish::kLength;
  if (name == "error") return Finish::kError;
  throw std::invalid_argument("unknown finish reason '" + std::string(name) + "'");
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("completion request without messages");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be at least 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw std::invalid_argument("temperature outside [0, 2]");
  }
}

json to_json(const CompletionRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return {{"model", req.model},
          {"messages", std::move(msgs)},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens}};
}

json to_json(const CompletionResponse& resp) {
  return {{"content", resp.content},
          {"finish", finish_name(resp.finish)},
          {"usage",
           {{"prompt_tokens", resp.usage.prompt_tokens},
            {"completion_tokens", resp.usage.completion_tokens}}}};
}

CompletionRequest request_from_json(const json& j) {
  CompletionRequest req;
  req.model = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages")) {
    req.messages.push_back(
        {role_from_name(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  req.temperature = j.at("temperature").get<double>();
  req.max_tokens = j.at("max_tokens").get<int>();
  return req;
}

CompletionResponse response_from_json(const json& j) {
  CompletionResponse resp;
  resp.content = j.at("content").get<std::string>();
  resp.finish = finish_from_name(j.at("finish").get<std::string>());
  if (j.contains("usage")) {
    resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    resp.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
  }
  return resp;
}

std::string request_digest(const CompletionRequest& req) {
  // json objects keep keys sorted, so dump() is canonical.
  const std::string canon = to_json(req).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transcripts

json to_json(const TranscriptEntry& e) {
  return {{"digest", e.digest},
          {"request", to_json(e.request)},
          {"response", to_json(e.response)},
          {"ms", e.ms}};
}

TranscriptEntry entry_from_json(const json& j) {
  TranscriptEntry e;
  e.digest = j.at("digest").get<std::string>();
  e.request = request_from_json(j.at("request"));
  e.response = response_from_json(j.at("response"));
  e.ms = j.at("ms").get<std::int64_t>();
  return e;
}

std::string format_transcript_line(const TranscriptEntry& entry) {
  return to_json(entry).dump() + "\n";
}

std::vector<TranscriptEntry> parse_transcript(std::string_view text) {
  std::vector<TranscriptEntry> out;
  std::size_t lineno = 0;
  for (const auto& line : text::split_lines(text)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(entry_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw TranscriptError("transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot read transcript " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_transcript(ss.str());
  } catch (const TranscriptError& e) {
    throw TranscriptError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Simple backends

CompletionResponse FunctionBackend::complete(const CompletionRequest& req) {
  req.validate();
  std::lock_guard lock(mu_);
  return handler_(req);
}

ReplayBackend::ReplayBackend(std::vector<TranscriptEntry> entries) {
  for (auto& e : entries) {
    // Trust the request over a stale digest field.
    queues_[request_digest(e.request)].push_back(std::move(e.response));
  }
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& path) {
  return std::make_shared<ReplayBackend>(read_transcript(path));
}

CompletionResponse ReplayBackend::complete(const CompletionRequest& req) {
  req.validate();
  const std::string digest = request_digest(req);
  std::lock_guard lock(mu_);
  auto it = queues_.find(digest);
  std::size_t& pos = cursor_[digest];
  if (it == queues_.end() || pos >= it->second.size()) {
    throw ReplayMiss("no recorded response for request digest " + digest + " (model " +
                     req.model + ", temperature " + json(req.temperature).dump() +
                     ", max_tokens " + std::to_string(req.max_tokens) + ")");
  }
  return it->second[pos++];
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [digest, q] : queues_) {
    auto it = cursor_.find(digest);
    n += q.size() - (it == cursor_.end() ? 0 : it->second);
  }
  return n;
}

RecordingBackend::RecordingBackend(BackendPtr inner) : inner_(std::move(inner)) {}

RecordingBackend::RecordingBackend(BackendPtr inner, const std::filesystem::path& path)
    : inner_(std::move(inner)), path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  sink_.emplace(path, std::ios::binary | std::ios::trunc);
  if (!*sink_) throw TranscriptError("cannot open transcript sink " + path.string());
}

CompletionResponse RecordingBackend::complete(const CompletionRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  CompletionResponse resp = inner_->complete(req);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  TranscriptEntry entry{request_digest(req), req, resp, ms};
  std::lock_guard lock(mu_);
  if (sink_) {
    *sink_ << format_transcript_line(entry);
    sink_->flush();
    if (!*sink_) throw TranscriptError("write to transcript sink " + path_.string() + " failed");
  }
  entries_.push_back(std::move(entry));
  return resp;
}

std::vector<TranscriptEntry> RecordingBackend::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::shared_ptr<RecordingBackend> record_wrap(BackendPtr inner) {
  return std::make_shared<RecordingBackend>(std::move(inner));
}

std::shared_ptr<RecordingBackend> record_wrap(BackendPtr inner,
                                              const std::filesystem::path& sink) {
  return std::make_shared<RecordingBackend>(std::move(inner), sink);
}

// ---------------------------------------------------------------------------
// Live providers

std::string_view provider_name(Provider provider) {
  return provider == Provider::kOpenAI ? "openai" : "anthropic";
}

std::optional<Provider> provider_from_name(std::string_view name) {
  const std::string n = text::to_lower(name);
  if (n == "openai") return Provider::kOpenAI;
  if (n == "anthropic") return Provider::kAnthropic;
  return std::nullopt;
}

LiveConfig live_config_from_env(Provider provider) {
  LiveConfig cfg;
  cfg.provider = provider;
  const char* key_var =
      provider == Provider::kOpenAI ? "SMFORGE_OPENAI_KEY" : "SMFORGE_ANTHROPIC_KEY";
  const char* key = std::getenv(key_var);
  if (key == nullptr || *key == '\0') {
    throw AuthError(std::string(key_var) + " is not set");
  }
  cfg.api_key = key;
  if (const char* base = std::getenv("SMFORGE_BASE_URL"); base != nullptr && *base != '\0') {
    cfg.base_url = base;
  }
  return cfg;
}

namespace {

class RateLimiter {
 public:
  void acquire(std::chrono::milliseconds interval) {
    if (interval.count() <= 0) return;
    std::unique_lock lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    const auto slot = std::max(now, next_);
    next_ = slot + interval;
    lock.unlock();
    std::this_thread::sleep_until(slot);
  }

 private:
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

RateLimiter& limiter_for(Provider provider) {
  static RateLimiter openai;
  static RateLimiter anthropic;
  return provider == Provider::kOpenAI ? openai : anthropic;
}

std::string default_origin(Provider provider) {
  return provider == Provider::kOpenAI ? "https://api.openai.com" : "https://api.anthropic.com";
}

std::string endpoint(Provider provider) {
  return provider == Provider::kOpenAI ? "/v1/chat/completions" : "/v1/messages";
}

std::string error_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

HttpBackend::HttpBackend(LiveConfig config) : config_(std::move(config)) {
  std::string base = config_.base_url.empty() ? default_origin(config_.provider) : config_.base_url;
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(base, m, kUrl)) {
    throw std::invalid_argument("malformed base URL '" + base + "'");
  }
  origin_ = m[1].str();
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + endpoint(config_.provider);
  if (!config_.retry.sleep) {
    config_.retry.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

json HttpBackend::encode(Provider provider, const CompletionRequest& req) {
  if (provider == Provider::kOpenAI) return to_json(req);

  json body = {{"model", req.model},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature}};
  std::string system;
  json msgs = json::array();
  for (const auto& m : req.messages) {
    if (m.role == Role::kSystem) {
      if (!system.empty()) system += "\n\n";
      system += m.content;
    } else {
      msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
  }
  if (!system.empty()) body["system"] = system;
  body["messages"] = std::move(msgs);
  return body;
}

CompletionResponse HttpBackend::decode(Provider provider, const json& body) {
  CompletionResponse resp;
  try {
    if (provider == Provider::kOpenAI) {
      const auto& choice = body.at("choices").at(0);
      const auto& content = choice.at("message").at("content");
      resp.content = content.is_null() ? "" : content.get<std::string>();
      const std::string reason = choice.value("finish_reason", "stop");
      resp.finish = reason == "length" ? Finish::kLength
                    : reason == "stop" ? Finish::kStop
                                       : Finish::kError;
      if (body.contains("usage")) {
        resp.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        resp.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
      }
    } else {
      for (const auto& block : body.at("content")) {
        if (block.value("type", "") == "text") resp.content += block.at("text").get<std::string>();
      }
      const std::string reason =
          body.contains("stop_reason") && body["stop_reason"].is_string()
              ? body["stop_reason"].get<std::string>()
              : "end_turn";
      resp.finish = reason == "max_tokens" ? Finish::kLength
                    : (reason == "end_turn" || reason == "stop_sequence") ? Finish::kStop
                                                                          : Finish::kError;
      if (body.contains("usage")) {
        resp.usage.prompt_tokens = body["usage"].value("input_tokens", 0);
        resp.usage.completion_tokens = body["usage"].value("output_tokens", 0);
      }
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected response shape: ") + e.what());
  }
  return resp;
}

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
  req.validate();
  const std::string payload = encode(config_.provider, req).dump();

  httplib::Headers headers;
  if (config_.provider == Provider::kOpenAI) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  } else {
    headers.emplace("x-api-key", config_.api_key);
    headers.emplace("anthropic-version", config_.anthropic_version);
  }

  const std::size_t attempts = config_.retry.backoff.size() + 1;
  std::string last_error;
  bool last_was_rate_limit = false;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) config_.retry.sleep(config_.retry.backoff[attempt - 1]);
    limiter_for(config_.provider).acquire(config_.min_interval);

    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
        throw Timeout(std::string(provider_name(config_.provider)) + " request timed out (" +
                      httplib::to_string(err) + ")");
      }
      throw ProviderError(std::string(provider_name(config_.provider)) +
                          " connection failed: " + httplib::to_string(err));
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      throw AuthError(std::string(provider_name(config_.provider)) + " rejected credentials (HTTP " +
                      std::to_string(status) + ")");
    }
    if (status == 429 || status >= 500) {
      last_was_rate_limit = status == 429;
      last_error = "HTTP " + std::to_string(status) + ": " + error_excerpt(res->body);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw ProviderError(std::string(provider_name(config_.provider)) + " HTTP " +
                          std::to_string(status) + ": " + error_excerpt(res->body));
    }
    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::exception& e) {
      throw ProviderError(std::string("response is not JSON: ") + e.what());
    }
    return decode(config_.provider, body);
  }
  const std::string msg = std::string(provider_name(config_.provider)) + " gave up after " +
                          std::to_string(attempts) + " attempts; last " + last_error;
  if (last_was_rate_limit) throw RateLimited(msg);
  throw ProviderError(msg);
}

// ---------------------------------------------------------------------------
// Profiles

std::string_view profile_name(Profile p) {
  return p == Profile::kCreative ? "creative" : "deterministic";
}

void SamplingConfig::apply_overrides(std::string_view text) {
  std::size_t lineno = 0;
  for (auto line : text::split_lines(text)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t(text::trim(line));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("override line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = text::to_lower(text::trim(t.substr(0, eq)));
    const std::string value(text::trim(t.substr(eq + 1)));
    try {
      std::size_t used = 0;
      if (key == "deterministic" || key == "creative") {
        const double v = std::stod(value, &used);
        if (used != value.size() || v < 0.0 || v > 2.0) throw std::invalid_argument(value);
        (key == "creative" ? creative : deterministic) = v;
      } else if (key == "max_tokens") {
        const int v = std::stoi(value, &used);
        if (used != value.size() || v < 1) throw std::invalid_argument(value);
        max_tokens = v;
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("override line " + std::to_string(lineno) + ": bad value for " +
                                  key + " (" + e.what() + ")");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("override line " + std::to_string(lineno) + ": value out of range");
    }
  }
}

void SamplingConfig::apply_overrides_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read override file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_overrides(ss.str());
}

double profile(Profile kind, const SamplingConfig& config) { return config.temperature(kind); }

}  // namespace smforge
