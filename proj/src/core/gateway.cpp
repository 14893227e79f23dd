#include "core/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace mloc::gateway {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* backend_kind_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::Http: return "http";
        case BackendKind::Replay: return "replay";
        case BackendKind::Mock: return "mock";
    }
    return "?";
}

std::string LlmRequest::digest() const {
    char temp_buf[32];
    std::snprintf(temp_buf, sizeof(temp_buf), "%.6f", temperature);
    std::string canonical = "v1\n";
    canonical += model;
    canonical += '\n';
    canonical += temp_buf;
    canonical += '\n';
    canonical += prompt;
    return sha256_hex(canonical);
}

std::string GatewayStats::to_json() const {
    ordered_json j;
    j["http_calls"] = http_calls;
    j["replay_hits"] = replay_hits;
    j["mock_calls"] = mock_calls;
    j["cache_writes"] = cache_writes;
    j["retries"] = retries;
    j["peak_in_flight"] = peak_in_flight;
    return j.dump() + "\n";
}

// ---------------------------------------------------------------- replay

ReplayStore::ReplayStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
}

std::optional<std::string> ReplayStore::get(const std::string& digest) const {
    std::filesystem::path p = dir_ / (digest + ".txt");
    if (!std::filesystem::exists(p)) return std::nullopt;
    return read_file(p);
}

void ReplayStore::put(const std::string& digest, std::string_view text) const {
    write_file_atomic(dir_ / (digest + ".txt"), text);
}

namespace {

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(std::filesystem::path dir) : store_(std::move(dir)) {}

    LlmResponse complete_once(const LlmRequest& request) override {
        auto hit = store_.get(request.digest());
        if (!hit) {
            throw Error(ErrorCode::CacheMiss,
                        "replay store has no entry for digest " + request.digest());
        }
        LlmResponse r;
        r.text = std::move(*hit);
        r.backend = BackendKind::Replay;
        return r;
    }

    BackendKind kind() const override { return BackendKind::Replay; }

private:
    ReplayStore store_;
};

// ------------------------------------------------------------------ mock

class MockBackend final : public Backend {
public:
    explicit MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

    LlmResponse complete_once(const LlmRequest& request) override {
        for (const MockRule& rule : rules_) {
            bool match = true;
            for (const std::string& s : rule.contains) {
                if (request.prompt.find(s) == std::string::npos) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            for (const std::string& s : rule.lacks) {
                if (request.prompt.find(s) != std::string::npos) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            LlmResponse r;
            r.text = rule.response;
            r.backend = BackendKind::Mock;
            return r;
        }
        std::string head = request.prompt.substr(0, 120);
        throw Error(ErrorCode::MockUnscripted, "no mock rule matches prompt: " + head);
    }

    BackendKind kind() const override { return BackendKind::Mock; }

private:
    std::vector<MockRule> rules_;
};

// ------------------------------------------------------------------ http

// De-facto chat-completions schema; base_url may carry a path prefix
// (e.g. http://host:8080/v1) so self-hosted servers work unchanged.
class HttpBackend final : public Backend {
public:
    HttpBackend(std::string base_url, std::string api_key_env)
        : api_key_env_(std::move(api_key_env)) {
        size_t scheme = base_url.find("://");
        size_t path_start = scheme == std::string::npos ? base_url.find('/')
                                                        : base_url.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            host_ = base_url;
        } else {
            host_ = base_url.substr(0, path_start);
            path_prefix_ = base_url.substr(path_start);
        }
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }

    LlmResponse complete_once(const LlmRequest& request) override {
        std::string api_key;
        if (!api_key_env_.empty()) {
            const char* v = std::getenv(api_key_env_.c_str());
            if (!v || !*v) {
                throw Error(ErrorCode::AuthMissing,
                            "credential environment variable " + api_key_env_ + " is not set");
            }
            api_key = v;
        }

        json body;
        body["model"] = request.model;
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_output_tokens;
        body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});

        httplib::Client client(host_);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        auto t0 = std::chrono::steady_clock::now();
        httplib::Result res =
            client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                        "application/json");
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

        if (!res) {
            throw Error(ErrorCode::TransportError,
                        std::string("http request failed: ") + httplib::to_string(res.error()));
        }
        if (res->status == 429) {
            throw Error(ErrorCode::RateLimited, "rate limited by " + host_);
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error(ErrorCode::TransportError,
                        "http status " + std::to_string(res->status) + ": " +
                            res->body.substr(0, 200));
        }

        json payload = json::parse(res->body, nullptr, false);
        if (payload.is_discarded() || !payload.contains("choices") ||
            !payload["choices"].is_array() || payload["choices"].empty()) {
            throw Error(ErrorCode::TransportError, "malformed completion payload");
        }
        const json& choice = payload["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content")) {
            throw Error(ErrorCode::TransportError, "completion payload has no message content");
        }

        LlmResponse r;
        r.text = choice["message"]["content"].get<std::string>();
        r.backend = BackendKind::Http;
        r.latency_ms = static_cast<long>(elapsed);
        if (payload.contains("usage") && payload["usage"].is_object()) {
            r.prompt_tokens = payload["usage"].value("prompt_tokens", 0);
            r.completion_tokens = payload["usage"].value("completion_tokens", 0);
        }
        return r;
    }

    BackendKind kind() const override { return BackendKind::Http; }

private:
    std::string host_;
    std::string path_prefix_;
    std::string api_key_env_;
};

}  // namespace

std::vector<MockRule> parse_mock_rules(std::string_view json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw Error(ErrorCode::BadFormat, "mock script must be a JSON array of rules");
    }
    std::vector<MockRule> rules;
    for (const json& jr : j) {
        MockRule rule;
        rule.name = jr.value("name", "");
        if (jr.contains("contains")) {
            for (const json& s : jr["contains"]) rule.contains.push_back(s.get<std::string>());
        }
        if (jr.contains("lacks")) {
            for (const json& s : jr["lacks"]) rule.lacks.push_back(s.get<std::string>());
        }
        if (!jr.contains("response") || !jr["response"].is_string()) {
            throw Error(ErrorCode::BadFormat,
                        "mock rule '" + rule.name + "' has no response string");
        }
        rule.response = jr["response"].get<std::string>();
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<MockRule> load_mock_rules(const std::filesystem::path& path) {
    return parse_mock_rules(read_file(path));
}

std::unique_ptr<Backend> make_http_backend(std::string base_url, std::string api_key_env) {
    return std::make_unique<HttpBackend>(std::move(base_url), std::move(api_key_env));
}

std::unique_ptr<Backend> make_replay_backend(std::filesystem::path cache_dir) {
    return std::make_unique<ReplayBackend>(std::move(cache_dir));
}

std::unique_ptr<Backend> make_mock_backend(std::vector<MockRule> rules) {
    return std::make_unique<MockBackend>(std::move(rules));
}

// ----------------------------------------------------------------- retry

LlmResponse with_retry(Backend& backend, const LlmRequest& request, const RetryPolicy& policy,
                       const std::function<void(int delay_ms)>& sleeper) {
    if (policy.max_attempts < 1) {
        throw Error(ErrorCode::InvalidArgument, "retry max_attempts must be >= 1");
    }
    static thread_local std::mt19937 rng{std::random_device{}()};
    for (int attempt = 1;; ++attempt) {
        try {
            LlmResponse r = backend.complete_once(request);
            r.attempt = attempt;
            return r;
        } catch (const Error& e) {
            if (!is_retryable(e.code()) || attempt >= policy.max_attempts) throw;
            long delay = static_cast<long>(policy.base_delay_ms) << (attempt - 1);
            if (policy.jitter_ms > 0) {
                delay += std::uniform_int_distribution<int>(0, policy.jitter_ms)(rng);
            }
            if (sleeper) {
                sleeper(static_cast<int>(delay));
            } else if (delay > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }
        }
    }
}

// --------------------------------------------------------------- gateway

class Gateway::Limiter {
public:
    explicit Limiter(int cap) : cap_(cap < 1 ? 1 : cap) {}

    long acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this] { return in_flight_ < cap_; });
        ++in_flight_;
        if (in_flight_ > peak_) peak_ = in_flight_;
        return peak_;
    }

    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --in_flight_;
        }
        cv_.notify_one();
    }

    long peak() {
        std::lock_guard<std::mutex> lock(mu_);
        return peak_;
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int cap_;
    long in_flight_ = 0;
    long peak_ = 0;
};

Gateway::Gateway(std::unique_ptr<Backend> backend, RetryPolicy retry, int max_in_flight,
                 std::optional<std::filesystem::path> cache_dir,
                 std::optional<std::filesystem::path> log_path)
    : backend_(std::move(backend)),
      retry_(retry),
      log_path_(std::move(log_path)),
      limiter_(std::make_unique<Limiter>(max_in_flight)) {
    if (!backend_) {
        throw Error(ErrorCode::GatewayUnconfigured, "no gateway backend configured");
    }
    if (cache_dir && backend_->kind() != BackendKind::Replay) {
        cache_.emplace(*cache_dir);
    }
}

Gateway::~Gateway() = default;

BackendKind Gateway::backend_kind() const { return backend_->kind(); }

LlmResponse Gateway::complete(const LlmRequest& request) {
    std::string digest = request.digest();

    if (cache_ && !request.force_refresh) {
        if (auto hit = cache_->get(digest)) {
            LlmResponse r;
            r.text = std::move(*hit);
            r.backend = BackendKind::Replay;
            {
                std::lock_guard<std::mutex> lock(stats_mu_);
                ++stats_.replay_hits;
            }
            log_exchange(request, r);
            return r;
        }
    }

    long peak = limiter_->acquire();
    LlmResponse response;
    try {
        response = with_retry(*backend_, request, retry_);
    } catch (...) {
        limiter_->release();
        throw;
    }
    limiter_->release();

    {
        std::lock_guard<std::mutex> lock(stats_mu_);
        switch (response.backend) {
            case BackendKind::Http: stats_.http_calls += response.attempt; break;
            case BackendKind::Replay: ++stats_.replay_hits; break;
            case BackendKind::Mock: stats_.mock_calls += response.attempt; break;
        }
        stats_.retries += response.attempt - 1;
        if (peak > stats_.peak_in_flight) stats_.peak_in_flight = peak;
    }
    if (response.backend == BackendKind::Http && cache_) {
        cache_->put(digest, response.text);
        std::lock_guard<std::mutex> lock(stats_mu_);
        ++stats_.cache_writes;
    }
    log_exchange(request, response);
    return response;
}

GatewayStats Gateway::stats() const {
    std::lock_guard<std::mutex> lock(stats_mu_);
    return stats_;
}

void Gateway::log_exchange(const LlmRequest& request, const LlmResponse& response) {
    if (!log_path_) return;
    ordered_json j;
    j["ts"] = iso8601_utc_now();
    j["digest"] = request.digest();
    j["model"] = request.model;
    j["backend"] = backend_kind_name(response.backend);
    j["latency_ms"] = response.latency_ms;
    j["attempt"] = response.attempt;
    j["prompt_head"] = request.prompt.substr(0, 80);
    std::lock_guard<std::mutex> lock(log_mu_);
    append_line(*log_path_, j.dump());
}

}  // namespace mloc::gateway
