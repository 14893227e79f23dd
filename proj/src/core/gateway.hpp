#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mloc::gateway {

enum class BackendKind { Http, Replay, Mock };

const char* backend_kind_name(BackendKind kind);

struct LlmRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 4096;
    // Set on the parse-retry path: bypass the replay store read so a live
    // backend gets a fresh shot instead of replaying the bad completion.
    bool force_refresh = false;

    // sha256 over (prompt, model, temperature); stable across processes
    // and platforms for identical field values.
    std::string digest() const;
};

struct LlmResponse {
    std::string text;  // exactly what the backend returned
    int prompt_tokens = 0;
    int completion_tokens = 0;
    long latency_ms = 0;
    BackendKind backend = BackendKind::Mock;
    int attempt = 1;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 500;
    int jitter_ms = 250;
};

struct GatewayStats {
    long http_calls = 0;  // actual wire requests, retries included
    long replay_hits = 0;
    long mock_calls = 0;
    long cache_writes = 0;
    long retries = 0;
    long peak_in_flight = 0;

    std::string to_json() const;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual LlmResponse complete_once(const LlmRequest& request) = 0;
    virtual BackendKind kind() const = 0;
};

struct MockRule {
    std::string name;
    std::vector<std::string> contains;  // all must appear in the prompt
    std::vector<std::string> lacks;     // none may appear
    std::string response;
};

std::vector<MockRule> parse_mock_rules(std::string_view json_text);
std::vector<MockRule> load_mock_rules(const std::filesystem::path& path);

std::unique_ptr<Backend> make_http_backend(std::string base_url, std::string api_key_env);
std::unique_ptr<Backend> make_replay_backend(std::filesystem::path cache_dir);
std::unique_ptr<Backend> make_mock_backend(std::vector<MockRule> rules);

// One file per digest holding the raw response text.
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path dir);
    std::optional<std::string> get(const std::string& digest) const;
    void put(const std::string& digest, std::string_view text) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

// Retries RateLimited/TransportError with exponential backoff + jitter.
// The returned attempt field reports the final attempt number.
LlmResponse with_retry(Backend& backend, const LlmRequest& request, const RetryPolicy& policy,
                       const std::function<void(int delay_ms)>& sleeper = {});

// Shared front door: replay read-through cache, bounded in-flight window,
// retry policy, accounting, and an optional JSONL exchange log.
class Gateway {
public:
    Gateway(std::unique_ptr<Backend> backend, RetryPolicy retry, int max_in_flight,
            std::optional<std::filesystem::path> cache_dir,
            std::optional<std::filesystem::path> log_path);
    ~Gateway();

    LlmResponse complete(const LlmRequest& request);
    GatewayStats stats() const;
    BackendKind backend_kind() const;

private:
    class Limiter;
    void log_exchange(const LlmRequest& request, const LlmResponse& response);

    std::unique_ptr<Backend> backend_;
    RetryPolicy retry_;
    std::optional<ReplayStore> cache_;
    std::optional<std::filesystem::path> log_path_;
    std::unique_ptr<Limiter> limiter_;
    mutable std::mutex stats_mu_;
    GatewayStats stats_;
    std::mutex log_mu_;
};

}  // namespace mloc::gateway
