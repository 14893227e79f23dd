#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include "core/error.hpp"
#include "core/gateway.hpp"
#include "core/util.hpp"
#include "support/tmpdir.hpp"

using namespace mloc;
using namespace mloc::gateway;

namespace {

LlmRequest request_for(const std::string& prompt) {
    LlmRequest r;
    r.prompt = prompt;
    r.model = "gpt-4.1";
    r.temperature = 0.0;
    r.max_output_tokens = 256;
    return r;
}

// Scripted backend: fails the first `failures` calls with the given code,
// then answers. Tracks concurrent entries for the limiter check.
class FlakyBackend final : public Backend {
public:
    FlakyBackend(int failures, ErrorCode code, int sleep_ms = 0)
        : failures_(failures), code_(code), sleep_ms_(sleep_ms) {}

    LlmResponse complete_once(const LlmRequest&) override {
        int now = ++in_flight_;
        int seen = peak_.load();
        while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
        }
        if (sleep_ms_ > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms_));
        }
        --in_flight_;
        if (calls_.fetch_add(1) < failures_) {
            throw Error(code_, "scripted failure");
        }
        LlmResponse r;
        r.text = "ok";
        r.backend = BackendKind::Mock;
        return r;
    }

    BackendKind kind() const override { return BackendKind::Mock; }

    int calls() const { return calls_.load(); }
    int peak() const { return peak_.load(); }

private:
    int failures_;
    ErrorCode code_;
    int sleep_ms_;
    std::atomic<int> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
};

}  // namespace

TEST_CASE("request digest is stable across processes and field-sensitive") {
    LlmRequest r = request_for("hello");
    // sha256("v1\ngpt-4.1\n0.000000\nhello"), computed independently
    CHECK(r.digest() == "50bcd95cd8ef68d0a6e85fa17868bcd40bebc78ab340fb7f83c75c4684234112");
    CHECK(r.digest() == request_for("hello").digest());

    LlmRequest other = request_for("hello");
    other.model = "phi-4";
    CHECK(other.digest() != r.digest());
    other = request_for("hello");
    other.temperature = 0.5;
    CHECK(other.digest() != r.digest());
    other = request_for("hello!");
    CHECK(other.digest() != r.digest());
    // force_refresh is bookkeeping, not identity
    other = request_for("hello");
    other.force_refresh = true;
    CHECK(other.digest() == r.digest());
}

TEST_CASE("replay backend serves by digest and misses loudly") {
    testsupport::TmpDir tmp("replay");
    LlmRequest r = request_for("cached prompt");
    ReplayStore store(tmp.path());
    store.put(r.digest(), "stored answer");

    Gateway gw(make_replay_backend(tmp.path()), RetryPolicy{1, 0, 0}, 2, std::nullopt,
               std::nullopt);
    LlmResponse hit = gw.complete(r);
    CHECK(hit.text == "stored answer");
    CHECK(hit.backend == BackendKind::Replay);
    CHECK(hit.attempt == 1);
    CHECK(gw.stats().replay_hits == 1);

    try {
        gw.complete(request_for("never seen"));
        FAIL("expected CacheMiss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CacheMiss);
    }
}

TEST_CASE("mock rules match on contains/lacks in order") {
    std::vector<MockRule> rules = parse_mock_rules(R"([
        {"name": "specific", "contains": ["Lx/Y;", "Privacy"], "lacks": ["Possible"],
         "response": "IS_MALICIOUS: yes"},
        {"name": "fallback", "contains": [], "response": "IS_MALICIOUS: no"}
    ])");
    Gateway gw(make_mock_backend(rules), RetryPolicy{1, 0, 0}, 2, std::nullopt, std::nullopt);

    CHECK(gw.complete(request_for("class Lx/Y; Privacy desc")).text == "IS_MALICIOUS: yes");
    CHECK(gw.complete(request_for("class Lx/Y; Privacy with Possible list")).text ==
          "IS_MALICIOUS: no");
    CHECK(gw.complete(request_for("something else")).text == "IS_MALICIOUS: no");
    CHECK(gw.stats().mock_calls == 3);
}

TEST_CASE("unscripted mock raises MockUnscripted") {
    std::vector<MockRule> rules =
        parse_mock_rules(R"([{"contains": ["marker"], "response": "x"}])");
    Gateway gw(make_mock_backend(rules), RetryPolicy{1, 0, 0}, 2, std::nullopt, std::nullopt);
    try {
        gw.complete(request_for("no match here"));
        FAIL("expected MockUnscripted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MockUnscripted);
    }
}

TEST_CASE("scripted echo in the phase-1 grammar") {
    std::vector<MockRule> rules = parse_mock_rules(R"([
        {"contains": ["Lx/Benign;"],
         "response": "IS_MALICIOUS: no\nCONFIDENCE: 95\nEXPLANATION: benign utility"}
    ])");
    Gateway gw(make_mock_backend(rules), RetryPolicy{1, 0, 0}, 2, std::nullopt, std::nullopt);
    CHECK(gw.complete(request_for("analyze Lx/Benign; now")).text ==
          "IS_MALICIOUS: no\nCONFIDENCE: 95\nEXPLANATION: benign utility");
}

TEST_CASE("with_retry: two failures then success reports attempt 3") {
    FlakyBackend backend(2, ErrorCode::TransportError);
    LlmResponse r = with_retry(backend, request_for("p"), RetryPolicy{3, 0, 0});
    CHECK(r.attempt == 3);
    CHECK(backend.calls() == 3);
}

TEST_CASE("with_retry: single attempt fails immediately") {
    FlakyBackend backend(1, ErrorCode::RateLimited);
    try {
        with_retry(backend, request_for("p"), RetryPolicy{1, 0, 0});
        FAIL("expected RateLimited");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RateLimited);
    }
    CHECK(backend.calls() == 1);
}

TEST_CASE("with_retry: AuthMissing is not retried") {
    FlakyBackend backend(5, ErrorCode::AuthMissing);
    try {
        with_retry(backend, request_for("p"), RetryPolicy{4, 0, 0});
        FAIL("expected AuthMissing");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AuthMissing);
    }
    CHECK(backend.calls() == 1);
}

TEST_CASE("with_retry backoff grows exponentially") {
    FlakyBackend backend(3, ErrorCode::TransportError);
    std::vector<int> delays;
    with_retry(backend, request_for("p"), RetryPolicy{4, 100, 0},
               [&delays](int d) { delays.push_back(d); });
    REQUIRE(delays.size() == 3);
    CHECK(delays[0] == 100);
    CHECK(delays[1] == 200);
    CHECK(delays[2] == 400);
}

TEST_CASE("cache write-through: second identical request skips the backend") {
    testsupport::TmpDir tmp("cache");
    auto backend = std::make_unique<FlakyBackend>(0, ErrorCode::TransportError);
    FlakyBackend* raw = backend.get();
    // backend reports kind mock; wrap it under http semantics by putting
    // the store in front: only http responses are cached, so emulate via
    // ReplayStore directly plus the gateway read path
    LlmRequest r = request_for("will be cached");
    ReplayStore store(tmp.path());
    store.put(r.digest(), "canned");

    Gateway gw(std::move(backend), RetryPolicy{1, 0, 0}, 2, tmp.path(), std::nullopt);
    LlmResponse first = gw.complete(r);
    CHECK(first.backend == BackendKind::Replay);
    CHECK(first.text == "canned");
    CHECK(raw->calls() == 0);

    // force_refresh bypasses the cache read
    r.force_refresh = true;
    LlmResponse fresh = gw.complete(r);
    CHECK(fresh.text == "ok");
    CHECK(raw->calls() == 1);
}

TEST_CASE("bounded concurrency: at most max_in_flight backend calls at once") {
    auto backend = std::make_unique<FlakyBackend>(0, ErrorCode::TransportError, 20);
    FlakyBackend* raw = backend.get();
    Gateway gw(std::move(backend), RetryPolicy{1, 0, 0}, 3, std::nullopt, std::nullopt);

    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i) {
        threads.emplace_back(
            [&gw, i] { gw.complete(request_for("p" + std::to_string(i))); });
    }
    for (auto& t : threads) t.join();
    CHECK(raw->calls() == 12);
    CHECK(raw->peak() <= 3);
    CHECK(gw.stats().peak_in_flight <= 3);
    CHECK(gw.stats().peak_in_flight >= 1);
}

TEST_CASE("exchange log records one line per complete") {
    testsupport::TmpDir tmp("log");
    std::vector<MockRule> rules = parse_mock_rules(R"([{"contains": [], "response": "x"}])");
    auto log_path = tmp.file("gateway.jsonl");
    Gateway gw(make_mock_backend(rules), RetryPolicy{1, 0, 0}, 2, std::nullopt, log_path);
    gw.complete(request_for("a"));
    gw.complete(request_for("b"));
    std::string log = read_file(log_path);
    CHECK(std::count(log.begin(), log.end(), '\n') == 2);
    CHECK(log.find("\"backend\":\"mock\"") != std::string::npos);
}
