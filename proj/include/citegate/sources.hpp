#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "citegate/model.hpp"

namespace citegate {

// Transport and protocol failures are data, not control flow: the cascade
// records them in the stage trace and moves on.
struct SourceError {
    Source source = Source::crossref;
    enum class Kind { timeout, rate_limited, transport, malformed_response } kind = Kind::transport;
    std::string detail;
};

std::string to_string(SourceError::Kind kind);
SourceError::Kind source_error_kind_from_string(const std::string& s);

template <typename T>
using SourceOutcome = std::variant<T, SourceError>;

// Clients self-report the wall time of each call so that scripted backends
// stay fully deterministic (fixtures may plant latencies).
struct SearchResult {
    SourceOutcome<std::vector<CandidatePublication>> outcome;
    Millis elapsed{0};

    bool ok() const { return outcome.index() == 0; }
    const std::vector<CandidatePublication>& candidates() const {
        return std::get<0>(outcome);
    }
    const SourceError& error() const { return std::get<1>(outcome); }
};

struct LookupResult {
    SourceOutcome<std::optional<CandidatePublication>> outcome;
    Millis elapsed{0};

    bool ok() const { return outcome.index() == 0; }
    const std::optional<CandidatePublication>& candidate() const {
        return std::get<0>(outcome);
    }
    const SourceError& error() const { return std::get<1>(outcome); }
};

// Uniform interface over the five retrieval stages. search() never throws;
// failures surface as SourceError outcomes. Returned candidates carry
// source = name().
class SourceClient {
  public:
    virtual ~SourceClient() = default;
    virtual Source name() const = 0;
    virtual SearchResult search(const std::string& query, std::optional<int> year,
                                std::size_t limit) = 0;
    // Direct identifier resolution; meaningful for the arXiv adapter only.
    // An unknown id is an absent result, not an error. The id must already
    // match the arXiv id shape.
    virtual LookupResult lookup_id(const std::string& id);
};

// Direct arXiv resolution through a client. Throws std::invalid_argument
// when the id does not match the arXiv id shape (callers gate on shape
// before issuing any call). A resolved candidate always carries
// arxiv_id = id.
LookupResult lookup_arxiv(SourceClient& client, const std::string& id);

// Search wrapper for the web stage: candidates without a recoverable title
// are dropped, source is forced to web_search, and confidence is left at 0
// for the cascade to assign from title similarity.
SearchResult web_search(SourceClient& client, const std::string& query, std::size_t limit);

// ---------------------------------------------------------------------------
// Scripted backend: a fixture store shared by per-source mock clients.
//
// Fixture file shape (JSON):
//   { "<source>": {
//       "search": { "<normalized query>": [candidate, ...] | {"error": "<kind>"},
//                   "*": ... },
//       "lookup": { "<id>": candidate | null | {"error": "<kind>"} },
//       "latency_ms": 0 } }
// Search keys are matched after normalize_for_compare; "*" matches any
// query. Unmatched queries return empty result lists; unmatched ids resolve
// to absent.
// ---------------------------------------------------------------------------

struct CallRecord {
    Source source;
    std::string kind;  // "search" | "lookup"
    std::string query;
    std::chrono::steady_clock::time_point at;
};

class ScriptedBackend {
  public:
    ScriptedBackend() = default;

    // Merges fixture entries into this backend.
    void load(const nlohmann::json& fixtures);
    void load_file(const std::string& path);

    void add_search_fixture(Source source, const std::string& query,
                            std::vector<CandidatePublication> candidates);
    void add_search_error(Source source, const std::string& query, SourceError::Kind kind);
    void add_lookup_fixture(Source source, const std::string& id,
                            std::optional<CandidatePublication> candidate);
    void add_lookup_error(Source source, const std::string& id, SourceError::Kind kind);
    void set_latency(Source source, Millis latency);

    SearchResult search(Source source, const std::string& query, std::size_t limit);
    LookupResult lookup(Source source, const std::string& id);

    std::vector<CallRecord> call_log() const;
    void clear_call_log();

    // A scripted SourceClient for one stage, viewing this backend. The
    // backend must outlive the returned client.
    std::unique_ptr<SourceClient> client_for(Source source);

  private:
    struct Entry {
        std::optional<std::vector<CandidatePublication>> candidates;
        std::optional<CandidatePublication> single;
        bool single_present = false;
        std::optional<SourceError::Kind> error;
    };

    const Entry* find(const std::map<std::string, Entry>& table, const std::string& key) const;

    mutable std::mutex mutex_;
    std::map<Source, std::map<std::string, Entry>> search_fixtures_;
    std::map<Source, std::map<std::string, Entry>> lookup_fixtures_;
    std::map<Source, Millis> latencies_;
    std::vector<CallRecord> call_log_;
};

// ---------------------------------------------------------------------------
// Rate limiting and retries
// ---------------------------------------------------------------------------

// Sliding-window limiter: at most max_calls acquisitions per window.
// acquire() blocks until a slot opens. Shared per source across workers.
class RateLimiter {
  public:
    RateLimiter(std::size_t max_calls, Millis window);
    void acquire();

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t max_calls_;
    Millis window_;
    std::deque<std::chrono::steady_clock::time_point> recent_;
};

struct RetryPolicy {
    int max_retries = 2;
    Millis initial_backoff{250};
    double backoff_multiplier = 2.0;
};

// Runs fn until it succeeds or retries are exhausted. Only timeout and
// transport errors are retried; rate_limited and malformed_response are
// returned immediately.
template <typename T>
SourceOutcome<T> with_retries(const std::function<SourceOutcome<T>()>& fn,
                              const RetryPolicy& policy,
                              const std::function<void(Millis)>& sleep_fn);

// Decorator that runs every call through a shared rate limiter.
class RateLimitedClient : public SourceClient {
  public:
    RateLimitedClient(std::unique_ptr<SourceClient> inner, std::shared_ptr<RateLimiter> limiter);
    Source name() const override;
    SearchResult search(const std::string& query, std::optional<int> year,
                        std::size_t limit) override;
    LookupResult lookup_id(const std::string& id) override;

  private:
    std::unique_ptr<SourceClient> inner_;
    std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace citegate
