#include "citegate/sources.hpp"

#include <fstream>
#include <stdexcept>
#include <thread>

#include "citegate/parser.hpp"
#include "citegate/textnorm.hpp"

namespace citegate {

std::string to_string(SourceError::Kind kind) {
    switch (kind) {
        case SourceError::Kind::timeout: return "timeout";
        case SourceError::Kind::rate_limited: return "rate_limited";
        case SourceError::Kind::transport: return "transport";
        case SourceError::Kind::malformed_response: return "malformed_response";
    }
    throw std::logic_error("unreachable error kind");
}

SourceError::Kind source_error_kind_from_string(const std::string& s) {
    if (s == "timeout") return SourceError::Kind::timeout;
    if (s == "rate_limited") return SourceError::Kind::rate_limited;
    if (s == "transport") return SourceError::Kind::transport;
    if (s == "malformed_response") return SourceError::Kind::malformed_response;
    throw std::invalid_argument("unknown source error kind: " + s);
}

LookupResult SourceClient::lookup_id(const std::string&) {
    return LookupResult{SourceError{name(), SourceError::Kind::transport,
                                    "identifier lookup not supported by this source"}};
}

LookupResult lookup_arxiv(SourceClient& client, const std::string& id) {
    if (!is_arxiv_id(id)) {
        throw std::invalid_argument("not an arXiv id: " + id);
    }
    LookupResult result = client.lookup_id(id);
    if (result.ok() && result.candidate().has_value()) {
        auto cand = *result.candidate();
        cand.source = Source::arxiv;
        cand.arxiv_id = id;
        result.outcome = std::optional<CandidatePublication>{std::move(cand)};
    }
    return result;
}

SearchResult web_search(SourceClient& client, const std::string& query, std::size_t limit) {
    SearchResult result = client.search(query, std::nullopt, limit);
    if (!result.ok()) return result;
    std::vector<CandidatePublication> kept;
    for (const auto& cand : result.candidates()) {
        if (normalize_for_compare(cand.title).empty()) continue;  // title required
        auto c = cand;
        c.source = Source::web_search;
        c.confidence = 0.0;
        kept.push_back(std::move(c));
    }
    result.outcome = std::move(kept);
    return result;
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

namespace {

class ScriptedClient : public SourceClient {
  public:
    ScriptedClient(ScriptedBackend& backend, Source source)
        : backend_(backend), source_(source) {}

    Source name() const override { return source_; }

    SearchResult search(const std::string& query, std::optional<int>,
                        std::size_t limit) override {
        return backend_.search(source_, query, limit);
    }

    LookupResult lookup_id(const std::string& id) override {
        return backend_.lookup(source_, id);
    }

  private:
    ScriptedBackend& backend_;
    Source source_;
};

}  // namespace

void ScriptedBackend::load(const nlohmann::json& fixtures) {
    for (const auto& [source_name, tables] : fixtures.items()) {
        const Source source = source_from_string(source_name);
        if (tables.contains("latency_ms")) {
            set_latency(source, Millis{tables.at("latency_ms").get<std::int64_t>()});
        }
        if (tables.contains("search")) {
            for (const auto& [query, value] : tables.at("search").items()) {
                if (value.is_object() && value.contains("error")) {
                    add_search_error(
                        source, query,
                        source_error_kind_from_string(value.at("error").get<std::string>()));
                } else {
                    auto cands = value.get<std::vector<CandidatePublication>>();
                    for (auto& c : cands) c.source = source;
                    add_search_fixture(source, query, std::move(cands));
                }
            }
        }
        if (tables.contains("lookup")) {
            for (const auto& [id, value] : tables.at("lookup").items()) {
                if (value.is_object() && value.contains("error")) {
                    add_lookup_error(
                        source, id,
                        source_error_kind_from_string(value.at("error").get<std::string>()));
                } else if (value.is_null()) {
                    add_lookup_fixture(source, id, std::nullopt);
                } else {
                    auto cand = value.get<CandidatePublication>();
                    cand.source = source;
                    add_lookup_fixture(source, id, std::move(cand));
                }
            }
        }
    }
}

void ScriptedBackend::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file: " + path);
    nlohmann::json j;
    in >> j;
    load(j);
}

void ScriptedBackend::add_search_fixture(Source source, const std::string& query,
                                         std::vector<CandidatePublication> candidates) {
    std::lock_guard lock(mutex_);
    Entry entry;
    entry.candidates = std::move(candidates);
    search_fixtures_[source][query == "*" ? query : normalize_for_compare(query)] =
        std::move(entry);
}

void ScriptedBackend::add_search_error(Source source, const std::string& query,
                                       SourceError::Kind kind) {
    std::lock_guard lock(mutex_);
    Entry entry;
    entry.error = kind;
    search_fixtures_[source][query == "*" ? query : normalize_for_compare(query)] =
        std::move(entry);
}

void ScriptedBackend::add_lookup_fixture(Source source, const std::string& id,
                                         std::optional<CandidatePublication> candidate) {
    std::lock_guard lock(mutex_);
    Entry entry;
    entry.single = std::move(candidate);
    entry.single_present = true;
    lookup_fixtures_[source][id] = std::move(entry);
}

void ScriptedBackend::add_lookup_error(Source source, const std::string& id,
                                       SourceError::Kind kind) {
    std::lock_guard lock(mutex_);
    Entry entry;
    entry.error = kind;
    lookup_fixtures_[source][id] = std::move(entry);
}

void ScriptedBackend::set_latency(Source source, Millis latency) {
    std::lock_guard lock(mutex_);
    latencies_[source] = latency;
}

const ScriptedBackend::Entry* ScriptedBackend::find(const std::map<std::string, Entry>& table,
                                                    const std::string& key) const {
    auto it = table.find(key);
    if (it != table.end()) return &it->second;
    it = table.find("*");
    if (it != table.end()) return &it->second;
    return nullptr;
}

SearchResult ScriptedBackend::search(Source source, const std::string& query,
                                     std::size_t limit) {
    std::lock_guard lock(mutex_);
    call_log_.push_back({source, "search", query, std::chrono::steady_clock::now()});
    Millis latency{0};
    if (auto it = latencies_.find(source); it != latencies_.end()) latency = it->second;

    const Entry* entry = nullptr;
    if (auto it = search_fixtures_.find(source); it != search_fixtures_.end()) {
        entry = find(it->second, normalize_for_compare(query));
    }
    if (entry == nullptr) return SearchResult{std::vector<CandidatePublication>{}, latency};
    if (entry->error.has_value()) {
        return SearchResult{SourceError{source, *entry->error, "injected"}, latency};
    }
    auto cands = entry->candidates.value_or(std::vector<CandidatePublication>{});
    if (cands.size() > limit) cands.resize(limit);
    return SearchResult{std::move(cands), latency};
}

LookupResult ScriptedBackend::lookup(Source source, const std::string& id) {
    std::lock_guard lock(mutex_);
    call_log_.push_back({source, "lookup", id, std::chrono::steady_clock::now()});
    Millis latency{0};
    if (auto it = latencies_.find(source); it != latencies_.end()) latency = it->second;

    const Entry* entry = nullptr;
    if (auto it = lookup_fixtures_.find(source); it != lookup_fixtures_.end()) {
        entry = find(it->second, id);
    }
    if (entry == nullptr) return LookupResult{std::optional<CandidatePublication>{}, latency};
    if (entry->error.has_value()) {
        return LookupResult{SourceError{source, *entry->error, "injected"}, latency};
    }
    return LookupResult{entry->single, latency};
}

std::vector<CallRecord> ScriptedBackend::call_log() const {
    std::lock_guard lock(mutex_);
    return call_log_;
}

void ScriptedBackend::clear_call_log() {
    std::lock_guard lock(mutex_);
    call_log_.clear();
}

std::unique_ptr<SourceClient> ScriptedBackend::client_for(Source source) {
    return std::make_unique<ScriptedClient>(*this, source);
}

// ---------------------------------------------------------------------------
// RateLimiter / retries
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(std::size_t max_calls, Millis window)
    : max_calls_(max_calls), window_(window) {}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        while (!recent_.empty() && now - recent_.front() >= window_) recent_.pop_front();
        if (recent_.size() < max_calls_) {
            recent_.push_back(now);
            return;
        }
        const auto wake_at = recent_.front() + window_;
        cv_.wait_until(lock, wake_at);
    }
}

template <typename T>
SourceOutcome<T> with_retries(const std::function<SourceOutcome<T>()>& fn,
                              const RetryPolicy& policy,
                              const std::function<void(Millis)>& sleep_fn) {
    Millis backoff = policy.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        SourceOutcome<T> outcome = fn();
        if (outcome.index() == 0) return outcome;
        const SourceError& err = std::get<1>(outcome);
        const bool retryable = err.kind == SourceError::Kind::timeout ||
                               err.kind == SourceError::Kind::transport;
        if (!retryable || attempt >= policy.max_retries) return outcome;
        sleep_fn(backoff);
        backoff = Millis{static_cast<std::int64_t>(
            static_cast<double>(backoff.count()) * policy.backoff_multiplier)};
    }
}

template SourceOutcome<std::vector<CandidatePublication>> with_retries(
    const std::function<SourceOutcome<std::vector<CandidatePublication>>()>&,
    const RetryPolicy&, const std::function<void(Millis)>&);
template SourceOutcome<std::optional<CandidatePublication>> with_retries(
    const std::function<SourceOutcome<std::optional<CandidatePublication>>()>&,
    const RetryPolicy&, const std::function<void(Millis)>&);

RateLimitedClient::RateLimitedClient(std::unique_ptr<SourceClient> inner,
                                     std::shared_ptr<RateLimiter> limiter)
    : inner_(std::move(inner)), limiter_(std::move(limiter)) {}

Source RateLimitedClient::name() const { return inner_->name(); }

SearchResult RateLimitedClient::search(const std::string& query, std::optional<int> year,
                                       std::size_t limit) {
    limiter_->acquire();
    return inner_->search(query, year, limit);
}

LookupResult RateLimitedClient::lookup_id(const std::string& id) {
    limiter_->acquire();
    return inner_->lookup_id(id);
}

}  // namespace citegate
