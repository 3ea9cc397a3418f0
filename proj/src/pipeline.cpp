#include "citegate/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "citegate/calibration.hpp"

namespace citegate {

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::invalid_argument("unknown config key " + where + "." + key);
    }
}

void require_range(double v, double lo, double hi, const std::string& what) {
    if (!(v >= lo && v <= hi)) {
        throw std::invalid_argument(what + " must be in [" + std::to_string(lo) + "," +
                                    std::to_string(hi) + "]");
    }
}

}  // namespace

PipelineConfig load_config(const nlohmann::json& j) {
    PipelineConfig cfg;
    reject_unknown_keys(j,
                        {"similarity", "cascade", "thresholds", "suspicion_similarity_gate",
                         "reviewer_enabled", "verifier", "cache_path", "workers"},
                        "config");
    if (j.contains("similarity")) {
        const auto& s = j["similarity"];
        reject_unknown_keys(s,
                            {"min_title_similarity", "year_bonus_exact", "year_bonus_near",
                             "ranking_year_window"},
                            "similarity");
        cfg.similarity.min_title_similarity =
            s.value("min_title_similarity", cfg.similarity.min_title_similarity);
        cfg.similarity.year_bonus_exact =
            s.value("year_bonus_exact", cfg.similarity.year_bonus_exact);
        cfg.similarity.year_bonus_near =
            s.value("year_bonus_near", cfg.similarity.year_bonus_near);
        cfg.similarity.ranking_year_window =
            s.value("ranking_year_window", cfg.similarity.ranking_year_window);
    }
    cfg.cascade.min_title_similarity = cfg.similarity.min_title_similarity;
    if (j.contains("cascade")) {
        const auto& c = j["cascade"];
        reject_unknown_keys(c,
                            {"enable_arxiv_direct", "enable_web_search", "min_title_similarity",
                             "crossref_confidence_gate", "s2_confidence_bonus_cap",
                             "openalex_confidence_bonus_cap", "arxiv_direct_confidence",
                             "per_stage_limit"},
                            "cascade");
        cfg.cascade.enable_arxiv_direct =
            c.value("enable_arxiv_direct", cfg.cascade.enable_arxiv_direct);
        cfg.cascade.enable_web_search =
            c.value("enable_web_search", cfg.cascade.enable_web_search);
        cfg.cascade.min_title_similarity =
            c.value("min_title_similarity", cfg.cascade.min_title_similarity);
        cfg.cascade.crossref_confidence_gate =
            c.value("crossref_confidence_gate", cfg.cascade.crossref_confidence_gate);
        cfg.cascade.s2_confidence_bonus_cap =
            c.value("s2_confidence_bonus_cap", cfg.cascade.s2_confidence_bonus_cap);
        cfg.cascade.openalex_confidence_bonus_cap =
            c.value("openalex_confidence_bonus_cap", cfg.cascade.openalex_confidence_bonus_cap);
        cfg.cascade.arxiv_direct_confidence =
            c.value("arxiv_direct_confidence", cfg.cascade.arxiv_direct_confidence);
        cfg.cascade.per_stage_limit = c.value("per_stage_limit", cfg.cascade.per_stage_limit);
    }
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        reject_unknown_keys(t, {"tau_m", "tau_e"}, "thresholds");
        cfg.thresholds.tau_m = t.value("tau_m", cfg.thresholds.tau_m);
        cfg.thresholds.tau_e = t.value("tau_e", cfg.thresholds.tau_e);
    }
    cfg.suspicion_similarity_gate =
        j.value("suspicion_similarity_gate", cfg.suspicion_similarity_gate);
    cfg.reviewer_enabled = j.value("reviewer_enabled", cfg.reviewer_enabled);
    if (j.contains("verifier")) {
        const auto& v = j["verifier"];
        reject_unknown_keys(v, {"backend", "model", "temperature", "base_url"}, "verifier");
        cfg.verifier.backend = v.value("backend", cfg.verifier.backend);
        cfg.verifier.model = v.value("model", cfg.verifier.model);
        cfg.verifier.temperature = v.value("temperature", cfg.verifier.temperature);
        cfg.verifier.base_url = v.value("base_url", cfg.verifier.base_url);
    }
    if (j.contains("cache_path") && !j["cache_path"].is_null()) {
        cfg.cache_path = j["cache_path"].get<std::string>();
    }
    cfg.workers = j.value("workers", cfg.workers);

    require_range(cfg.similarity.min_title_similarity, 0, 100, "similarity.min_title_similarity");
    require_range(cfg.cascade.min_title_similarity, 0, 100, "cascade.min_title_similarity");
    require_range(cfg.cascade.crossref_confidence_gate, 0, 100,
                  "cascade.crossref_confidence_gate");
    require_range(cfg.cascade.s2_confidence_bonus_cap, 0, 100, "cascade.s2_confidence_bonus_cap");
    require_range(cfg.cascade.openalex_confidence_bonus_cap, 0, 100,
                  "cascade.openalex_confidence_bonus_cap");
    require_range(cfg.cascade.arxiv_direct_confidence, 0, 100,
                  "cascade.arxiv_direct_confidence");
    require_range(cfg.thresholds.tau_m, 0, 10, "thresholds.tau_m");
    require_range(cfg.thresholds.tau_e, 0, 10, "thresholds.tau_e");
    if (cfg.thresholds.tau_m > cfg.thresholds.tau_e) {
        throw std::invalid_argument("thresholds.tau_m must not exceed thresholds.tau_e");
    }
    require_range(cfg.suspicion_similarity_gate, 0, 100, "suspicion_similarity_gate");
    if (cfg.cascade.per_stage_limit < 1) {
        throw std::invalid_argument("cascade.per_stage_limit must be >= 1");
    }
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
    return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return load_config(j);
}

// ---------------------------------------------------------------------------
// CachingClient
// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

CachingClient::CachingClient(SourceClient& inner, std::string cache_dir)
    : inner_(inner), cache_dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(cache_dir_);
}

Source CachingClient::name() const { return inner_.name(); }

std::string CachingClient::key_path(const std::string& kind, const std::string& key) const {
    const std::string full = to_string(inner_.name()) + "|" + kind + "|" + key;
    return cache_dir_ + "/" + hex64(fnv1a(full)) + ".json";
}

SearchResult CachingClient::search(const std::string& query, std::optional<int> year,
                                   std::size_t limit) {
    const std::string path = key_path("search", normalize_for_compare(query));
    {
        std::ifstream in(path);
        if (in) {
            nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
            if (!j.is_discarded() && j.contains("candidates")) {
                return SearchResult{
                    j["candidates"].get<std::vector<CandidatePublication>>(), Millis{0}};
            }
        }
    }
    SearchResult result = inner_.search(query, year, limit);
    if (result.ok()) {
        nlohmann::json j{{"candidates", result.candidates()}};
        std::ofstream out(path, std::ios::trunc);
        out << j.dump();
    }
    return result;
}

LookupResult CachingClient::lookup_id(const std::string& id) {
    const std::string path = key_path("lookup", id);
    {
        std::ifstream in(path);
        if (in) {
            nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
            if (!j.is_discarded() && j.contains("candidate")) {
                std::optional<CandidatePublication> cand;
                if (!j["candidate"].is_null()) {
                    cand = j["candidate"].get<CandidatePublication>();
                }
                return LookupResult{std::move(cand), Millis{0}};
            }
        }
    }
    LookupResult result = inner_.lookup_id(id);
    if (result.ok()) {
        nlohmann::json j;
        if (result.candidate().has_value()) {
            j["candidate"] = *result.candidate();
        } else {
            j["candidate"] = nullptr;
        }
        std::ofstream out(path, std::ios::trunc);
        out << j.dump();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

bool is_failure_flag(const std::string& flag) {
    return flag.rfind("source_error", 0) == 0 || flag == kFlagVerifierError ||
           flag == kFlagReviewerError;
}

}  // namespace

LabeledVerdict run_pipeline(const RawCitation& raw, const PipelineConfig& cfg,
                            const ClientMap& clients, VerifierBackend& verifier_backend,
                            FallbackParser* fallback_parser) {
    LabeledVerdict verdict;
    verdict.thresholds = cfg.thresholds;

    const ParsedCitation parsed = parse_with_fallback(raw.text, fallback_parser);
    if (parsed.parse_method == ParseMethod::failed) {
        verdict.flags.push_back(kFlagParseFailed);
    }

    verdict.match = retrieve_best(parsed, raw, clients, cfg.cascade, cfg.similarity);
    for (const auto& rec : verdict.match.stage_records) {
        if (rec.error.has_value()) {
            verdict.flags.push_back("source_error:" + to_string(rec.stage) + ":" + *rec.error);
        }
    }
    for (const auto& flag : verdict.match.fallback_flags) verdict.flags.push_back(flag);

    if (!verdict.match.has_candidate()) {
        // nothing sufficiently similar was retrievable
        verdict.label = Label::major;
        verdict.score = 0.0;
        verdict.reasoning = "no sufficiently similar publication found";
        verdict.flags.push_back(kFlagNotFound);
        return verdict;
    }

    auto outcome = verify(parsed, raw, verdict.match, verifier_backend);
    if (outcome.index() == 1) {
        // unverifiable: treat as unsupported
        verdict.label = Label::major;
        verdict.score = 0.0;
        verdict.reasoning = "verification failed: " + std::get<1>(outcome).detail;
        verdict.flags.push_back(kFlagVerifierError);
        return verdict;
    }

    const VerifyOutcome& vo = std::get<0>(outcome);
    for (const auto& w : vo.warnings) verdict.flags.push_back(w);
    verdict.score = vo.verdict.score;
    verdict.reasoning = vo.verdict.reasoning;
    verdict.key_differences = vo.verdict.key_differences;
    verdict.label = assign_label(verdict.score, cfg.thresholds);

    const SuspicionConfig suspicion{cfg.suspicion_similarity_gate};
    if (cfg.reviewer_enabled && is_suspicious(verdict.match, suspicion)) {
        verdict.flags.push_back(kFlagSuspiciousIdentifierMatch);
        verdict.reviewer_applied = true;
        const ReviewOutcome review_outcome =
            review(raw.text, parsed, verdict.match, vo.verdict, verdict.label,
                   cfg.thresholds, verifier_backend);
        if (review_outcome.backend_failed) {
            verdict.flags.push_back(kFlagReviewerError);
        } else if (review_outcome.overrode) {
            verdict.reviewer_overrode = true;
            verdict.label = review_outcome.final_label;
            verdict.score = review_outcome.final_score;
            verdict.reasoning = review_outcome.reviewer_reasoning;
            verdict.flags.push_back(kFlagReviewerOverride);
        }
    }
    return verdict;
}

BatchResult run_batch(const std::vector<RawCitation>& dataset, const PipelineConfig& cfg,
                      const ClientMap& clients, VerifierBackend& verifier_backend,
                      FallbackParser* fallback_parser) {
    BatchResult result;
    result.verdicts.resize(dataset.size());
    if (dataset.empty()) return result;

    const auto n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), dataset.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= dataset.size()) return;
            result.verdicts[i] =
                run_pipeline(dataset[i], cfg, clients, verifier_backend, fallback_parser);
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (const auto& verdict : result.verdicts) {
        const bool flagged = std::any_of(verdict.flags.begin(), verdict.flags.end(),
                                         [](const std::string& f) { return is_failure_flag(f); });
        if (flagged) ++result.flagged;
    }
    return result;
}

nlohmann::json verdict_to_record(const std::string& id, const LabeledVerdict& verdict) {
    nlohmann::json j;
    j["id"] = id;
    j["label"] = to_string(verdict.label);
    j["score"] = verdict.score;
    j["reasoning"] = verdict.reasoning;
    j["key_differences"] = verdict.key_differences;
    j["match_method"] = to_string(verdict.match.match_method);
    if (verdict.match.has_candidate()) {
        j["matched_title"] = verdict.match.candidate->title;
        j["matched_source"] = to_string(verdict.match.candidate->source);
    } else {
        j["matched_title"] = nullptr;
        j["matched_source"] = nullptr;
    }
    j["title_similarity"] = verdict.match.title_similarity;
    j["reviewer_applied"] = verdict.reviewer_applied;
    j["reviewer_overrode"] = verdict.reviewer_overrode;
    j["stage_timings_ms"] = verdict.match.stage_records;
    j["flags"] = verdict.flags;
    return j;
}

}  // namespace citegate
