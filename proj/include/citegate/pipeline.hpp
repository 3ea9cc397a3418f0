#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citegate/cascade.hpp"
#include "citegate/model.hpp"
#include "citegate/parser.hpp"
#include "citegate/sources.hpp"
#include "citegate/textnorm.hpp"
#include "citegate/verifier.hpp"

namespace citegate {

struct VerifierSelection {
    std::string backend = "mock";  // "mock" | "openai"
    std::string model;
    double temperature = 0.0;
    std::string base_url;
};

struct PipelineConfig {
    SimilarityConfig similarity;
    CascadeConfig cascade;
    Thresholds thresholds;  // defaults are the shipped tuned pair
    double suspicion_similarity_gate = 70.0;
    bool reviewer_enabled = true;
    VerifierSelection verifier;
    std::optional<std::string> cache_path;
    int workers = 4;
};

// Reads a JSON config document; unknown keys are rejected to catch typos.
// cascade.min_title_similarity mirrors similarity.min_title_similarity.
PipelineConfig load_config(const nlohmann::json& j);
PipelineConfig load_config_file(const std::string& path);

// Diagnostic flags attached to verdicts.
inline constexpr const char* kFlagParseFailed = "parse_failed";
inline constexpr const char* kFlagVerifierError = "verifier_error";
inline constexpr const char* kFlagReviewerError = "reviewer_error";
inline constexpr const char* kFlagNotFound = "not_found";
inline constexpr const char* kFlagSuspiciousIdentifierMatch = "suspicious_identifier_match";
inline constexpr const char* kFlagReviewerOverride = "reviewer_override";

// Key-addressed candidate cache wrapped around a source client. Hits are
// reported with zero elapsed time, so caching can only change latency
// fields, never labels or scores.
class CachingClient : public SourceClient {
  public:
    CachingClient(SourceClient& inner, std::string cache_dir);
    Source name() const override;
    SearchResult search(const std::string& query, std::optional<int> year,
                        std::size_t limit) override;
    LookupResult lookup_id(const std::string& id) override;

  private:
    std::string key_path(const std::string& kind, const std::string& key) const;
    SourceClient& inner_;
    std::string cache_dir_;
};

// Full single-citation pipeline: parse -> query -> cascade -> verify ->
// threshold label -> reviewer pass for suspicious identifier matches. Never
// throws on data; every failure mode maps to a labeled verdict with
// diagnostic flags.
LabeledVerdict run_pipeline(const RawCitation& raw, const PipelineConfig& cfg,
                            const ClientMap& clients, VerifierBackend& verifier_backend,
                            FallbackParser* fallback_parser = nullptr);

struct BatchResult {
    std::vector<LabeledVerdict> verdicts;  // input order
    std::size_t flagged = 0;               // verdicts carrying diagnostic flags
};

// Bounded worker pool over the dataset; verdict order matches input order.
BatchResult run_batch(const std::vector<RawCitation>& dataset, const PipelineConfig& cfg,
                      const ClientMap& clients, VerifierBackend& verifier_backend,
                      FallbackParser* fallback_parser = nullptr);

// Verdict JSONL record (field names are the file-format contract).
nlohmann::json verdict_to_record(const std::string& id, const LabeledVerdict& verdict);

}  // namespace citegate
