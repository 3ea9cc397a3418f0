#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "citegate/model.hpp"

namespace citegate {

enum class VerdictClass { exact_match, minor_hallucination, major_hallucination };

std::string to_string(VerdictClass c);
VerdictClass verdict_class_from_string(const std::string& s);
Label label_of(VerdictClass c);
VerdictClass verdict_class_of(Label label);

// Structured first-pass judgment. All fields are required by the output
// schema.
struct VerifierVerdict {
    double score = 0.0;  // 0..10
    VerdictClass classification = VerdictClass::major_hallucination;
    std::string confidence;  // "low" | "medium" | "high"
    std::string reasoning;
    std::vector<std::string> key_differences;
};

struct ReviewOutcome {
    Label final_label = Label::major;
    double final_score = 0.0;
    std::string reviewer_reasoning;
    bool overrode = false;
    // The reviewer backend failed or answered off-schema; the first-pass
    // verdict stands and the pipeline records a diagnostic flag.
    bool backend_failed = false;
};

struct BackendError {
    std::string detail;
    std::string raw_output;
};

enum class SchemaTag { verifier, reviewer };

// Judge backend abstraction: receives a fully rendered prompt and answers
// with the structured fields for the given schema. Total: failures are
// error values, never exceptions.
class VerifierBackend {
  public:
    virtual ~VerifierBackend() = default;
    virtual std::variant<nlohmann::json, BackendError> judge(const std::string& prompt,
                                                             SchemaTag tag) = 0;
};

struct SuspicionConfig {
    double suspicion_similarity_gate = 70.0;
};

// Verifier prompt, fully substituted. Absent fields render as "N/A". The
// match must carry a candidate.
std::string render_verifier_prompt(const ParsedCitation& parsed, const RawCitation& raw,
                                   const MatchResult& match);

// Reviewer prompt for a suspicious identifier-based match.
std::string render_reviewer_prompt(const std::string& citation_raw_text,
                                   const ParsedCitation& parsed, const MatchResult& match,
                                   const VerifierVerdict& first, Label first_label);

struct VerificationError {
    std::string detail;
    std::string raw_output;
};

struct VerifyOutcome {
    VerifierVerdict verdict;
    std::vector<std::string> warnings;  // e.g. out-of-range score clamped
};

// Renders the prompt, consults the backend (one retry on invalid output),
// validates the five-field schema, and clamps out-of-range scores.
std::variant<VerifyOutcome, VerificationError> verify(const ParsedCitation& parsed,
                                                      const RawCitation& raw,
                                                      const MatchResult& match,
                                                      VerifierBackend& backend);

// True when the candidate came from an identifier-based source (arXiv direct
// or web search) and the title similarity is below the suspicion gate.
bool is_suspicious(const MatchResult& match, const SuspicionConfig& cfg);

// Representative score for a reviewer-assigned label: the midpoint of the
// label's threshold interval.
double representative_score(Label label, const Thresholds& thresholds);

// Second-pass review. On backend failure or malformed output, the first-pass
// verdict stands (overrode = false). The first-pass verdict is never
// mutated; callers keep it for audit.
ReviewOutcome review(const std::string& citation_raw_text, const ParsedCitation& parsed,
                     const MatchResult& match, const VerifierVerdict& first,
                     Label first_label, const Thresholds& thresholds,
                     VerifierBackend& backend);

// Deterministic in-tree judge: recovers the citation and candidate fields
// from the rendered prompt and scores their agreement (title similarity
// scaled to 0-10, penalties for year, author, and identifier mismatches).
// Mirrors the failure mode reviewers exist for: a matching identifier lifts
// a low-similarity score, and the reviewer path re-judges from the raw text
// on title/author agreement alone.
class RuleBasedVerifier : public VerifierBackend {
  public:
    std::variant<nlohmann::json, BackendError> judge(const std::string& prompt,
                                                     SchemaTag tag) override;
};

// Test double replaying canned responses in order; counts invocations.
class ScriptedVerifier : public VerifierBackend {
  public:
    void enqueue(nlohmann::json response);
    void enqueue_error(std::string detail);
    std::variant<nlohmann::json, BackendError> judge(const std::string& prompt,
                                                     SchemaTag tag) override;
    int calls() const { return calls_; }
    const std::vector<std::string>& prompts() const { return prompts_; }

  private:
    std::vector<std::variant<nlohmann::json, BackendError>> queue_;
    std::size_t next_ = 0;
    int calls_ = 0;
    std::vector<std::string> prompts_;
};

}  // namespace citegate
