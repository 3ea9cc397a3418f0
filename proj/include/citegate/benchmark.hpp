#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "citegate/model.hpp"

namespace citegate {

enum class CorruptionKind { minor, major };

std::string to_string(CorruptionKind kind);

struct CorruptionRequest {
    std::string prompt;  // rendered template for the kind
    std::vector<std::string> batch;
    CorruptionKind kind = CorruptionKind::minor;
    std::string topic;
    std::string subtopic;
    double temperature = 0.7;
};

struct CorruptedCitation {
    std::string corrupted;
    std::string change_description;
};

struct CorruptionFailure {
    std::string detail;
};

// Generator plug. Output aligns 1:1 with the request batch or reports a
// failure for the whole batch.
class CorruptionBackend {
  public:
    virtual ~CorruptionBackend() = default;
    virtual std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) = 0;
};

// Echoes every citation unchanged (degenerate but structurally valid).
class EchoCorruptionBackend : public CorruptionBackend {
  public:
    std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) override;
};

// Always fails; exercises the fallback-to-valid path.
class FailingCorruptionBackend : public CorruptionBackend {
  public:
    std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) override;
    int calls() const { return calls_; }

  private:
    int calls_ = 0;
};

// Deterministic offline corruptor: minor edits bump the year and perturb an
// identifier digit; major edits rewrite the title into a fabricated one and
// replace authors/identifiers. Useful for building synthetic benchmarks
// without a hosted model.
class RuleCorruptionBackend : public CorruptionBackend {
  public:
    std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) override;
};

// Temperatures per corruption regime.
double corruption_temperature(CorruptionKind kind);

// Prompt for a corruption batch: the minor template verbatim, or the major
// template with {subtopic}/{topic} substituted.
std::string render_corruption_prompt(CorruptionKind kind, const std::string& topic,
                                     const std::string& subtopic);

struct Partition {
    std::vector<std::string> valid;
    std::vector<std::string> minor;
    std::vector<std::string> major;
};

// Deterministic seeded permutation (Fisher-Yates over mt19937_64); the
// resulting order is frozen by a fixture test, so treat it as part of the
// file-format contract.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

// Seeded shuffle of ids, then a three-way split by shuffled order: valid
// block first (n - 2*floor(n/3) ids, i.e. the remainder skews toward
// valid), then minor and major blocks of floor(n/3) each. Throws on empty
// input.
Partition partition_collection(const std::vector<std::string>& ids, std::uint64_t seed);

struct CorruptBatchResult {
    std::vector<BenchmarkRecord> records;
    int failed_batches = 0;  // diagnostic: batches that fell back to valid
};

// Corrupts one batch through the backend (3 attempts with backoff). On
// exhaustion every citation is emitted unchanged and labeled exact rather
// than dropped. Output aligns 1:1 with the input.
CorruptBatchResult corrupt_batch(const std::vector<RawCitation>& citations,
                                 CorruptionKind kind, const std::string& topic,
                                 const std::string& subtopic, CorruptionBackend& backend,
                                 const std::function<void(Millis)>& sleep_fn = nullptr);

struct BenchmarkSummary {
    std::vector<BenchmarkRecord> records;
    std::size_t n_valid = 0;
    std::size_t n_minor = 0;
    std::size_t n_major = 0;
    int failed_batches = 0;
};

// Per-collection topic labels for the major-corruption prompt; when a
// collection is missing, both default to the collection id.
struct CollectionTopics {
    std::string topic;
    std::string subtopic;
};

// Partitions independently within each collection (collections keep their
// input order), corrupts the minor and major buckets, and passes the valid
// bucket through unchanged. Record indices are positions in the input pool,
// and records are ordered by collection, then index.
BenchmarkSummary build_benchmark(
    const std::vector<RawCitation>& pool, std::uint64_t seed, CorruptionBackend& backend,
    const std::function<CollectionTopics(const std::string&)>& topics = nullptr);

}  // namespace citegate
