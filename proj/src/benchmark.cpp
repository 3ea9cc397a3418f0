#include "citegate/benchmark.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include "citegate/parser.hpp"
#include "citegate/prompts.hpp"

namespace citegate {

std::string to_string(CorruptionKind kind) {
    return kind == CorruptionKind::minor ? "minor" : "major";
}

double corruption_temperature(CorruptionKind kind) {
    return kind == CorruptionKind::minor ? 0.7 : 0.9;
}

std::string render_corruption_prompt(CorruptionKind kind, const std::string& topic,
                                     const std::string& subtopic) {
    if (kind == CorruptionKind::minor) {
        return std::string{prompts::kMinorCorruptionTemplate};
    }
    std::string prompt{prompts::kMajorCorruptionTemplate};
    const auto replace_all = [&prompt](const std::string& token, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = prompt.find(token, pos)) != std::string::npos) {
            prompt.replace(pos, token.size(), value);
            pos += value.size();
        }
    };
    replace_all("{subtopic}", subtopic);
    replace_all("{topic}", topic);
    return prompt;
}

std::variant<std::vector<CorruptedCitation>, CorruptionFailure> EchoCorruptionBackend::corrupt(
    const CorruptionRequest& request) {
    std::vector<CorruptedCitation> out;
    out.reserve(request.batch.size());
    for (const auto& text : request.batch) out.push_back({text, "noop"});
    return out;
}

std::variant<std::vector<CorruptedCitation>, CorruptionFailure>
FailingCorruptionBackend::corrupt(const CorruptionRequest&) {
    ++calls_;
    return CorruptionFailure{"injected failure"};
}

namespace {

// Stable per-string value for picking deterministic fabrications (FNV-1a).
std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string bump_digit(const std::string& s) {
    std::string out = s;
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        if (*it >= '0' && *it <= '9') {
            *it = *it == '9' ? '0' : static_cast<char>(*it + 1);
            return out;
        }
    }
    return out;
}

const std::vector<std::string> kFabricatedLeads{
    "Nonlinear Drift Signatures in", "Spectral Cascade Anomalies of",
    "Topological Flux Inversion under", "Adaptive Resonance Mapping for",
    "Stochastic Lattice Reconstruction of"};
const std::vector<std::string> kFabricatedMethods{
    "the VortexPrime Framework", "the HaloQuanta Survey", "the DeltaForge Method",
    "the SpinTrace Protocol", "the MiraNet Benchmark"};
const std::vector<std::string> kFabricatedAuthors{
    "Hallbeck & Morrow", "Ostrander & Vail", "Quintrell & Sablan", "Ferber & Nyland",
    "Tarrowitz & Klemm"};

}  // namespace

std::variant<std::vector<CorruptedCitation>, CorruptionFailure> RuleCorruptionBackend::corrupt(
    const CorruptionRequest& request) {
    std::vector<CorruptedCitation> out;
    out.reserve(request.batch.size());
    for (const auto& text : request.batch) {
        const ParsedCitation parsed = parse_rule_based(text);
        const std::uint64_t h = stable_hash(text);
        if (request.kind == CorruptionKind::minor) {
            // Year bump plus an identifier digit edit; title left intact.
            std::string corrupted = text;
            std::string description;
            if (parsed.year.has_value()) {
                const std::string from = std::to_string(*parsed.year);
                const std::string to = std::to_string(*parsed.year + (h % 2 == 0 ? 1 : -1));
                const auto pos = corrupted.find(from);
                if (pos != std::string::npos) {
                    corrupted.replace(pos, from.size(), to);
                    description = "changed year " + from + " to " + to;
                }
            }
            if (parsed.arxiv_id.has_value()) {
                const std::string to = bump_digit(*parsed.arxiv_id);
                const auto pos = corrupted.find(*parsed.arxiv_id);
                if (pos != std::string::npos && to != *parsed.arxiv_id) {
                    corrupted.replace(pos, parsed.arxiv_id->size(), to);
                    if (!description.empty()) description += "; ";
                    description += "changed arXiv id " + *parsed.arxiv_id + " to " + to;
                }
            }
            if (corrupted == text) {
                // no editable field found; alter the URL domain instead
                const auto pos = corrupted.find("arxiv.org");
                if (pos != std::string::npos) {
                    corrupted.replace(pos, 9, "researchgate.net");
                    description = "changed URL domain arxiv.org to researchgate.net";
                }
            }
            out.push_back({corrupted, description.empty() ? "no-op edit" : description});
        } else {
            const auto& lead = kFabricatedLeads[h % kFabricatedLeads.size()];
            const auto& method = kFabricatedMethods[(h >> 8) % kFabricatedMethods.size()];
            const auto& authors = kFabricatedAuthors[(h >> 16) % kFabricatedAuthors.size()];
            const int year = parsed.year.value_or(2015) - 3 - static_cast<int>(h % 5);
            const std::string title =
                lead + " " + request.subtopic + " via " + method;
            std::string id = parsed.arxiv_id.value_or("1504.03274");
            id = bump_digit(bump_digit(id));
            const std::string corrupted = "[" + authors + ", " + std::to_string(year) +
                                          ", " + title + "](https://arxiv.org/abs/" + id +
                                          ")";
            out.push_back(
                {corrupted,
                 "fabricated title, authors, year, and identifier for a non-existent work"});
        }
    }
    return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    // Explicit Fisher-Yates with modulo draws: mt19937_64 output is specified
    // by the standard, so the permutation is identical on every platform.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Partition partition_collection(const std::vector<std::string>& ids, std::uint64_t seed) {
    if (ids.empty()) throw std::invalid_argument("empty id list");
    const std::size_t n = ids.size();
    const std::vector<std::size_t> perm = seeded_permutation(n, seed);
    const std::size_t third = n / 3;
    const std::size_t n_valid = n - 2 * third;  // remainder goes to valid
    Partition p;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& id = ids[perm[i]];
        if (i < n_valid) {
            p.valid.push_back(id);
        } else if (i < n_valid + third) {
            p.minor.push_back(id);
        } else {
            p.major.push_back(id);
        }
    }
    return p;
}

CorruptBatchResult corrupt_batch(const std::vector<RawCitation>& citations,
                                 CorruptionKind kind, const std::string& topic,
                                 const std::string& subtopic, CorruptionBackend& backend,
                                 const std::function<void(Millis)>& sleep_fn) {
    CorruptBatchResult result;
    if (citations.empty()) return result;

    CorruptionRequest request;
    request.prompt = render_corruption_prompt(kind, topic, subtopic);
    request.kind = kind;
    request.topic = topic;
    request.subtopic = subtopic;
    request.temperature = corruption_temperature(kind);
    for (const auto& c : citations) request.batch.push_back(c.text);

    std::function<void(Millis)> sleeper = sleep_fn;
    if (!sleeper) sleeper = [](Millis d) { std::this_thread::sleep_for(d); };
    std::optional<std::vector<CorruptedCitation>> generated;
    Millis backoff{500};
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto outcome = backend.corrupt(request);
        if (outcome.index() == 0 &&
            std::get<0>(outcome).size() == request.batch.size()) {
            generated = std::move(std::get<0>(outcome));
            break;
        }
        if (attempt + 1 < 3) sleeper(backoff);
        backoff *= 2;
    }

    const Label label = kind == CorruptionKind::minor ? Label::minor : Label::major;
    for (std::size_t i = 0; i < citations.size(); ++i) {
        BenchmarkRecord rec;
        rec.collection = citations[i].collection;
        rec.original = citations[i].text;
        if (generated.has_value()) {
            rec.corrupted = (*generated)[i].corrupted;
            rec.label = label;
            rec.change_description = (*generated)[i].change_description;
        } else {
            // generation failed after retries: keep the citation unchanged
            // and labeled valid rather than dropping it
            rec.corrupted = citations[i].text;
            rec.label = Label::exact;
            rec.change_description.clear();
        }
        result.records.push_back(std::move(rec));
    }
    if (!generated.has_value()) result.failed_batches = 1;
    return result;
}

BenchmarkSummary build_benchmark(
    const std::vector<RawCitation>& pool, std::uint64_t seed, CorruptionBackend& backend,
    const std::function<CollectionTopics(const std::string&)>& topics) {
    BenchmarkSummary summary;
    // group by collection, preserving first-appearance order
    std::vector<std::string> collection_order;
    std::map<std::string, std::vector<std::size_t>> by_collection;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        auto [it, inserted] = by_collection.try_emplace(pool[i].collection);
        if (inserted) collection_order.push_back(pool[i].collection);
        it->second.push_back(i);
    }

    for (const auto& collection : collection_order) {
        const auto& indices = by_collection[collection];
        std::vector<std::string> ids;
        std::map<std::string, std::size_t> id_to_index;
        for (std::size_t idx : indices) {
            ids.push_back(pool[idx].id);
            id_to_index[pool[idx].id] = idx;
        }
        const Partition part = partition_collection(ids, seed);

        const CollectionTopics ct =
            topics ? topics(collection) : CollectionTopics{collection, collection};
        std::vector<BenchmarkRecord> collection_records;

        for (const auto& id : part.valid) {
            const auto idx = id_to_index.at(id);
            BenchmarkRecord rec;
            rec.index = static_cast<std::int64_t>(idx);
            rec.collection = collection;
            rec.original = pool[idx].text;
            rec.corrupted = pool[idx].text;
            rec.label = Label::exact;
            collection_records.push_back(std::move(rec));
        }
        for (const CorruptionKind kind : {CorruptionKind::minor, CorruptionKind::major}) {
            const auto& bucket = kind == CorruptionKind::minor ? part.minor : part.major;
            std::vector<RawCitation> batch;
            for (const auto& id : bucket) batch.push_back(pool[id_to_index.at(id)]);
            auto batch_result = corrupt_batch(batch, kind, ct.topic, ct.subtopic, backend);
            summary.failed_batches += batch_result.failed_batches;
            for (std::size_t i = 0; i < batch_result.records.size(); ++i) {
                batch_result.records[i].index =
                    static_cast<std::int64_t>(id_to_index.at(bucket[i]));
                collection_records.push_back(std::move(batch_result.records[i]));
            }
        }
        std::sort(collection_records.begin(), collection_records.end(),
                  [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
                      return a.index < b.index;
                  });
        for (auto& rec : collection_records) {
            switch (rec.label) {
                case Label::exact: ++summary.n_valid; break;
                case Label::minor: ++summary.n_minor; break;
                case Label::major: ++summary.n_major; break;
            }
            summary.records.push_back(std::move(rec));
        }
    }
    return summary;
}

}  // namespace citegate
