#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "citegate/benchmark.hpp"
#include "citegate/prompts.hpp"

using namespace citegate;

namespace {

std::vector<std::string> ids_of(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
    return ids;
}

std::vector<RawCitation> pool_of(const std::vector<std::pair<std::string, std::size_t>>& spec) {
    std::vector<RawCitation> pool;
    std::size_t k = 0;
    for (const auto& [collection, count] : spec) {
        for (std::size_t i = 0; i < count; ++i) {
            RawCitation c;
            c.id = collection + "-" + std::to_string(i);
            c.collection = collection;
            c.text = "[Author" + std::to_string(k) + ", 2015, Title number " +
                     std::to_string(k) + "](https://arxiv.org/abs/1504.0" +
                     std::to_string(1000 + k) + ")";
            pool.push_back(c);
            ++k;
        }
    }
    return pool;
}

// Records every request for prompt/temperature assertions.
class RecordingBackend : public CorruptionBackend {
  public:
    std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) override {
        requests.push_back(request);
        std::vector<CorruptedCitation> out;
        for (const auto& text : request.batch) out.push_back({text, "noop"});
        return out;
    }
    std::vector<CorruptionRequest> requests;
};

class MisalignedBackend : public CorruptionBackend {
  public:
    std::variant<std::vector<CorruptedCitation>, CorruptionFailure> corrupt(
        const CorruptionRequest& request) override {
        ++calls;
        std::vector<CorruptedCitation> out;  // one short
        for (std::size_t i = 0; i + 1 < request.batch.size(); ++i) {
            out.push_back({request.batch[i], "x"});
        }
        return out;
    }
    int calls = 0;
};

const std::function<void(Millis)> kNoSleep = [](Millis) {};

}  // namespace

TEST_CASE("partition sizes follow the remainder-to-valid rule") {
    auto p10 = partition_collection(ids_of(10), 42);
    CHECK(p10.valid.size() == 4);
    CHECK(p10.minor.size() == 3);
    CHECK(p10.major.size() == 3);

    auto p3 = partition_collection(ids_of(3), 42);
    CHECK(p3.valid.size() == 1);
    CHECK(p3.minor.size() == 1);
    CHECK(p3.major.size() == 1);

    auto p5 = partition_collection(ids_of(5), 42);
    CHECK(p5.valid.size() == 3);
    CHECK(p5.minor.size() == 1);
    CHECK(p5.major.size() == 1);

    auto p1 = partition_collection(ids_of(1), 42);
    CHECK(p1.valid.size() == 1);
    CHECK(p1.minor.empty());
    CHECK(p1.major.empty());

    CHECK_THROWS_AS(partition_collection({}, 42), std::invalid_argument);
}

TEST_CASE("partition is a permutation of the input") {
    const auto ids = ids_of(17);
    const auto p = partition_collection(ids, 99);
    std::set<std::string> seen;
    for (const auto& bucket : {p.valid, p.minor, p.major}) {
        for (const auto& id : bucket) seen.insert(id);
    }
    CHECK(seen.size() == ids.size());
}

TEST_CASE("partition determinism: same seed same split, new seed new shuffle") {
    const auto ids = ids_of(30);
    const auto a = partition_collection(ids, 42);
    const auto b = partition_collection(ids, 42);
    CHECK(a.valid == b.valid);
    CHECK(a.minor == b.minor);
    CHECK(a.major == b.major);

    const auto c = partition_collection(ids, 43);
    CHECK(c.valid.size() == a.valid.size());
    CHECK((c.valid != a.valid || c.minor != a.minor || c.major != a.major));
}

TEST_CASE("seeded permutation matches the frozen fixture") {
    std::ifstream in(std::string{CITEGATE_TEST_DATA_DIR} + "/permutation_fixture.json");
    REQUIRE(in);
    nlohmann::json fixture;
    in >> fixture;
    for (const auto& entry : fixture["cases"]) {
        const auto perm = seeded_permutation(entry["n"].get<std::size_t>(),
                                             entry["seed"].get<std::uint64_t>());
        CHECK(perm == entry["permutation"].get<std::vector<std::size_t>>());
    }
}

TEST_CASE("corruption prompt rendering") {
    CHECK(render_corruption_prompt(CorruptionKind::minor, "t", "s") ==
          std::string{prompts::kMinorCorruptionTemplate});
    const std::string major =
        render_corruption_prompt(CorruptionKind::major, "astrophysics", "dark energy");
    CHECK(major.find("subfield of \"dark energy\" within \"astrophysics\"") !=
          std::string::npos);
    CHECK(major.find("{subtopic}") == std::string::npos);
    CHECK(major.find("{topic}") == std::string::npos);
}

TEST_CASE("corruption temperatures per regime") {
    CHECK(corruption_temperature(CorruptionKind::minor) == 0.7);
    CHECK(corruption_temperature(CorruptionKind::major) == 0.9);
}

TEST_CASE("corrupt_batch forwards the rendered prompt and temperature") {
    RecordingBackend backend;
    const auto pool = pool_of({{"c1", 3}});
    corrupt_batch(pool, CorruptionKind::minor, "topic", "subtopic", backend, kNoSleep);
    corrupt_batch(pool, CorruptionKind::major, "topic", "subtopic", backend, kNoSleep);
    REQUIRE(backend.requests.size() == 2);
    CHECK(backend.requests[0].temperature == 0.7);
    CHECK(backend.requests[0].prompt == std::string{prompts::kMinorCorruptionTemplate});
    CHECK(backend.requests[1].temperature == 0.9);
    CHECK(backend.requests[1].prompt.find("\"subtopic\" within \"topic\"") !=
          std::string::npos);
    CHECK(backend.requests[1].batch.size() == 3);
}

TEST_CASE("echo stub yields structurally valid records labeled per kind") {
    EchoCorruptionBackend backend;
    const auto pool = pool_of({{"c1", 4}});
    const auto result = corrupt_batch(pool, CorruptionKind::minor, "t", "s", backend, kNoSleep);
    REQUIRE(result.records.size() == 4);
    CHECK(result.failed_batches == 0);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        CHECK(result.records[i].label == Label::minor);
        CHECK(result.records[i].corrupted == pool[i].text);
        CHECK(result.records[i].change_description == "noop");
    }
}

TEST_CASE("backend failure falls back to valid after three attempts") {
    FailingCorruptionBackend backend;
    const auto pool = pool_of({{"c1", 5}});
    const auto result = corrupt_batch(pool, CorruptionKind::major, "t", "s", backend, kNoSleep);
    CHECK(backend.calls() == 3);
    CHECK(result.failed_batches == 1);
    REQUIRE(result.records.size() == 5);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        CHECK(result.records[i].label == Label::exact);
        CHECK(result.records[i].corrupted == pool[i].text);
        CHECK(result.records[i].change_description.empty());
    }
}

TEST_CASE("misaligned backend output counts as failure") {
    MisalignedBackend backend;
    const auto pool = pool_of({{"c1", 4}});
    const auto result = corrupt_batch(pool, CorruptionKind::minor, "t", "s", backend, kNoSleep);
    CHECK(backend.calls == 3);
    CHECK(result.failed_batches == 1);
    REQUIRE(result.records.size() == 4);
    for (const auto& rec : result.records) CHECK(rec.label == Label::exact);
}

TEST_CASE("empty batch is a no-op") {
    FailingCorruptionBackend backend;
    const auto result = corrupt_batch({}, CorruptionKind::minor, "t", "s", backend, kNoSleep);
    CHECK(result.records.empty());
    CHECK(result.failed_batches == 0);
    CHECK(backend.calls() == 0);
}

TEST_CASE("build_benchmark: two collections of six, echo stub") {
    EchoCorruptionBackend backend;
    const auto pool = pool_of({{"alpha", 6}, {"beta", 6}});
    const auto summary = build_benchmark(pool, 42, backend);
    REQUIRE(summary.records.size() == 12);
    CHECK(summary.n_valid == 4);
    CHECK(summary.n_minor == 4);
    CHECK(summary.n_major == 4);

    // grouped by collection in input order, then by pool index
    for (std::size_t i = 0; i < 6; ++i) CHECK(summary.records[i].collection == "alpha");
    for (std::size_t i = 6; i < 12; ++i) CHECK(summary.records[i].collection == "beta");
    for (std::size_t i = 0; i + 1 < 6; ++i) {
        CHECK(summary.records[i].index < summary.records[i + 1].index);
    }

    // per-collection class counts
    for (const std::string collection : {"alpha", "beta"}) {
        std::size_t v = 0, mi = 0, ma = 0;
        for (const auto& rec : summary.records) {
            if (rec.collection != collection) continue;
            if (rec.label == Label::exact) ++v;
            if (rec.label == Label::minor) ++mi;
            if (rec.label == Label::major) ++ma;
        }
        CHECK(v == 2);
        CHECK(mi == 2);
        CHECK(ma == 2);
    }
}

TEST_CASE("build_benchmark determinism: identical serialized output") {
    EchoCorruptionBackend backend;
    const auto pool = pool_of({{"alpha", 7}, {"beta", 11}, {"gamma", 4}});
    const auto a = build_benchmark(pool, 42, backend);
    const auto b = build_benchmark(pool, 42, backend);
    nlohmann::json ja = a.records, jb = b.records;
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("valid records are verbatim copies; nothing is dropped") {
    RuleCorruptionBackend backend;
    const auto pool = pool_of({{"alpha", 10}, {"beta", 9}});
    const auto summary = build_benchmark(pool, 42, backend);
    CHECK(summary.records.size() == pool.size());
    for (const auto& rec : summary.records) {
        const auto& original = pool[static_cast<std::size_t>(rec.index)];
        CHECK(rec.original == original.text);
        CHECK(rec.collection == original.collection);
        if (rec.label == Label::exact) {
            CHECK(rec.corrupted == rec.original);
            CHECK(rec.change_description.empty());
        } else {
            CHECK(rec.corrupted != rec.original);
            CHECK_FALSE(rec.change_description.empty());
        }
    }
}

TEST_CASE("per-collection class balance invariant over random collection sizes") {
    EchoCorruptionBackend backend;
    std::mt19937 rng(5150);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::pair<std::string, std::size_t>> spec;
        const int n_collections = 2 + static_cast<int>(rng() % 5);
        for (int c = 0; c < n_collections; ++c) {
            spec.push_back({"col" + std::to_string(c), 1 + rng() % 40});
        }
        const auto pool = pool_of(spec);
        const auto summary = build_benchmark(pool, rng(), backend);
        for (const auto& [collection, n] : spec) {
            std::size_t v = 0, mi = 0, ma = 0;
            for (const auto& rec : summary.records) {
                if (rec.collection != collection) continue;
                if (rec.label == Label::exact) ++v;
                if (rec.label == Label::minor) ++mi;
                if (rec.label == Label::major) ++ma;
            }
            CHECK(v + mi + ma == n);
            CHECK(mi == ma);
            CHECK(v >= mi);
            CHECK(v - mi <= 2);
        }
    }
}

TEST_CASE("failure fallback marks whole batches valid without dropping records") {
    FailingCorruptionBackend backend;
    const auto pool = pool_of({{"alpha", 9}});
    const auto summary = build_benchmark(pool, 42, backend);
    CHECK(summary.records.size() == 9);
    CHECK(summary.n_valid == 9);
    CHECK(summary.n_minor == 0);
    CHECK(summary.n_major == 0);
    CHECK(summary.failed_batches == 2);  // minor batch and major batch
}

TEST_CASE("rule corruptor produces plausible minor and major edits") {
    RuleCorruptionBackend backend;
    CorruptionRequest req;
    req.kind = CorruptionKind::minor;
    req.batch = {"[Virey, 2009, Some Title](https://arxiv.org/pdf/0804.0389.pdf)"};
    auto outcome = backend.corrupt(req);
    REQUIRE(outcome.index() == 0);
    auto minor = std::get<0>(outcome)[0];
    CHECK(minor.corrupted != req.batch[0]);
    CHECK(minor.corrupted.find("Some Title") != std::string::npos);  // title intact
    CHECK_FALSE(minor.change_description.empty());

    req.kind = CorruptionKind::major;
    req.subtopic = "dark energy";
    outcome = backend.corrupt(req);
    REQUIRE(outcome.index() == 0);
    auto major = std::get<0>(outcome)[0];
    CHECK(major.corrupted.find("Some Title") == std::string::npos);  // title rewritten
    CHECK(major.corrupted.find("dark energy") != std::string::npos);
    CHECK(major.corrupted.find("0804.0389") == std::string::npos);  // identifier replaced
}
