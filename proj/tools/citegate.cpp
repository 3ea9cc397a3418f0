// citegate: citation-hallucination detection pipeline.
//
// Subcommands: verify (dataset -> verdicts), calibrate (scored dev set ->
// thresholds), evaluate (verdicts + gold -> report), corrupt (clean pool ->
// labeled benchmark), bench-latency (verdicts -> stage latency tables).
//
// Exit codes: 0 success, 1 usage/config error, 2 dataset I/O error,
// 3 completed with diagnostic-flagged citations.

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citegate/benchmark.hpp"
#include "citegate/calibration.hpp"
#include "citegate/evaluation.hpp"
#include "citegate/jsonl.hpp"
#include "citegate/live_sources.hpp"
#include "citegate/llm_backend.hpp"
#include "citegate/pipeline.hpp"

namespace {

using namespace citegate;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

struct CommonOpts {
    std::string config_path;
    std::string fixtures_path;
    bool no_web_search = false;
    bool no_reviewer = false;
    int workers = 0;  // 0: keep config value
};

PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig cfg =
        opts.config_path.empty() ? PipelineConfig{} : load_config_file(opts.config_path);
    if (opts.no_web_search) cfg.cascade.enable_web_search = false;
    if (opts.no_reviewer) cfg.reviewer_enabled = false;
    if (opts.workers > 0) cfg.workers = opts.workers;
    return cfg;
}

// Owns the client stack (scripted or live, optionally cached) and exposes
// the per-source pointer map the cascade consumes.
struct ClientStack {
    std::unique_ptr<ScriptedBackend> scripted;
    std::vector<std::unique_ptr<SourceClient>> owned;
    std::vector<std::unique_ptr<SourceClient>> cached;
    ClientMap map;
};

ClientStack build_clients(const PipelineConfig& cfg, const std::string& fixtures_path) {
    ClientStack stack;
    const std::vector<Source> sources{Source::arxiv, Source::crossref,
                                      Source::semantic_scholar, Source::openalex,
                                      Source::web_search};
    if (!fixtures_path.empty()) {
        stack.scripted = std::make_unique<ScriptedBackend>();
        stack.scripted->load_file(fixtures_path);
        for (Source s : sources) stack.owned.push_back(stack.scripted->client_for(s));
    } else {
        const LiveSourceConfig live = live_config_from_env();
        for (Source s : sources) {
            auto client = make_live_client(s, live);
            if (client) stack.owned.push_back(std::move(client));
        }
    }
    for (auto& client : stack.owned) {
        SourceClient* effective = client.get();
        if (cfg.cache_path.has_value()) {
            stack.cached.push_back(std::make_unique<CachingClient>(
                *client, *cfg.cache_path + "/" + to_string(client->name())));
            effective = stack.cached.back().get();
        }
        stack.map[client->name()] = effective;
    }
    return stack;
}

std::unique_ptr<VerifierBackend> build_verifier(const PipelineConfig& cfg) {
    if (cfg.verifier.backend == "mock") return std::make_unique<RuleBasedVerifier>();
    if (cfg.verifier.backend == "openai") {
        LlmBackendConfig llm;
        if (!cfg.verifier.base_url.empty()) llm.base_url = cfg.verifier.base_url;
        llm.model = cfg.verifier.model;
        llm.temperature = cfg.verifier.temperature;
        return std::make_unique<OpenAiCompatibleBackend>(llm);
    }
    throw std::invalid_argument("unknown verifier backend: " + cfg.verifier.backend);
}

std::vector<RawCitation> load_dataset(const std::string& path) {
    std::vector<RawCitation> dataset;
    for (const auto& j : read_jsonl(path)) dataset.push_back(j.get<RawCitation>());
    return dataset;
}

std::map<std::string, Label> load_gold(const std::string& path) {
    std::map<std::string, Label> gold;
    for (const auto& j : read_jsonl(path)) {
        if (!j.contains("gold_label")) {
            throw std::runtime_error(path + ": record " + j.value("id", std::string{"?"}) +
                                     " has no gold_label");
        }
        gold[j.at("id").get<std::string>()] =
            label_from_string(j.at("gold_label").get<std::string>());
    }
    return gold;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
    return buf;
}

std::string ms(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fms", v);
    return buf;
}

int cmd_verify(const CommonOpts& common, const std::string& dataset_path,
               const std::string& out_path) {
    PipelineConfig cfg = resolve_config(common);
    std::vector<RawCitation> dataset;
    try {
        dataset = load_dataset(dataset_path);
    } catch (const std::exception& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitData;
    }

    ClientStack clients = build_clients(cfg, common.fixtures_path);
    auto verifier_backend = build_verifier(cfg);
    const BatchResult batch = run_batch(dataset, cfg, clients.map, *verifier_backend);

    std::vector<nlohmann::json> records;
    records.reserve(batch.verdicts.size());
    for (std::size_t i = 0; i < batch.verdicts.size(); ++i) {
        records.push_back(verdict_to_record(dataset[i].id, batch.verdicts[i]));
    }
    try {
        write_jsonl(out_path, records);
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitData;
    }

    std::map<Label, std::size_t> counts;
    for (const auto& v : batch.verdicts) ++counts[v.label];
    std::cout << "verified " << batch.verdicts.size() << " citations: " << counts[Label::exact]
              << " exact, " << counts[Label::minor] << " minor, " << counts[Label::major]
              << " major";
    if (batch.flagged > 0) std::cout << " (" << batch.flagged << " flagged)";
    std::cout << "\n";
    return batch.flagged > 0 ? kExitPartial : kExitOk;
}

int cmd_calibrate(const std::string& scores_path, const std::string& out_path, double step) {
    std::vector<ScoredExample> dev;
    try {
        for (const auto& j : read_jsonl(scores_path)) {
            ScoredExample ex;
            ex.score = j.at("score").get<double>();
            ex.gold = label_from_string(j.at("gold_label").get<std::string>());
            dev.push_back(ex);
        }
    } catch (const std::exception& e) {
        std::cerr << "scores error: " << e.what() << "\n";
        return kExitData;
    }

    CalibrationResult result;
    try {
        result = calibrate(dev, step);
    } catch (const std::exception& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return kExitConfig;
    }
    nlohmann::json record{{"tau_m", result.thresholds.tau_m},
                          {"tau_e", result.thresholds.tau_e},
                          {"weighted_f1", result.weighted_f1},
                          {"grid_step", result.grid_step}};
    if (!out_path.empty()) {
        try {
            write_jsonl(out_path, {record});
        } catch (const std::exception& e) {
            std::cerr << "output error: " << e.what() << "\n";
            return kExitData;
        }
    }
    std::cout << "selected tau_m=" << result.thresholds.tau_m
              << " tau_e=" << result.thresholds.tau_e << " weighted_f1=" << result.weighted_f1
              << " (" << result.pairs_evaluated << " grid pairs)\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& verdicts_path, const std::string& gold_path,
                 const std::string& out_path) {
    std::vector<Label> preds, gold;
    try {
        const auto gold_map = load_gold(gold_path);
        for (const auto& j : read_jsonl(verdicts_path)) {
            const std::string id = j.at("id").get<std::string>();
            auto it = gold_map.find(id);
            if (it == gold_map.end()) {
                throw std::runtime_error("no gold label for id " + id);
            }
            preds.push_back(label_from_string(j.at("label").get<std::string>()));
            gold.push_back(it->second);
        }
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitData;
    }

    EvalReport report;
    try {
        report = compute_metrics(preds, gold);
    } catch (const std::exception& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::cout << "n=" << report.n << "\n";
    std::cout << "class  precision  recall  f1\n";
    for (Label label : {Label::exact, Label::minor, Label::major}) {
        std::cout << to_string(label) << "  " << pct(report.per_class_precision[label]) << "  "
                  << pct(report.per_class_recall[label]) << "  "
                  << pct(report.per_class_f1[label]) << "\n";
    }
    std::cout << "macro_f1 " << pct(report.macro_f1) << "  accuracy " << pct(report.accuracy)
              << "\n";
    std::cout << "confusion (rows gold, cols pred; order major/minor/exact):\n";
    for (const auto& row : report.confusion) {
        std::cout << "  " << row[0] << " " << row[1] << " " << row[2] << "\n";
    }

    if (!out_path.empty()) {
        nlohmann::json j;
        j["n"] = report.n;
        j["accuracy"] = report.accuracy;
        j["macro_f1"] = report.macro_f1;
        for (Label label : {Label::exact, Label::minor, Label::major}) {
            j["per_class_f1"][to_string(label)] = report.per_class_f1[label];
            j["per_class_precision"][to_string(label)] = report.per_class_precision[label];
            j["per_class_recall"][to_string(label)] = report.per_class_recall[label];
        }
        j["confusion_rows_gold_order_major_minor_exact"] = report.confusion;
        try {
            write_jsonl(out_path, {j});
        } catch (const std::exception& e) {
            std::cerr << "output error: " << e.what() << "\n";
            return kExitData;
        }
    }
    return kExitOk;
}

int cmd_corrupt(const std::string& pool_path, std::uint64_t seed, const std::string& out_path,
                const std::string& dataset_out, const std::string& backend_name,
                const std::string& topics_path) {
    std::vector<RawCitation> pool;
    try {
        pool = load_dataset(pool_path);
    } catch (const std::exception& e) {
        std::cerr << "pool error: " << e.what() << "\n";
        return kExitData;
    }

    std::unique_ptr<CorruptionBackend> backend;
    if (backend_name == "echo") {
        backend = std::make_unique<EchoCorruptionBackend>();
    } else if (backend_name == "rule") {
        backend = std::make_unique<RuleCorruptionBackend>();
    } else {
        std::cerr << "unknown corruption backend: " << backend_name << "\n";
        return kExitConfig;
    }

    std::map<std::string, CollectionTopics> topic_map;
    if (!topics_path.empty()) {
        try {
            std::ifstream in(topics_path);
            if (!in) throw std::runtime_error("cannot open " + topics_path);
            nlohmann::json topics_json;
            in >> topics_json;
            for (const auto& [collection, entry] : topics_json.items()) {
                topic_map[collection] = CollectionTopics{
                    entry.value("topic", collection), entry.value("subtopic", collection)};
            }
        } catch (const std::exception& e) {
            std::cerr << "topics error: " << e.what() << "\n";
            return kExitData;
        }
    }
    auto topics = [&topic_map](const std::string& collection) {
        auto it = topic_map.find(collection);
        return it != topic_map.end() ? it->second
                                     : CollectionTopics{collection, collection};
    };

    const BenchmarkSummary summary = build_benchmark(pool, seed, *backend, topics);

    std::vector<nlohmann::json> records;
    for (const auto& rec : summary.records) records.push_back(nlohmann::json(rec));
    try {
        write_jsonl(out_path, records);
        if (!dataset_out.empty()) {
            std::vector<nlohmann::json> dataset;
            for (const auto& rec : summary.records) {
                const auto& src = pool[static_cast<std::size_t>(rec.index)];
                dataset.push_back(nlohmann::json{{"id", src.id},
                                                 {"collection", rec.collection},
                                                 {"text", rec.corrupted},
                                                 {"gold_label", to_string(rec.label)}});
            }
            write_jsonl(dataset_out, dataset);
        }
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitData;
    }

    std::cout << "built " << summary.records.size() << " records: " << summary.n_valid
              << " valid, " << summary.n_minor << " minor, " << summary.n_major << " major";
    if (summary.failed_batches > 0) {
        std::cout << " (" << summary.failed_batches << " batches fell back to valid)";
    }
    std::cout << "\n";
    return kExitOk;
}

int cmd_bench_latency(const std::string& verdicts_path, const std::string& gold_path,
                      const std::string& out_path) {
    std::vector<RunLatency> runs;
    try {
        std::map<std::string, Label> gold;
        if (!gold_path.empty()) gold = load_gold(gold_path);
        for (const auto& j : read_jsonl(verdicts_path)) {
            RunLatency run;
            run.stages = j.at("stage_timings_ms").get<std::vector<StageRecord>>();
            if (!gold.empty()) {
                auto it = gold.find(j.at("id").get<std::string>());
                if (it != gold.end()) run.gold = it->second;
            }
            runs.push_back(std::move(run));
        }
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitData;
    }

    const LatencyStats stats = aggregate_latency(runs);
    std::cout << "runs aggregated: " << stats.runs_aggregated
              << " (excluded for errors: " << stats.runs_excluded << ")\n";
    std::cout << "stage  reach  cond_mean  cond_median  cond_p95  cond_p99  exp_contribution\n";
    for (const auto& [source, stage] : stats.per_stage) {
        std::cout << to_string(source) << "  " << pct(stage.reach_rate);
        if (stage.conditional.has_value()) {
            std::cout << "  " << ms(stage.conditional->mean) << "  "
                      << ms(stage.conditional->median) << "  " << ms(stage.conditional->p95)
                      << "  " << ms(stage.conditional->p99) << "  "
                      << ms(stage.expected_contribution);
        } else {
            std::cout << "  -  -  -  -  " << ms(0.0);
        }
        std::cout << "\n";
    }
    std::cout << "overall  mean " << ms(stats.overall.mean) << "  median "
              << ms(stats.overall.median) << "  p95 " << ms(stats.overall.p95) << "  p99 "
              << ms(stats.overall.p99) << "  max " << ms(stats.overall.max) << "  std "
              << ms(stats.overall.stddev) << "\n";
    for (const auto& [label, summary] : stats.per_class) {
        std::cout << "class " << to_string(label) << "  mean " << ms(summary.mean)
                  << "  median " << ms(summary.median) << "  p95 " << ms(summary.p95)
                  << "  p99 " << ms(summary.p99) << "\n";
    }

    if (!out_path.empty()) {
        auto summary_json = [](const LatencySummary& s) {
            return nlohmann::json{{"mean_ms", s.mean}, {"median_ms", s.median},
                                  {"p95_ms", s.p95},   {"p99_ms", s.p99},
                                  {"max_ms", s.max},   {"std_ms", s.stddev},
                                  {"n", s.n}};
        };
        nlohmann::json j;
        j["runs_aggregated"] = stats.runs_aggregated;
        j["runs_excluded"] = stats.runs_excluded;
        for (const auto& [source, stage] : stats.per_stage) {
            nlohmann::json sj;
            sj["reach_rate"] = stage.reach_rate;
            sj["expected_contribution_ms"] = stage.expected_contribution;
            if (stage.conditional.has_value()) sj["conditional"] = summary_json(*stage.conditional);
            j["per_stage"][to_string(source)] = sj;
        }
        j["overall"] = summary_json(stats.overall);
        for (const auto& [label, summary] : stats.per_class) {
            j["per_class"][to_string(label)] = summary_json(summary);
        }
        try {
            write_jsonl(out_path, {j});
        } catch (const std::exception& e) {
            std::cerr << "output error: " << e.what() << "\n";
            return kExitData;
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citegate: retrieval-grounded citation hallucination detection"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string dataset_path, out_path, scores_path, verdicts_path, gold_path, pool_path;
    std::string dataset_out, backend_name = "rule", topics_path;
    std::uint64_t seed = 42;
    double step = 0.25;
    int rc = kExitOk;

    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "pipeline config (JSON)");
        cmd->add_option("--fixtures", common.fixtures_path,
                        "scripted source fixtures (JSON); replaces live clients");
        cmd->add_flag("--no-web-search", common.no_web_search,
                      "disable the web-search fallback stage");
        cmd->add_flag("--no-reviewer", common.no_reviewer, "disable the reviewer pass");
        cmd->add_option("--workers", common.workers, "worker threads (default from config)");
    };

    CLI::App* verify_cmd = app.add_subcommand("verify", "label a citation dataset");
    verify_cmd->add_option("--dataset", dataset_path, "dataset JSONL")->required();
    verify_cmd->add_option("--out", out_path, "verdicts JSONL")->required();
    add_common(verify_cmd);
    verify_cmd->callback([&] { rc = cmd_verify(common, dataset_path, out_path); });

    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "grid-search thresholds on a scored dev set");
    calibrate_cmd->add_option("--scores", scores_path, "scored JSONL ({score, gold_label})")
        ->required();
    calibrate_cmd->add_option("--out", out_path, "thresholds record (JSONL)");
    calibrate_cmd->add_option("--step", step, "grid step (default 0.25)");
    calibrate_cmd->callback([&] { rc = cmd_calibrate(scores_path, out_path, step); });

    CLI::App* evaluate_cmd =
        app.add_subcommand("evaluate", "score verdicts against gold labels");
    evaluate_cmd->add_option("--verdicts", verdicts_path, "verdicts JSONL")->required();
    evaluate_cmd->add_option("--gold", gold_path, "gold dataset JSONL")->required();
    evaluate_cmd->add_option("--out", out_path, "report JSON");
    evaluate_cmd->callback([&] { rc = cmd_evaluate(verdicts_path, gold_path, out_path); });

    CLI::App* corrupt_cmd =
        app.add_subcommand("corrupt", "build a corruption benchmark from a clean pool");
    corrupt_cmd->add_option("--pool", pool_path, "clean citation pool JSONL")->required();
    corrupt_cmd->add_option("--out", out_path, "benchmark records JSONL")->required();
    corrupt_cmd->add_option("--dataset-out", dataset_out,
                            "also write a verify-ready dataset JSONL");
    corrupt_cmd->add_option("--seed", seed, "partition seed (default 42)");
    corrupt_cmd->add_option("--backend", backend_name, "corruption backend: rule | echo");
    corrupt_cmd->add_option("--topics", topics_path,
                            "JSON map collection -> {topic, subtopic}");
    corrupt_cmd->callback([&] {
        rc = cmd_corrupt(pool_path, seed, out_path, dataset_out, backend_name, topics_path);
    });

    CLI::App* latency_cmd =
        app.add_subcommand("bench-latency", "aggregate per-stage retrieval latency");
    latency_cmd->add_option("--verdicts", verdicts_path, "verdicts JSONL")->required();
    latency_cmd->add_option("--gold", gold_path, "gold dataset JSONL (per-class breakdown)");
    latency_cmd->add_option("--out", out_path, "stats JSON");
    latency_cmd->callback([&] { rc = cmd_bench_latency(verdicts_path, gold_path, out_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return rc;
}
