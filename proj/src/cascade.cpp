#include "citegate/cascade.hpp"

#include <algorithm>
#include <array>

#include "citegate/parser.hpp"

namespace citegate {

std::pair<std::string, std::optional<int>> build_query(const ParsedCitation& parsed,
                                                       const RawCitation& raw) {
    if (parsed.title.has_value()) {
        const std::string cleaned = clean_text(*parsed.title);
        if (!cleaned.empty()) return {cleaned, parsed.year};
    }
    return {clean_text(raw.text), parsed.year};
}

namespace {

struct Held {
    CandidatePublication candidate;
    double similarity = 0.0;
    MatchMethod method = MatchMethod::title_search;
};

// Highest ranking_score wins; ties keep the earliest result (source order).
const CandidatePublication* rank_best(const std::vector<CandidatePublication>& cands,
                                      const std::string& query_title,
                                      std::optional<int> query_year, RankingMode mode,
                                      const SimilarityConfig& sim_cfg) {
    const CandidatePublication* best = nullptr;
    double best_score = 0.0;
    for (const auto& cand : cands) {
        const double score = ranking_score(query_title, query_year, cand, mode, sim_cfg);
        if (best == nullptr || score > best_score) {
            best = &cand;
            best_score = score;
        }
    }
    return best;
}

}  // namespace

MatchResult retrieve_best(const ParsedCitation& parsed, const RawCitation& raw,
                          const ClientMap& clients, const CascadeConfig& cfg,
                          const SimilarityConfig& sim_cfg) {
    const auto [query, query_year] = build_query(parsed, raw);

    MatchResult result;
    constexpr std::array<Source, 5> kOrder{Source::arxiv, Source::crossref,
                                           Source::semantic_scholar, Source::openalex,
                                           Source::web_search};
    for (Source s : kOrder) {
        StageRecord rec;
        rec.stage = s;
        result.stage_records.push_back(rec);
    }
    auto record = [&result](Source s) -> StageRecord& {
        return result.stage_records[static_cast<std::size_t>(s)];
    };
    auto client = [&clients](Source s) -> SourceClient* {
        auto it = clients.find(s);
        return it == clients.end() ? nullptr : it->second;
    };

    std::optional<Held> accepted;
    std::optional<Held> arxiv_provisional;  // resolved id, similarity below the gate
    std::optional<Held> crossref_conf_fail;  // cleared the title gate, failed confidence
    std::optional<Held> web_best;            // best web result, below the gate

    // Similarity bar that stage-(3) replacements must strictly beat.
    auto current_bar = [&]() {
        double bar = -1.0;
        if (arxiv_provisional) bar = std::max(bar, arxiv_provisional->similarity);
        if (crossref_conf_fail) bar = std::max(bar, crossref_conf_fail->similarity);
        return bar;
    };

    // (1) direct identifier resolution
    if (cfg.enable_arxiv_direct && parsed.arxiv_id.has_value() &&
        is_arxiv_id(*parsed.arxiv_id)) {
        if (SourceClient* c = client(Source::arxiv)) {
            auto& rec = record(Source::arxiv);
            rec.attempted = true;
            LookupResult lookup = lookup_arxiv(*c, *parsed.arxiv_id);
            rec.elapsed = lookup.elapsed;
            if (!lookup.ok()) {
                rec.error = to_string(lookup.error().kind);
            } else if (lookup.candidate().has_value()) {
                auto cand = *lookup.candidate();
                cand.confidence = cfg.arxiv_direct_confidence;
                const double sim = title_similarity(query, cand.title);
                rec.best_similarity = sim;
                if (sim >= cfg.min_title_similarity) {
                    accepted = Held{std::move(cand), sim, MatchMethod::arxiv_id_lookup};
                } else {
                    // Identifier resolved but the titles disagree: hold it,
                    // run the rest of the cascade, flag for review.
                    arxiv_provisional =
                        Held{std::move(cand), sim, MatchMethod::arxiv_id_lookup};
                }
            }
        }
    }

    // (2) CrossRef: ranked by Levenshtein + year bonus, gated on similarity
    // and on confidence (== similarity).
    if (!accepted) {
        if (SourceClient* c = client(Source::crossref)) {
            auto& rec = record(Source::crossref);
            rec.attempted = true;
            SearchResult res = c->search(query, query_year, cfg.per_stage_limit);
            rec.elapsed = res.elapsed;
            if (!res.ok()) {
                rec.error = to_string(res.error().kind);
            } else if (const CandidatePublication* best =
                           rank_best(res.candidates(), query, query_year,
                                     RankingMode::levenshtein, sim_cfg)) {
                const double sim = title_similarity(query, best->title);
                rec.best_similarity = sim;
                auto cand = *best;
                cand.confidence = sim;
                if (sim >= cfg.min_title_similarity) {
                    if (cand.confidence >= cfg.crossref_confidence_gate) {
                        accepted = Held{std::move(cand), sim, MatchMethod::title_search};
                    } else {
                        crossref_conf_fail =
                            Held{std::move(cand), sim, MatchMethod::title_search};
                    }
                }
            }
        }
    }

    // (3) Semantic Scholar, then OpenAlex: ranked by word overlap + year
    // bonus; the best candidate replaces the current best only on strictly
    // higher recomputed similarity that also clears the gate.
    if (!accepted) {
        const std::array<std::pair<Source, double>, 2> stages{
            std::pair{Source::semantic_scholar, cfg.s2_confidence_bonus_cap},
            std::pair{Source::openalex, cfg.openalex_confidence_bonus_cap}};
        for (const auto& [source, bonus_cap] : stages) {
            if (accepted) break;
            SourceClient* c = client(source);
            if (c == nullptr) continue;
            auto& rec = record(source);
            rec.attempted = true;
            SearchResult res = c->search(query, query_year, cfg.per_stage_limit);
            rec.elapsed = res.elapsed;
            if (!res.ok()) {
                rec.error = to_string(res.error().kind);
                continue;
            }
            const CandidatePublication* best = rank_best(
                res.candidates(), query, query_year, RankingMode::overlap, sim_cfg);
            if (best == nullptr) continue;
            const double sim = title_similarity(query, best->title);
            rec.best_similarity = sim;
            if (sim >= cfg.min_title_similarity && sim > current_bar()) {
                auto cand = *best;
                cand.confidence = std::min(100.0, sim + bonus_cap);
                accepted = Held{std::move(cand), sim, MatchMethod::title_search};
            }
        }
    }

    // (4) web-search fallback
    if (!accepted && cfg.enable_web_search) {
        if (SourceClient* c = client(Source::web_search)) {
            auto& rec = record(Source::web_search);
            rec.attempted = true;
            SearchResult res = web_search(*c, query, cfg.per_stage_limit);
            rec.elapsed = res.elapsed;
            if (!res.ok()) {
                rec.error = to_string(res.error().kind);
            } else {
                const CandidatePublication* best = nullptr;
                double best_sim = 0.0;
                for (const auto& cand : res.candidates()) {
                    const double sim = title_similarity(query, cand.title);
                    if (best == nullptr || sim > best_sim) {
                        best = &cand;
                        best_sim = sim;
                    }
                }
                if (best != nullptr) {
                    rec.best_similarity = best_sim;
                    auto cand = *best;
                    cand.confidence = best_sim;
                    if (best_sim >= cfg.min_title_similarity) {
                        accepted = Held{std::move(cand), best_sim, MatchMethod::web_search};
                    } else {
                        web_best = Held{std::move(cand), best_sim, MatchMethod::web_search};
                    }
                }
            }
        }
    }

    // (5) fallback returns when nothing was accepted
    if (!accepted) {
        if (crossref_conf_fail) {
            accepted = std::move(crossref_conf_fail);
            result.fallback_flags.push_back(kFlagCrossrefConfFailFallback);
        } else if (arxiv_provisional || web_best) {
            // Both are below the gate; keep the more similar one (the
            // identifier hit wins ties as the earlier stage).
            const bool take_arxiv =
                arxiv_provisional &&
                (!web_best || arxiv_provisional->similarity >= web_best->similarity);
            if (take_arxiv) {
                accepted = std::move(arxiv_provisional);
                result.fallback_flags.push_back(kFlagBelowGateIdentifierHit);
            } else {
                accepted = std::move(web_best);
                result.fallback_flags.push_back(kFlagBelowGateWebFallback);
            }
        }
    }

    if (accepted) {
        result.match_method = accepted->method;
        result.title_similarity = accepted->similarity;
        Source from = accepted->candidate.source;
        result.candidate = std::move(accepted->candidate);
        record(from).accepted = true;
    } else {
        result.match_method = MatchMethod::not_found;
        result.title_similarity = 0.0;
    }
    return result;
}

}  // namespace citegate
