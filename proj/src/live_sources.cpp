#include "citegate/live_sources.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

// httplib's default read timeout is tightened per config below.
#include <httplib.h>

#include "citegate/parser.hpp"
#include "citegate/textnorm.hpp"

namespace citegate {

namespace {

std::optional<std::string> nonempty(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

std::string json_string_or_empty(const nlohmann::json& j) {
    return j.is_string() ? j.get<std::string>() : std::string{};
}

SourceError malformed(Source source, const std::string& detail) {
    return SourceError{source, SourceError::Kind::malformed_response, detail};
}

std::string join_authors(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (n.empty()) continue;
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

}  // namespace

SourceOutcome<std::vector<CandidatePublication>> parse_crossref_response(
    const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("message")) {
        return malformed(Source::crossref, "not a works response");
    }
    std::vector<CandidatePublication> out;
    for (const auto& item : j["message"].value("items", nlohmann::json::array())) {
        CandidatePublication cand;
        cand.source = Source::crossref;
        const auto titles = item.value("title", nlohmann::json::array());
        if (titles.empty() || !titles[0].is_string()) continue;
        cand.title = titles[0].get<std::string>();
        std::vector<std::string> names;
        for (const auto& a : item.value("author", nlohmann::json::array())) {
            const std::string given = json_string_or_empty(a.value("given", nlohmann::json{}));
            const std::string family = json_string_or_empty(a.value("family", nlohmann::json{}));
            if (family.empty() && given.empty()) continue;
            names.push_back(given.empty() ? family : given + " " + family);
        }
        cand.authors = join_authors(names);
        if (item.contains("issued") && item["issued"].contains("date-parts")) {
            const auto& parts = item["issued"]["date-parts"];
            if (parts.is_array() && !parts.empty() && parts[0].is_array() &&
                !parts[0].empty() && parts[0][0].is_number_integer()) {
                cand.year = parts[0][0].get<int>();
            }
        }
        const auto container = item.value("container-title", nlohmann::json::array());
        if (!container.empty() && container[0].is_string()) {
            cand.venue = container[0].get<std::string>();
        }
        if (item.contains("DOI") && item["DOI"].is_string()) {
            cand.doi = item["DOI"].get<std::string>();
        }
        if (item.contains("URL") && item["URL"].is_string()) {
            cand.url = item["URL"].get<std::string>();
        }
        out.push_back(std::move(cand));
    }
    return out;
}

SourceOutcome<std::vector<CandidatePublication>> parse_semantic_scholar_response(
    const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("data")) {
        return malformed(Source::semantic_scholar, "not a paper search response");
    }
    std::vector<CandidatePublication> out;
    for (const auto& item : j["data"]) {
        CandidatePublication cand;
        cand.source = Source::semantic_scholar;
        cand.title = json_string_or_empty(item.value("title", nlohmann::json{}));
        if (cand.title.empty()) continue;
        std::vector<std::string> names;
        for (const auto& a : item.value("authors", nlohmann::json::array())) {
            const std::string n = json_string_or_empty(a.value("name", nlohmann::json{}));
            if (!n.empty()) names.push_back(n);
        }
        cand.authors = join_authors(names);
        if (item.contains("year") && item["year"].is_number_integer()) {
            cand.year = item["year"].get<int>();
        }
        cand.venue = nonempty(json_string_or_empty(item.value("venue", nlohmann::json{})));
        cand.url = nonempty(json_string_or_empty(item.value("url", nlohmann::json{})));
        if (item.contains("externalIds") && item["externalIds"].is_object()) {
            const auto& ids = item["externalIds"];
            const std::string doi = json_string_or_empty(ids.value("DOI", nlohmann::json{}));
            if (!doi.empty()) cand.doi = doi;
            const std::string axv = json_string_or_empty(ids.value("ArXiv", nlohmann::json{}));
            if (!axv.empty()) cand.arxiv_id = axv;
        }
        out.push_back(std::move(cand));
    }
    return out;
}

SourceOutcome<std::vector<CandidatePublication>> parse_openalex_response(
    const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("results")) {
        return malformed(Source::openalex, "not a works response");
    }
    std::vector<CandidatePublication> out;
    for (const auto& item : j["results"]) {
        CandidatePublication cand;
        cand.source = Source::openalex;
        cand.title = json_string_or_empty(item.value("display_name", nlohmann::json{}));
        if (cand.title.empty()) {
            cand.title = json_string_or_empty(item.value("title", nlohmann::json{}));
        }
        if (cand.title.empty()) continue;
        std::vector<std::string> names;
        for (const auto& auth : item.value("authorships", nlohmann::json::array())) {
            if (!auth.contains("author")) continue;
            const std::string n =
                json_string_or_empty(auth["author"].value("display_name", nlohmann::json{}));
            if (!n.empty()) names.push_back(n);
        }
        cand.authors = join_authors(names);
        if (item.contains("publication_year") && item["publication_year"].is_number_integer()) {
            cand.year = item["publication_year"].get<int>();
        }
        std::string doi = json_string_or_empty(item.value("doi", nlohmann::json{}));
        // OpenAlex reports DOIs as full https://doi.org/ URLs.
        if (!doi.empty()) {
            if (auto bare = doi_from_url(doi)) {
                cand.doi = *bare;
            } else {
                cand.doi = doi;
            }
        }
        if (item.contains("primary_location") && item["primary_location"].is_object()) {
            const auto& loc = item["primary_location"];
            cand.url = nonempty(
                json_string_or_empty(loc.value("landing_page_url", nlohmann::json{})));
            if (loc.contains("source") && loc["source"].is_object()) {
                cand.venue = nonempty(json_string_or_empty(
                    loc["source"].value("display_name", nlohmann::json{})));
            }
        }
        if (cand.url.has_value()) {
            if (auto axv = arxiv_id_from_url(*cand.url)) cand.arxiv_id = *axv;
        }
        out.push_back(std::move(cand));
    }
    return out;
}

namespace {

// Minimal Atom field extraction; enough for the feed shape arXiv serves.
std::vector<std::string> extract_all(const std::string& body, const std::string& open,
                                     const std::string& close) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t b = body.find(open, pos);
        if (b == std::string::npos) break;
        const std::size_t content = b + open.size();
        const std::size_t e = body.find(close, content);
        if (e == std::string::npos) break;
        out.push_back(body.substr(content, e - content));
        pos = e + close.size();
    }
    return out;
}

std::string strip_xml_whitespace(const std::string& s) {
    std::string collapsed;
    bool space = false;
    for (char c : s) {
        if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
            space = true;
            continue;
        }
        if (space && !collapsed.empty()) collapsed.push_back(' ');
        space = false;
        collapsed.push_back(c);
    }
    return collapsed;
}

}  // namespace

SourceOutcome<std::vector<CandidatePublication>> parse_arxiv_feed(const std::string& body) {
    if (body.find("<feed") == std::string::npos) {
        return malformed(Source::arxiv, "not an Atom feed");
    }
    std::vector<CandidatePublication> out;
    for (const auto& entry : extract_all(body, "<entry>", "</entry>")) {
        CandidatePublication cand;
        cand.source = Source::arxiv;
        const auto titles = extract_all(entry, "<title>", "</title>");
        if (titles.empty()) continue;
        cand.title = strip_xml_whitespace(titles[0]);
        std::vector<std::string> names;
        for (const auto& author : extract_all(entry, "<author>", "</author>")) {
            const auto name = extract_all(author, "<name>", "</name>");
            if (!name.empty()) names.push_back(strip_xml_whitespace(name[0]));
        }
        cand.authors = join_authors(names);
        const auto ids = extract_all(entry, "<id>", "</id>");
        if (!ids.empty()) {
            cand.url = strip_xml_whitespace(ids[0]);
            if (auto axv = arxiv_id_from_url(*cand.url)) cand.arxiv_id = *axv;
        }
        const auto published = extract_all(entry, "<published>", "</published>");
        if (!published.empty() && published[0].size() >= 4) {
            try {
                cand.year = std::stoi(published[0].substr(0, 4));
            } catch (...) {
            }
        }
        out.push_back(std::move(cand));
    }
    return out;
}

SourceOutcome<std::vector<CandidatePublication>> parse_web_search_response(
    const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        return malformed(Source::web_search, "not JSON");
    }
    const nlohmann::json* items = &j;
    if (j.is_object() && j.contains("results")) items = &j["results"];
    if (!items->is_array()) {
        return malformed(Source::web_search, "no result array");
    }
    std::vector<CandidatePublication> out;
    for (const auto& item : *items) {
        if (!item.is_object()) continue;
        CandidatePublication cand;
        cand.source = Source::web_search;
        cand.title = json_string_or_empty(item.value("title", nlohmann::json{}));
        if (cand.title.empty()) continue;
        cand.authors = json_string_or_empty(item.value("authors", nlohmann::json{}));
        if (item.contains("year") && item["year"].is_number_integer()) {
            cand.year = item["year"].get<int>();
        }
        cand.url = nonempty(json_string_or_empty(item.value("url", nlohmann::json{})));
        if (cand.url.has_value()) {
            if (auto axv = arxiv_id_from_url(*cand.url)) cand.arxiv_id = *axv;
            if (auto doi = doi_from_url(*cand.url)) cand.doi = *doi;
        }
        out.push_back(std::move(cand));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

namespace {

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else if (c == ' ') {
            out.push_back('+');
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

using ParseFn = SourceOutcome<std::vector<CandidatePublication>> (*)(const std::string&);

class HttpSourceClient : public SourceClient {
  public:
    HttpSourceClient(Source source, std::string host, ParseFn parse,
                     const LiveSourceConfig& cfg)
        : source_(source), host_(std::move(host)), parse_(parse), cfg_(cfg) {}

    Source name() const override { return source_; }

    SearchResult search(const std::string& query, std::optional<int> year,
                        std::size_t limit) override {
        const auto started = std::chrono::steady_clock::now();
        auto outcome = with_retries<std::vector<CandidatePublication>>(
            [&] { return search_once(query, year, limit); }, cfg_.retry,
            [](Millis d) { std::this_thread::sleep_for(d); });
        return SearchResult{std::move(outcome), elapsed_since(started)};
    }

    LookupResult lookup_id(const std::string& id) override {
        if (source_ != Source::arxiv) return SourceClient::lookup_id(id);
        const auto started = std::chrono::steady_clock::now();
        auto outcome = with_retries<std::optional<CandidatePublication>>(
            [&] { return lookup_once(id); }, cfg_.retry,
            [](Millis d) { std::this_thread::sleep_for(d); });
        return LookupResult{std::move(outcome), elapsed_since(started)};
    }

  private:
    static Millis elapsed_since(std::chrono::steady_clock::time_point started) {
        return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - started);
    }

    SourceOutcome<std::string> fetch(const std::string& path) {
        httplib::Client client(host_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            Millis{cfg_.timeout}));
        client.set_read_timeout(
            std::chrono::duration_cast<std::chrono::seconds>(Millis{cfg_.timeout}));
        client.set_follow_location(true);
        httplib::Headers headers;
        if (source_ == Source::semantic_scholar && !cfg_.s2_api_key.empty()) {
            headers.emplace("x-api-key", cfg_.s2_api_key);
        }
        auto res = client.Get(path, headers);
        if (!res) {
            const auto err = res.error();
            const auto kind = (err == httplib::Error::ConnectionTimeout ||
                               err == httplib::Error::Read)
                                  ? SourceError::Kind::timeout
                                  : SourceError::Kind::transport;
            return SourceError{source_, kind, httplib::to_string(err)};
        }
        if (res->status == 429) {
            return SourceError{source_, SourceError::Kind::rate_limited,
                               "HTTP 429 from service"};
        }
        if (res->status < 200 || res->status >= 300) {
            return SourceError{source_, SourceError::Kind::transport,
                               "HTTP " + std::to_string(res->status)};
        }
        return res->body;
    }

    SourceOutcome<std::vector<CandidatePublication>> search_once(const std::string& query,
                                                                 std::optional<int>,
                                                                 std::size_t limit) {
        auto body = fetch(search_path(query, limit));
        if (body.index() == 1) return std::get<1>(body);
        return parse_(std::get<0>(body));
    }

    SourceOutcome<std::optional<CandidatePublication>> lookup_once(const std::string& id) {
        auto body = fetch("/api/query?id_list=" + url_encode(id) + "&max_results=1");
        if (body.index() == 1) return std::get<1>(body);
        auto parsed = parse_arxiv_feed(std::get<0>(body));
        if (parsed.index() == 1) return std::get<1>(parsed);
        const auto& cands = std::get<0>(parsed);
        if (cands.empty()) return std::optional<CandidatePublication>{};
        return std::optional<CandidatePublication>{cands.front()};
    }

    std::string search_path(const std::string& query, std::size_t limit) const {
        const std::string q = url_encode(query);
        const std::string n = std::to_string(limit);
        switch (source_) {
            case Source::crossref: {
                std::string path = "/works?query.title=" + q + "&rows=" + n;
                if (!cfg_.crossref_mailto.empty()) {
                    path += "&mailto=" + url_encode(cfg_.crossref_mailto);
                }
                return path;
            }
            case Source::semantic_scholar:
                return "/graph/v1/paper/search?query=" + q + "&limit=" + n +
                       "&fields=title,authors,year,venue,url,externalIds";
            case Source::openalex: {
                std::string path = "/works?search=" + q + "&per-page=" + n;
                if (!cfg_.openalex_mailto.empty()) {
                    path += "&mailto=" + url_encode(cfg_.openalex_mailto);
                }
                return path;
            }
            case Source::arxiv:
                return "/api/query?search_query=ti:%22" + q + "%22&max_results=" + n;
            case Source::web_search:
                break;
        }
        return "/";
    }

    Source source_;
    std::string host_;
    ParseFn parse_;
    LiveSourceConfig cfg_;
};

// POSTs {"query": ...} to the configured bridge endpoint and maps the JSON
// results. The bridge hides whichever hosted search service is in use.
class WebSearchBridgeClient : public SourceClient {
  public:
    explicit WebSearchBridgeClient(const LiveSourceConfig& cfg) : cfg_(cfg) {}

    Source name() const override { return Source::web_search; }

    SearchResult search(const std::string& query, std::optional<int>,
                        std::size_t limit) override {
        const auto started = std::chrono::steady_clock::now();
        auto outcome = with_retries<std::vector<CandidatePublication>>(
            [&] { return search_once(query, limit); }, cfg_.retry,
            [](Millis d) { std::this_thread::sleep_for(d); });
        const auto elapsed = std::chrono::duration_cast<Millis>(
            std::chrono::steady_clock::now() - started);
        return SearchResult{std::move(outcome), elapsed};
    }

  private:
    SourceOutcome<std::vector<CandidatePublication>> search_once(const std::string& query,
                                                                 std::size_t limit) {
        const auto scheme_end = cfg_.web_search_endpoint.find("://");
        std::string host = cfg_.web_search_endpoint;
        std::string path = "/";
        if (scheme_end != std::string::npos) {
            const auto path_begin = host.find('/', scheme_end + 3);
            if (path_begin != std::string::npos) {
                path = host.substr(path_begin);
                host = host.substr(0, path_begin);
            }
        }
        httplib::Client client(host);
        client.set_read_timeout(
            std::chrono::duration_cast<std::chrono::seconds>(Millis{cfg_.timeout}));
        httplib::Headers headers;
        if (!cfg_.search_api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + cfg_.search_api_key);
        }
        nlohmann::json req{{"query", query}, {"limit", limit}};
        auto res = client.Post(path, headers, req.dump(), "application/json");
        if (!res) {
            return SourceError{Source::web_search, SourceError::Kind::transport,
                               httplib::to_string(res.error())};
        }
        if (res->status < 200 || res->status >= 300) {
            return SourceError{Source::web_search, SourceError::Kind::transport,
                               "HTTP " + std::to_string(res->status)};
        }
        return parse_web_search_response(res->body);
    }

    LiveSourceConfig cfg_;
};

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string{} : std::string{v};
}

}  // namespace

LiveSourceConfig live_config_from_env() {
    LiveSourceConfig cfg;
    cfg.crossref_mailto = env_or_empty("CITEGATE_CROSSREF_MAILTO");
    cfg.openalex_mailto = env_or_empty("CITEGATE_OPENALEX_MAILTO");
    cfg.s2_api_key = env_or_empty("CITEGATE_S2_API_KEY");
    cfg.search_api_key = env_or_empty("CITEGATE_SEARCH_API_KEY");
    cfg.web_search_endpoint = env_or_empty("CITEGATE_SEARCH_ENDPOINT");
    return cfg;
}

std::unique_ptr<SourceClient> make_live_client(Source source, const LiveSourceConfig& cfg) {
    std::unique_ptr<SourceClient> inner;
    switch (source) {
        case Source::crossref:
            inner = std::make_unique<HttpSourceClient>(source, "https://api.crossref.org",
                                                       &parse_crossref_response, cfg);
            break;
        case Source::semantic_scholar:
            inner = std::make_unique<HttpSourceClient>(
                source, "https://api.semanticscholar.org",
                &parse_semantic_scholar_response, cfg);
            break;
        case Source::openalex:
            inner = std::make_unique<HttpSourceClient>(source, "https://api.openalex.org",
                                                       &parse_openalex_response, cfg);
            break;
        case Source::arxiv:
            inner = std::make_unique<HttpSourceClient>(source, "https://export.arxiv.org",
                                                       &parse_arxiv_feed, cfg);
            break;
        case Source::web_search:
            if (cfg.web_search_endpoint.empty()) return nullptr;
            inner = std::make_unique<WebSearchBridgeClient>(cfg);
            break;
    }
    auto limiter = std::make_shared<RateLimiter>(cfg.rate_limit_calls, cfg.rate_limit_window);
    return std::make_unique<RateLimitedClient>(std::move(inner), std::move(limiter));
}

}  // namespace citegate
