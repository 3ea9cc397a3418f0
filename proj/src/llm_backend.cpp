#include "citegate/llm_backend.hpp"

#include <cstdlib>

#include <httplib.h>

namespace citegate {

namespace {

const char* schema_instruction(SchemaTag tag) {
    if (tag == SchemaTag::verifier) {
        return "Respond with a single JSON object only, no markdown fences, with exactly "
               "these keys: \"score\" (number 0-10), \"classification\" (\"exact_match\" | "
               "\"minor_hallucination\" | \"major_hallucination\"), \"confidence\" (\"low\" | "
               "\"medium\" | \"high\"), \"reasoning\" (string), \"key_differences\" (array of "
               "strings).";
    }
    return "Respond with a single JSON object only, no markdown fences, with exactly these "
           "keys: \"classification\" (\"exact_match\" | \"minor_hallucination\" | "
           "\"major_hallucination\"), \"reasoning\" (string).";
}

}  // namespace

std::variant<nlohmann::json, BackendError> parse_chat_completion_json(const std::string& body) {
    nlohmann::json response = nlohmann::json::parse(body, nullptr, false);
    if (response.is_discarded()) return BackendError{"response body is not JSON", body};
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty()) {
        return BackendError{"no choices in response", body};
    }
    const auto& first = response["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        return BackendError{"no message content in response", body};
    }
    std::string content = first["message"]["content"].get<std::string>();
    // tolerate fenced output from models that ignore the no-fences rule
    const auto brace = content.find('{');
    const auto last_brace = content.rfind('}');
    if (brace == std::string::npos || last_brace == std::string::npos || last_brace < brace) {
        return BackendError{"no JSON object in content", content};
    }
    nlohmann::json verdict =
        nlohmann::json::parse(content.substr(brace, last_brace - brace + 1), nullptr, false);
    if (verdict.is_discarded()) return BackendError{"content is not valid JSON", content};
    return verdict;
}

OpenAiCompatibleBackend::OpenAiCompatibleBackend(LlmBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (const char* key = std::getenv("CITEGATE_LLM_API_KEY")) api_key_ = key;
}

std::variant<nlohmann::json, BackendError> OpenAiCompatibleBackend::judge(
    const std::string& prompt, SchemaTag tag) {
    std::string host = cfg_.base_url;
    std::string base_path;
    const auto scheme_end = host.find("://");
    if (scheme_end != std::string::npos) {
        const auto path_begin = host.find('/', scheme_end + 3);
        if (path_begin != std::string::npos) {
            base_path = host.substr(path_begin);
            host = host.substr(0, path_begin);
        }
    }
    httplib::Client client(host);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    nlohmann::json request;
    request["model"] = cfg_.model;
    request["temperature"] = cfg_.temperature;
    request["messages"] = nlohmann::json::array(
        {{{"role", "system"}, {"content", schema_instruction(tag)}},
         {{"role", "user"}, {"content", prompt}}});

    auto res = client.Post(base_path + "/v1/chat/completions", headers, request.dump(),
                           "application/json");
    if (!res) return BackendError{"transport: " + httplib::to_string(res.error()), ""};
    if (res->status < 200 || res->status >= 300) {
        return BackendError{"HTTP " + std::to_string(res->status), res->body};
    }
    return parse_chat_completion_json(res->body);
}

}  // namespace citegate
