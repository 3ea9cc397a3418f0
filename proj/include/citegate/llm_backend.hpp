#pragma once

#include <memory>
#include <string>

#include "citegate/verifier.hpp"

namespace citegate {

// Hosted judge over an OpenAI-compatible chat-completions endpoint. The
// prompt is sent as the user message with an instruction to answer with the
// schema's JSON object only; the response content is parsed as JSON.
// API key comes from CITEGATE_LLM_API_KEY.
struct LlmBackendConfig {
    std::string base_url = "https://api.openai.com";
    std::string model;
    double temperature = 0.0;
    Millis timeout{30'000};
};

class OpenAiCompatibleBackend : public VerifierBackend {
  public:
    explicit OpenAiCompatibleBackend(LlmBackendConfig cfg);
    std::variant<nlohmann::json, BackendError> judge(const std::string& prompt,
                                                     SchemaTag tag) override;

  private:
    LlmBackendConfig cfg_;
    std::string api_key_;
};

// Extracts the first JSON object from a chat-completions response body
// (choices[0].message.content, with optional code fences tolerated).
std::variant<nlohmann::json, BackendError> parse_chat_completion_json(const std::string& body);

}  // namespace citegate
