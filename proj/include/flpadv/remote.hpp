#pragma once
// JSON-over-HTTP providers.
//   embeddings: POST {"text": "..."}   -> {"embedding": [..]}
//   completion: POST {"prompt": "..."} -> {"text": "..."}
// The key, when set, is sent as "Authorization: Bearer <key>".

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flpadv/embedding.hpp"
#include "flpadv/llm.hpp"

namespace flpadv {

namespace http {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always starts with '/'
};

// Throws ConfigError for anything but http:// or https:// URLs.
Url parse_url(std::string_view url);

// Any transport error, non-2xx status, or unparsable body becomes ProviderError.
nlohmann::json post_json(const std::string& url, const std::string& bearer_key,
                         const nlohmann::json& body, std::chrono::seconds timeout);

}  // namespace http

class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    // dimension 0 means "learn it from the first response".
    RemoteEmbeddingProvider(std::string endpoint, std::string key, std::size_t dimension = 0,
                            std::chrono::seconds timeout = std::chrono::seconds(30));

    std::vector<double> embed(std::string_view text) override;
    std::size_t dimension() const override;

private:
    std::string endpoint_;
    std::string key_;
    std::chrono::seconds timeout_;
    mutable std::mutex mutex_;
    mutable std::size_t dimension_;
};

class RemoteLlmProvider final : public LlmProvider {
public:
    RemoteLlmProvider(std::string endpoint, std::string key,
                      std::chrono::seconds timeout = std::chrono::seconds(120));

    std::string complete(const std::string& prompt) override;

private:
    std::string endpoint_;
    std::string key_;
    std::chrono::seconds timeout_;
};

}  // namespace flpadv
