#pragma once
// Service configuration and provider selection.
// Precedence, lowest first: defaults, environment, command-line flags,
// config file.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flpadv/embedding.hpp"
#include "flpadv/ingestion.hpp"
#include "flpadv/llm.hpp"
#include "flpadv/recommender.hpp"

namespace flpadv {

enum class ProviderMode { Mock, Remote };

ProviderMode parse_provider_mode(std::string_view text);  // ConfigError
std::string_view to_string(ProviderMode mode);

struct ServiceConfig {
    std::filesystem::path store_path;
    std::string host = "127.0.0.1";
    int http_port = 8080;
    ProviderMode provider_mode = ProviderMode::Mock;
    std::string llm_endpoint;
    std::string llm_key;
    std::string embed_endpoint;
    std::string embed_key;
    std::size_t graph_limit = kDefaultGraphLimit;
    std::size_t vector_k = kDefaultVectorK;
    std::optional<std::int64_t> small_max;
    std::optional<std::int64_t> medium_max;
    std::optional<std::filesystem::path> families_path;
    // Route feedback to a separate pending snapshot instead of the live store.
    bool feedback_pending = false;
    std::optional<std::filesystem::path> pending_path;

    // ConfigError on inconsistent settings.
    void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char* name)>;

// Reads FLPADV_PROVIDERS, FLPADV_LLM_ENDPOINT, FLPADV_LLM_KEY,
// FLPADV_EMBED_ENDPOINT and FLPADV_EMBED_KEY. Unset or empty variables
// leave the field alone.
void apply_environment(ServiceConfig& config, const EnvLookup& lookup);
void apply_environment(ServiceConfig& config);

// Keys mirror the struct field names. Unknown keys are a ConfigError.
void apply_config_json(ServiceConfig& config, const nlohmann::json& json);
void apply_config_file(ServiceConfig& config, const std::filesystem::path& path);

ClusterConfig cluster_config(const ServiceConfig& config);
RecommenderConfig recommender_config(const ServiceConfig& config);

struct Providers {
    std::unique_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<LlmProvider> llm;
    std::unique_ptr<LlmProvider> judge;  // separate instance from the recommender's
};

// Mock mode needs no endpoints; remote mode needs both.
Providers make_providers(const ServiceConfig& config);

}  // namespace flpadv
