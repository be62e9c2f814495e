#include "flpadv/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flpadv/error.hpp"
#include "flpadv/eval.hpp"
#include "flpadv/remote.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

ProviderMode parse_provider_mode(std::string_view text) {
    auto t = text::to_lower(text::trim(text));
    if (t == "mock") return ProviderMode::Mock;
    if (t == "remote") return ProviderMode::Remote;
    throw ConfigError("provider mode must be 'mock' or 'remote', got '" + std::string(text) + "'");
}

std::string_view to_string(ProviderMode mode) { return mode == ProviderMode::Mock ? "mock" : "remote"; }

void ServiceConfig::validate() const {
    if (http_port < 0 || http_port > 65535) throw ConfigError("http_port out of range");
    if (graph_limit == 0) throw ConfigError("graph_limit must be positive");
    if (vector_k == 0) throw ConfigError("vector_k must be positive");
    if (small_max && *small_max < 1) throw ConfigError("small_max must be positive");
    if (small_max && medium_max && *medium_max <= *small_max)
        throw ConfigError("medium_max must exceed small_max");
    if (provider_mode == ProviderMode::Remote && (llm_endpoint.empty() || embed_endpoint.empty()))
        throw ConfigError("remote providers need both FLPADV_LLM_ENDPOINT and FLPADV_EMBED_ENDPOINT");
}

void apply_environment(ServiceConfig& config, const EnvLookup& lookup) {
    auto get = [&](const char* name) -> std::optional<std::string> {
        auto v = lookup(name);
        if (!v || v->empty()) return std::nullopt;
        return v;
    };
    if (auto v = get("FLPADV_PROVIDERS")) config.provider_mode = parse_provider_mode(*v);
    if (auto v = get("FLPADV_LLM_ENDPOINT")) config.llm_endpoint = *v;
    if (auto v = get("FLPADV_LLM_KEY")) config.llm_key = *v;
    if (auto v = get("FLPADV_EMBED_ENDPOINT")) config.embed_endpoint = *v;
    if (auto v = get("FLPADV_EMBED_KEY")) config.embed_key = *v;
}

void apply_environment(ServiceConfig& config) {
    apply_environment(config, [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v) return std::nullopt;
        return std::string(v);
    });
}

void apply_config_json(ServiceConfig& config, const nlohmann::json& json) {
    if (!json.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (const auto& [key, value] : json.items()) {
            if (key == "store_path") config.store_path = value.get<std::string>();
            else if (key == "host") config.host = value.get<std::string>();
            else if (key == "http_port") config.http_port = value.get<int>();
            else if (key == "provider_mode") config.provider_mode = parse_provider_mode(value.get<std::string>());
            else if (key == "llm_endpoint") config.llm_endpoint = value.get<std::string>();
            else if (key == "llm_key") config.llm_key = value.get<std::string>();
            else if (key == "embed_endpoint") config.embed_endpoint = value.get<std::string>();
            else if (key == "embed_key") config.embed_key = value.get<std::string>();
            else if (key == "graph_limit") config.graph_limit = value.get<std::size_t>();
            else if (key == "vector_k") config.vector_k = value.get<std::size_t>();
            else if (key == "small_max") config.small_max = value.get<std::int64_t>();
            else if (key == "medium_max") config.medium_max = value.get<std::int64_t>();
            else if (key == "families_path") config.families_path = value.get<std::string>();
            else if (key == "feedback_pending") config.feedback_pending = value.get<bool>();
            else if (key == "pending_path") config.pending_path = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

void apply_config_file(ServiceConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto json = nlohmann::json::parse(buf.str(), nullptr, false);
    if (json.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
    auto base = path.parent_path();
    apply_config_json(config, json);
    // Relative paths inside the file are relative to the file.
    auto rebase = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    if (json.contains("store_path")) rebase(config.store_path);
    if (json.contains("families_path")) rebase(*config.families_path);
    if (json.contains("pending_path")) rebase(*config.pending_path);
}

ClusterConfig cluster_config(const ServiceConfig& config) {
    auto clusters = config.families_path ? ClusterConfig::from_file(*config.families_path)
                                         : ClusterConfig::defaults();
    if (config.small_max) clusters.small_max = *config.small_max;
    if (config.medium_max) clusters.medium_max = *config.medium_max;
    if (clusters.medium_max <= clusters.small_max) throw ConfigError("medium_max must exceed small_max");
    return clusters;
}

RecommenderConfig recommender_config(const ServiceConfig& config) {
    RecommenderConfig rc;
    rc.retrieval.graph_limit = config.graph_limit;
    rc.retrieval.vector_k = config.vector_k;
    rc.retrieval.clusters = cluster_config(config);
    return rc;
}

Providers make_providers(const ServiceConfig& config) {
    config.validate();
    Providers p;
    if (config.provider_mode == ProviderMode::Mock) {
        p.embedder = std::make_unique<MockEmbeddingProvider>();
        p.llm = std::make_unique<EvidenceMockLlm>();
        p.judge = std::make_unique<RubricMockJudge>();
        return p;
    }
    p.embedder = std::make_unique<RemoteEmbeddingProvider>(config.embed_endpoint, config.embed_key);
    p.llm = std::make_unique<RemoteLlmProvider>(config.llm_endpoint, config.llm_key);
    p.judge = std::make_unique<RemoteLlmProvider>(config.llm_endpoint, config.llm_key);
    return p;
}

}  // namespace flpadv
