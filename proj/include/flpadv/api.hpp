#pragma once
// HTTP/JSON service. Handlers are plain member functions so they can be
// exercised without a socket; register_routes() wires them into httplib.

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flpadv/config.hpp"
#include "flpadv/embedding.hpp"
#include "flpadv/feedback.hpp"
#include "flpadv/graph_store.hpp"
#include "flpadv/recommender.hpp"

namespace httplib {
class Server;
}

namespace flpadv {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

// {"error": {"code", "message", "details"}} with the matching status.
ApiResponse error_response(const std::exception& error);
ApiResponse error_response(int status, std::string code, std::string message,
                           nlohmann::json details = nlohmann::json::object());

nlohmann::json to_json(const KnowledgeBaseStats& stats);
nlohmann::json to_json(const EvidenceDossier& dossier);
nlohmann::json to_json(const RecommendResult& result);
nlohmann::json to_json(const FeedbackReport& report);

// Request bodies. ValidationError for wrong field types.
QueryInput query_from_json(const nlohmann::json& body);
FeedbackRecord feedback_from_json(const nlohmann::json& body);

class Service {
public:
    // Takes ownership of the providers. The graph is the boot-time store.
    Service(ServiceConfig config, Providers providers, Graph graph);

    // Loads config.store_path when it exists, otherwise starts empty.
    static std::unique_ptr<Service> open(ServiceConfig config, Providers providers);

    ApiResponse health() const;
    ApiResponse entities() const;
    ApiResponse recommend(std::string_view body) const;
    ApiResponse feedback(std::string_view body);
    ApiResponse stats() const;

    // Routes by method and path; unknown routes get 404.
    ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

    GraphStore& store() { return store_; }
    GraphStore* pending_store() { return pending_.get(); }
    const Recommender& recommender() const { return recommender_; }
    EmbeddingIndex& index() { return index_; }
    const ServiceConfig& config() const { return config_; }
    const ClusterConfig& clusters() const { return clusters_; }

private:
    void refresh_stats();
    void persist(const GraphStore& store, const std::filesystem::path& path);

    ServiceConfig config_;
    Providers providers_;
    ClusterConfig clusters_;
    GraphStore store_;
    std::unique_ptr<GraphStore> pending_;
    EmbeddingIndex index_;
    Recommender recommender_;

    mutable std::mutex stats_mutex_;
    std::optional<KnowledgeBaseStats> stats_;  // nullopt while the store is empty
    std::mutex persist_mutex_;
};

void register_routes(httplib::Server& server, Service& service);

// Blocks until stop() is called on the returned server from another thread.
// Throws IoError when the address cannot be bound.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    // Binds (port 0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    void listen();  // blocks
    void stop();
    bool running() const;

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace flpadv
