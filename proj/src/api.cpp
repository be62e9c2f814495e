#include "flpadv/api.hpp"

#include <sys/socket.h>

#include <httplib.h>

#include "flpadv/error.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

using nlohmann::json;

ApiResponse error_response(int status, std::string code, std::string message, json details) {
    return {status, {{"error", {{"code", std::move(code)}, {"message", std::move(message)}, {"details", std::move(details)}}}}};
}

ApiResponse error_response(const std::exception& error) {
    if (const auto* e = dynamic_cast<const UnknownEntity*>(&error))
        return error_response(422, e->code(), e->what(),
                              {{"field", e->field()}, {"name", e->name()}, {"suggestions", e->suggestions()}});
    if (const auto* e = dynamic_cast<const ValidationError*>(&error)) {
        json fields = json::object();
        for (const auto& f : e->errors()) {
            if (fields.contains(f.field)) fields[f.field] = fields[f.field].get<std::string>() + "; " + f.message;
            else fields[f.field] = f.message;
        }
        return error_response(422, e->code(), e->what(), {{"fields", fields}});
    }
    if (const auto* e = dynamic_cast<const ProviderError*>(&error)) return error_response(503, e->code(), e->what());
    if (const auto* e = dynamic_cast<const MalformedResponse*>(&error))
        return error_response(502, e->code(), e->what());
    if (const auto* e = dynamic_cast<const EmptyEvidence*>(&error)) return error_response(404, e->code(), e->what());
    if (const auto* e = dynamic_cast<const EmptyStore*>(&error)) return error_response(404, e->code(), e->what());
    if (const auto* e = dynamic_cast<const Error*>(&error)) return error_response(500, e->code(), e->what());
    return error_response(500, "internal_error", error.what());
}

json to_json(const KnowledgeBaseStats& s) {
    return {{"node_count_by_label", s.node_count_by_label},
            {"edge_count_by_type", s.edge_count_by_type},
            {"max_num_facilities", s.max_num_facilities},
            {"facility_top_quartile", s.facility_top_quartile}};
}

json to_json(const EvidenceDossier& d) {
    json rows = json::array();
    for (const auto& r : d.graph_rows)
        rows.push_back({{"problem_id", r.problem_id},
                        {"num_facilities", r.num_facilities},
                        {"objectives", r.objective_names},
                        {"constraints", r.constraint_names},
                        {"representation", r.representation},
                        {"constraint_handling", r.constraint_handling},
                        {"solution_id", r.solution_id},
                        {"method", r.method},
                        {"model_parameters", r.model_parameters},
                        {"cost", r.cost},
                        {"time_sec", r.time_sec},
                        {"source", r.source},
                        {"objective_score", r.objective_score},
                        {"constraint_score", r.constraint_score},
                        {"facility_distance", r.facility_distance}});
    json vectors = json::array();
    for (const auto& v : d.vector_matches)
        vectors.push_back({{"problem_id", v.match.problem_id},
                           {"similarity", v.match.similarity},
                           {"description_text", v.match.description_text},
                           {"methods", v.methods}});
    json trends = json::array();
    for (const auto& t : d.trends) {
        json entries = json::array();
        for (const auto& e : t.entries)
            entries.push_back({{"method", e.method}, {"count", e.count}, {"mean_cost", e.mean_cost}});
        trends.push_back({{"cluster_kind", t.cluster_kind}, {"cluster_label", t.cluster_label}, {"entries", entries}});
    }
    return {{"graph_rows", rows}, {"used_fallback", d.used_fallback}, {"vector_matches", vectors}, {"trends", trends}};
}

json to_json(const RecommendResult& r) {
    const auto& rec = r.recommendation;
    json params = json::array();
    for (const auto& p : rec.model_parameters)
        params.push_back({{"method", p.method}, {"model_parameters", p.model_parameters}, {"problem_id", p.problem_id}});
    auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(); };
    return {{"recommendation",
             {{"methods", rec.methods},
              {"parameters", params},
              {"representation", opt(rec.representation)},
              {"constraint_handling", opt(rec.constraint_handling)},
              {"grounded", rec.grounded},
              {"ungrounded_methods", rec.ungrounded_methods},
              {"text", rec.recommendation_text}}},
            {"reasoning", rec.reasoning},
            {"cited_problem_ids", rec.cited_problem_ids},
            {"evidence", to_json(r.dossier)},
            {"warnings", r.warnings},
            {"llm_calls", r.llm_calls},
            {"corrective_retry", r.corrective_retry}};
}

json to_json(const FeedbackReport& r) {
    return {{"problem_id", r.problem_id},
            {"created_nodes", r.created_nodes},
            {"linked_existing", r.linked_existing},
            {"reclustered", r.reclustered},
            {"embedded", r.embedded}};
}

namespace {

std::vector<std::string> names_field(const json& body, const char* key, std::vector<FieldError>& errors) {
    std::vector<std::string> out;
    if (!body.contains(key) || body[key].is_null()) return out;
    const auto& v = body[key];
    if (!v.is_array()) {
        errors.push_back({key, "must be a list of strings"});
        return out;
    }
    for (const auto& item : v) {
        if (!item.is_string()) {
            errors.push_back({key, "must be a list of strings"});
            return {};
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::optional<std::string> text_field(const json& body, const char* key, std::vector<FieldError>& errors) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_string()) {
        errors.push_back({key, "must be a string"});
        return std::nullopt;
    }
    auto s = body[key].get<std::string>();
    if (text::trim(s).empty()) return std::nullopt;
    return s;
}

json parse_body(std::string_view body) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("request body is not valid JSON");
    if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
    return j;
}

}  // namespace

QueryInput query_from_json(const json& body) {
    std::vector<FieldError> errors;
    QueryInput q;
    if (body.contains("num_facilities") && !body["num_facilities"].is_null()) {
        const auto& n = body["num_facilities"];
        if (n.is_number_integer()) q.num_facilities = n.get<std::int64_t>();
        else if (n.is_number_float() && n.get<double>() == static_cast<double>(static_cast<std::int64_t>(n.get<double>())))
            q.num_facilities = static_cast<std::int64_t>(n.get<double>());
        else errors.push_back({"num_facilities", "must be an integer"});
    }
    q.objectives = names_field(body, "objectives", errors);
    q.constraints = names_field(body, "constraints", errors);
    q.representation = text_field(body, "representation", errors);
    q.free_text = text_field(body, "free_text", errors);
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return q;
}

FeedbackRecord feedback_from_json(const json& body) {
    std::vector<FieldError> errors;
    FeedbackRecord record;
    for (const auto& [key, value] : body.items()) {
        auto column = normalize_header(key);
        if (value.is_null()) continue;
        if (value.is_string()) record[column] = value.get<std::string>();
        else if (value.is_number_integer()) record[column] = std::to_string(value.get<std::int64_t>());
        else if (value.is_number()) record[column] = text::format_real(value.get<double>());
        else if (value.is_array() && (column == "objective" || column == "constraints")) {
            std::vector<std::string> parts;
            for (const auto& item : value) {
                if (!item.is_string()) {
                    errors.push_back({column, "must be a string or list of strings"});
                    break;
                }
                parts.push_back(item.get<std::string>());
            }
            record[column] = text::join(parts, ", ");
        } else {
            errors.push_back({column, "must be a string or number"});
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return record;
}

Service::Service(ServiceConfig config, Providers providers, Graph graph)
    : config_(std::move(config)),
      providers_(std::move(providers)),
      clusters_(cluster_config(config_)),
      store_(std::move(graph)),
      index_(store_, *providers_.embedder),
      recommender_(store_, &index_, *providers_.llm, recommender_config(config_)) {
    if (config_.feedback_pending) {
        auto path = config_.pending_path;
        if (path && std::filesystem::exists(*path)) pending_ = std::make_unique<GraphStore>(Graph::snapshot_load(*path));
        else pending_ = std::make_unique<GraphStore>();
    }
    refresh_stats();
}

std::unique_ptr<Service> Service::open(ServiceConfig config, Providers providers) {
    config.validate();
    Graph graph;
    if (!config.store_path.empty() && std::filesystem::exists(config.store_path))
        graph = Graph::snapshot_load(config.store_path);
    return std::make_unique<Service>(std::move(config), std::move(providers), std::move(graph));
}

void Service::refresh_stats() {
    auto snap = store_.snapshot();
    std::optional<KnowledgeBaseStats> fresh;
    if (snap->problem_count() > 0) fresh = snap->stats();
    std::lock_guard lock(stats_mutex_);
    stats_ = std::move(fresh);
}

void Service::persist(const GraphStore& store, const std::filesystem::path& path) {
    if (path.empty()) return;
    std::lock_guard lock(persist_mutex_);
    store.snapshot()->snapshot_save(path);
}

ApiResponse Service::health() const { return {200, {{"status", "ok"}}}; }

ApiResponse Service::entities() const {
    auto snap = store_.snapshot();
    return {200,
            {{"objectives", snap->catalog_names(NodeLabel::Objective)},
             {"constraints", snap->catalog_names(NodeLabel::Constraint)},
             {"representations", snap->catalog_names(NodeLabel::Representation)},
             {"methods", snap->catalog_names(NodeLabel::Method)},
             {"constraint_handlings", snap->catalog_names(NodeLabel::ConstraintHandling)}}};
}

ApiResponse Service::recommend(std::string_view body) const {
    try {
        auto input = query_from_json(parse_body(body));
        auto snap = store_.snapshot();
        auto query = normalize_query(*snap, input);
        return {200, to_json(recommender_.recommend(*snap, query))};
    } catch (const std::invalid_argument& e) {
        return error_response(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return error_response(e);
    }
}

ApiResponse Service::feedback(std::string_view body) {
    try {
        auto record = feedback_from_json(parse_body(body));
        if (pending_) {
            auto report = ingest_feedback(*pending_, nullptr, record, clusters_);
            persist(*pending_, config_.pending_path.value_or(std::filesystem::path()));
            auto out = to_json(report);
            out["pending"] = true;
            return {200, out};
        }
        auto report = ingest_feedback(store_, &index_, record, clusters_);
        refresh_stats();
        persist(store_, config_.store_path);
        auto out = to_json(report);
        out["pending"] = false;
        return {200, out};
    } catch (const std::invalid_argument& e) {
        return error_response(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return error_response(e);
    }
}

ApiResponse Service::stats() const {
    std::lock_guard lock(stats_mutex_);
    if (!stats_) return error_response(EmptyStore());
    return {200, to_json(*stats_)};
}

ApiResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
    if (path == "/api/health" && method == "GET") return health();
    if (path == "/api/entities" && method == "GET") return entities();
    if (path == "/api/stats" && method == "GET") return stats();
    if (path == "/api/recommend" && method == "POST") return recommend(body);
    if (path == "/api/feedback" && method == "POST") return feedback(body);
    return error_response(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
}

void register_routes(httplib::Server& server, Service& service) {
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/api/health", [&, reply](const httplib::Request&, httplib::Response& res) { reply(res, service.health()); });
    server.Get("/api/entities",
               [&, reply](const httplib::Request&, httplib::Response& res) { reply(res, service.entities()); });
    server.Get("/api/stats", [&, reply](const httplib::Request&, httplib::Response& res) { reply(res, service.stats()); });
    server.Post("/api/recommend", [&, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.recommend(req.body));
    });
    server.Post("/api/feedback", [&, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.feedback(req.body));
    });
    server.set_error_handler([reply](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404)
            reply(res, error_response(404, "not_found", "no route for " + req.method + " " + req.path));
    });
    server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            reply(res, error_response(e));
        } catch (...) {
            reply(res, error_response(500, "internal_error", "unknown error"));
        }
    });
}

HttpServer::HttpServer(Service& service) : server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEPORT (the library default) would let a second server share an
    // occupied port.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    register_routes(*server_, service);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host + " to any port");
        return bound;
    }
    if (!server_->bind_to_port(host, port))
        throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (address in use or not permitted)");
    return port;
}

void HttpServer::listen() {
    if (!server_->listen_after_bind() && !server_->is_valid()) throw IoError("HTTP server stopped unexpectedly");
}

void HttpServer::stop() {
    if (server_) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

}  // namespace flpadv
