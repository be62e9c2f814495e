// flpadv: command-line front end for the FLP algorithm advisor.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flpadv/api.hpp"
#include "flpadv/config.hpp"
#include "flpadv/csv.hpp"
#include "flpadv/error.hpp"
#include "flpadv/eval.hpp"
#include "flpadv/feedback.hpp"
#include "flpadv/ingestion.hpp"
#include "flpadv/text.hpp"

using namespace flpadv;

namespace {

struct CommonFlags {
    std::string db;
    std::string providers;
    std::string config_file;
    std::string families;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool db_required = true) {
    auto* db = cmd->add_option("--db", f.db, "Snapshot file of the knowledge base");
    if (db_required) db->required();
    cmd->add_option("--providers", f.providers, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
    cmd->add_option("--config", f.config_file, "JSON config file (overrides flags)");
    cmd->add_option("--families", f.families, "Method family lookup table (JSON)");
}

ServiceConfig build_config(const CommonFlags& f) {
    ServiceConfig c;
    apply_environment(c);
    if (!f.db.empty()) c.store_path = f.db;
    if (!f.providers.empty()) c.provider_mode = parse_provider_mode(f.providers);
    if (!f.families.empty()) c.families_path = f.families;
    if (!f.config_file.empty()) apply_config_file(c, f.config_file);
    c.validate();
    return c;
}

std::unique_ptr<Service> open_service(const ServiceConfig& c) { return Service::open(c, make_providers(c)); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_row_errors(const std::vector<RowError>& errors) {
    for (const auto& e : errors) std::cerr << "  line " << e.line << ": " << e.reason << '\n';
}

void print_recommendation(const RecommendResult& r) {
    const auto& rec = r.recommendation;
    std::cout << "RECOMMENDATION: " << text::join(rec.methods, ", ") << '\n';
    for (const auto& p : rec.model_parameters)
        if (!p.model_parameters.empty())
            std::cout << "  " << p.method << " parameters: " << p.model_parameters << " (from " << p.problem_id << ")\n";
    if (rec.representation) std::cout << "  representation: " << *rec.representation << '\n';
    if (rec.constraint_handling) std::cout << "  constraint handling: " << *rec.constraint_handling << '\n';
    std::cout << "REASONING: " << rec.reasoning << "\n\n";
    std::cout << "grounded: " << (rec.grounded ? "yes" : "no") << "  llm calls: " << r.llm_calls << '\n';
    for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';

    const auto& d = r.dossier;
    std::cout << "\ngraph evidence" << (d.used_fallback ? " (fallback)" : "") << ":\n";
    std::cout << "  problem | n | method | cost | time_sec | obj | cons | dist\n";
    for (const auto& g : d.graph_rows)
        std::cout << "  " << g.problem_id << " | " << g.num_facilities << " | " << g.method << " | "
                  << text::format_real(g.cost) << " | " << text::format_real(g.time_sec) << " | "
                  << g.objective_score << " | " << g.constraint_score << " | " << g.facility_distance << '\n';
    if (!d.vector_matches.empty()) {
        std::cout << "vector evidence:\n";
        for (const auto& v : d.vector_matches) {
            char sim[32];
            std::snprintf(sim, sizeof(sim), "%.4f", v.match.similarity);
            std::cout << "  " << v.match.problem_id << " | " << sim << " | " << text::join(v.methods, ", ") << '\n';
        }
    }
    if (!d.trends.empty()) {
        std::cout << "cluster trends:\n";
        for (const auto& t : d.trends) {
            std::cout << "  " << t.cluster_kind << ':' << t.cluster_label;
            for (const auto& e : t.entries)
                std::cout << " | " << e.method << " x" << e.count << " (mean cost " << text::format_real(e.mean_cost) << ')';
            std::cout << '\n';
        }
    }
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidence-grounded algorithm advisor for facility layout problems"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* ingest = app.add_subcommand("ingest", "Load a corpus CSV into the knowledge base and embed new problems");
    std::string corpus_path;
    ingest->add_option("corpus", corpus_path, "Corpus CSV")->required()->check(CLI::ExistingFile);
    add_common(ingest, flags);

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    bool pending = false;
    std::string pending_db;
    serve->add_option("--host", host, "Bind address");
    auto* port_opt = serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_flag("--feedback-pending", pending, "Route feedback to a pending snapshot");
    serve->add_option("--pending-db", pending_db, "Pending snapshot file");
    add_common(serve, flags);

    auto* recommend = app.add_subcommand("recommend", "Recommend algorithms for one query");
    std::int64_t facilities = 0;
    std::vector<std::string> objectives, constraints;
    std::string representation, free_text;
    bool as_json = false;
    auto* fac_opt = recommend->add_option("--facilities", facilities, "Number of facilities");
    recommend->add_option("--objective", objectives, "Objective name (repeatable)");
    recommend->add_option("--constraint", constraints, "Constraint name (repeatable)");
    recommend->add_option("--representation", representation, "Problem representation");
    recommend->add_option("--free-text", free_text, "Free-text problem description");
    recommend->add_flag("--json", as_json, "Print the API response body instead of text");
    add_common(recommend, flags);

    auto* eval = app.add_subcommand("eval", "Run an evaluation suite");
    std::string cases_path, judge_mode, baseline_path;
    bool parallel = false;
    eval->add_option("--cases", cases_path, "Cases file (JSON)")->required()->check(CLI::ExistingFile);
    eval->add_option("--judge", judge_mode, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
    eval->add_option("--baseline", baseline_path, "Also run the raw-CSV baseline on this corpus")
        ->check(CLI::ExistingFile);
    eval->add_flag("--parallel", parallel, "Run pipeline cases concurrently");
    add_common(eval, flags);

    auto* stats = app.add_subcommand("stats", "Print knowledge base statistics");
    add_common(stats, flags);

    auto* feedback = app.add_subcommand("feedback", "Submit solved instances from a CSV file as feedback");
    std::string feedback_path;
    feedback->add_option("records", feedback_path, "Feedback CSV")->required()->check(CLI::ExistingFile);
    add_common(feedback, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            auto config = build_config(flags);
            auto svc = open_service(config);
            auto parsed = read_corpus_file(corpus_path);
            auto report = load_corpus(svc->store(), parsed.rows, svc->clusters());
            auto embedded = svc->index().index_all();
            svc->store().snapshot()->snapshot_save(config.store_path);
            std::cout << "problems created: " << report.problems_created << '\n'
                      << "solutions created: " << report.solutions_created << '\n'
                      << "entities linked: " << report.entities_linked << '\n'
                      << "problems embedded: " << embedded << '\n'
                      << "rows rejected: " << parsed.errors.size() + report.errors.size() << '\n';
            print_row_errors(parsed.errors);
            print_row_errors(report.errors);
            return 0;
        }
        if (*serve) {
            auto config = build_config(flags);
            if (port_opt->count()) config.http_port = port;
            config.host = host;
            if (pending) config.feedback_pending = true;
            if (!pending_db.empty()) config.pending_path = pending_db;
            if (!flags.config_file.empty()) apply_config_file(config, flags.config_file);
            auto svc = open_service(config);
            HttpServer server(*svc);
            int bound = server.bind(config.host, config.http_port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << config.host << ':' << bound << std::endl;
            server.listen();
            g_server = nullptr;
            return 0;
        }
        if (*recommend) {
            auto config = build_config(flags);
            auto svc = open_service(config);
            QueryInput input;
            if (fac_opt->count()) input.num_facilities = facilities;
            input.objectives = objectives;
            input.constraints = constraints;
            if (!representation.empty()) input.representation = representation;
            if (!free_text.empty()) input.free_text = free_text;
            auto snap = svc->store().snapshot();
            auto result = svc->recommender().recommend(*snap, normalize_query(*snap, input));
            if (as_json) std::cout << to_json(result).dump(2) << '\n';
            else print_recommendation(result);
            return 0;
        }
        if (*eval) {
            auto config = build_config(flags);
            auto providers = make_providers(config);
            if (!judge_mode.empty()) {
                ServiceConfig judge_config = config;
                judge_config.provider_mode = parse_provider_mode(judge_mode);
                providers.judge = std::move(make_providers(judge_config).judge);
            }
            auto judge = std::move(providers.judge);
            Service svc(config, std::move(providers), std::filesystem::exists(config.store_path)
                                                          ? Graph::snapshot_load(config.store_path)
                                                          : Graph());
            auto cases = load_cases(cases_path);
            auto kg = run_kgrag_suite(cases, svc.recommender(), svc.store(), *judge, {parallel});
            std::cout << format_report_table(kg);
            nlohmann::json out = {{"kgrag", to_json(kg)}};
            if (!baseline_path.empty()) {
                auto csv = read_file(baseline_path);
                auto base_llm = make_providers(config).llm;
                auto base = run_baseline_suite(cases, csv, *base_llm, *judge);
                std::cout << '\n' << format_report_table(base);
                out["baseline"] = to_json(base);
            }
            auto report_path = report_path_for(cases_path);
            std::ofstream(report_path) << out.dump(2) << '\n';
            std::cout << "report written to " << report_path.string() << '\n';
            return 0;
        }
        if (*stats) {
            auto config = build_config(flags);
            if (!std::filesystem::exists(config.store_path)) throw IoError("no snapshot at " + config.store_path.string());
            auto s = Graph::snapshot_load(config.store_path).stats();
            std::cout << to_json(s).dump(2) << '\n';
            return 0;
        }
        if (*feedback) {
            auto config = build_config(flags);
            auto svc = open_service(config);
            auto records = csv::parse(read_file(feedback_path));
            if (records.empty()) throw FormatError("feedback file is empty");
            std::vector<std::string> header;
            for (const auto& h : records.front().fields) header.push_back(normalize_header(h));
            std::size_t accepted = 0, created = 0, linked = 0;
            std::vector<RowError> rejected;
            for (std::size_t i = 1; i < records.size(); ++i) {
                const auto& rec = records[i];
                if (rec.fields.size() != header.size()) {
                    rejected.push_back({rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                                      std::to_string(rec.fields.size())});
                    continue;
                }
                FeedbackRecord raw;
                for (std::size_t c = 0; c < header.size(); ++c) raw[header[c]] = rec.fields[c];
                try {
                    auto report = ingest_feedback(svc->store(), &svc->index(), raw, svc->clusters());
                    ++accepted;
                    created += report.created_nodes;
                    linked += report.linked_existing;
                } catch (const ValidationError& e) {
                    rejected.push_back({rec.line, e.what()});
                }
            }
            svc->store().snapshot()->snapshot_save(config.store_path);
            std::cout << "records accepted: " << accepted << '\n'
                      << "nodes created: " << created << '\n'
                      << "entities linked: " << linked << '\n'
                      << "records rejected: " << rejected.size() << '\n';
            print_row_errors(rejected);
            return rejected.empty() ? 0 : 2;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnknownEntity& e) {
        std::cerr << "error: " << e.what();
        if (!e.suggestions().empty()) std::cerr << " (did you mean: " << text::join(e.suggestions(), ", ") << "?)";
        std::cerr << '\n';
        return 2;
    } catch (const HeaderMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ProviderError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
