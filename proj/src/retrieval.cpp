#include "flpadv/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <future>
#include <map>
#include <set>

#include "flpadv/error.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

std::size_t common_prefix_ci(std::string_view a, std::string_view b) {
    std::size_t i = 0;
    while (i < a.size() && i < b.size() &&
           std::tolower(static_cast<unsigned char>(a[i])) == std::tolower(static_cast<unsigned char>(b[i])))
        ++i;
    return i;
}

std::vector<std::string> validate_names(const Graph& graph, NodeLabel label, std::string_view field,
                                        const std::vector<std::string>& raw_names) {
    std::set<std::string> names;
    for (const auto& raw : raw_names) {
        auto name = text::canonical_name(raw);
        if (name.empty() || name == "none") continue;
        if (!graph.find(label, name)) {
            auto catalog = graph.catalog_names(label);
            throw UnknownEntity(std::string(field), raw, suggest_names(catalog, name));
        }
        names.insert(std::move(name));
    }
    return {names.begin(), names.end()};
}

std::int64_t count_shared(const std::vector<std::string>& query, const std::vector<std::string>& linked) {
    std::int64_t n = 0;
    for (const auto& q : query)
        if (std::binary_search(linked.begin(), linked.end(), q)) ++n;
    return n;
}

void append_rows(const ProblemMatch& match, const UserQuery& query,
                 std::vector<GraphEvidenceRow>& rows) {
    for (const auto& sol : match.solutions) {
        GraphEvidenceRow row;
        row.problem_id = match.problem_id();
        row.num_facilities = match.num_facilities;
        row.objective_names = match.objectives;
        row.constraint_names = match.constraints;
        if (!match.representations.empty()) row.representation = match.representations.front();
        if (!match.constraint_handlings.empty())
            row.constraint_handling = match.constraint_handlings.front();
        row.solution_id = sol.node.key;
        row.method = sol.method;
        if (const auto* p = sol.node.get_string(prop::kModelParameters)) row.model_parameters = *p;
        row.cost = sol.node.get_real(prop::kCost).value_or(0);
        row.time_sec = sol.node.get_real(prop::kTimeSec).value_or(0);
        if (const auto* s = sol.node.get_string(prop::kSource)) row.source = *s;
        row.objective_score = count_shared(query.objectives, match.objectives);
        row.constraint_score = count_shared(query.constraints, match.constraints);
        row.facility_distance =
            query.num_facilities ? std::llabs(match.num_facilities - *query.num_facilities) : 0;
        rows.push_back(std::move(row));
    }
}

GraphSearchResult rank(const std::vector<ProblemMatch>& candidates, const UserQuery& query,
                       std::size_t limit) {
    GraphSearchResult result;
    for (const auto& m : candidates) {
        result.pre_limit_problem_ids.push_back(m.problem_id());
        append_rows(m, query, result.rows);
    }
    std::sort(result.rows.begin(), result.rows.end(), ranks_before);
    if (result.rows.size() > limit) result.rows.resize(limit);
    return result;
}

}  // namespace

std::vector<std::string> suggest_names(std::span<const std::string> catalog, std::string_view name,
                                       std::size_t max_suggestions) {
    std::size_t best = 0;
    for (const auto& c : catalog) best = std::max(best, common_prefix_ci(c, name));
    std::vector<std::string> out;
    if (best == 0) return out;
    for (const auto& c : catalog)
        if (common_prefix_ci(c, name) == best) out.push_back(c);
    std::sort(out.begin(), out.end());
    if (out.size() > max_suggestions) out.resize(max_suggestions);
    return out;
}

UserQuery normalize_query(const Graph& graph, const QueryInput& input) {
    UserQuery q;
    if (input.num_facilities) {
        if (*input.num_facilities < 1)
            throw ValidationError(std::vector<FieldError>{{"num_facilities", "must be a positive integer"}});
        q.num_facilities = input.num_facilities;
    }
    q.objectives = validate_names(graph, NodeLabel::Objective, "objectives", input.objectives);
    q.constraints = validate_names(graph, NodeLabel::Constraint, "constraints", input.constraints);
    if (input.representation) {
        auto names = validate_names(graph, NodeLabel::Representation, "representation",
                                    {*input.representation});
        if (!names.empty()) q.representation = names.front();
    }
    if (input.free_text && !text::trim(*input.free_text).empty()) q.free_text = input.free_text;
    return q;
}

bool ranks_before(const GraphEvidenceRow& a, const GraphEvidenceRow& b) {
    if (a.objective_score != b.objective_score) return a.objective_score > b.objective_score;
    if (a.constraint_score != b.constraint_score) return a.constraint_score > b.constraint_score;
    if (a.facility_distance != b.facility_distance) return a.facility_distance < b.facility_distance;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.time_sec != b.time_sec) return a.time_sec < b.time_sec;
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.solution_id < b.solution_id;
}

std::pair<double, double> facility_window(std::int64_t n) {
    return {0.75 * static_cast<double>(n), 1.25 * static_cast<double>(n)};
}

GraphSearchResult graph_search(const Graph& graph, const UserQuery& query, std::size_t limit) {
    ProblemPredicate predicate;
    if (query.num_facilities) {
        auto [lo, hi] = facility_window(*query.num_facilities);
        predicate.min_facilities = lo;
        predicate.max_facilities = hi;
    }
    if (!query.objectives.empty())
        predicate.any_of.push_back({EdgeType::HasObjective, query.objectives});
    if (!query.constraints.empty())
        predicate.any_of.push_back({EdgeType::HasConstraint, query.constraints});

    auto candidates = graph.match_problems(predicate);

    if (query.objectives.size() >= 2) {
        auto is_multi = [](const ProblemMatch& m) { return m.objective_cluster == kMultiObjective; };
        if (std::any_of(candidates.begin(), candidates.end(), is_multi))
            std::erase_if(candidates, [&](const ProblemMatch& m) { return !is_multi(m); });
    }
    return rank(candidates, query, limit);
}

GraphSearchResult fallback_search(const Graph& graph, const UserQuery& query, std::size_t limit,
                                  const ClusterConfig& config) {
    auto stats = graph.stats();
    ProblemPredicate predicate;
    predicate.min_facilities = static_cast<double>(stats.facility_top_quartile);
    predicate.scale_cluster = config.large_label;
    auto result = rank(graph.match_problems(predicate), query, limit);
    result.used_fallback = true;
    return result;
}

bool fallback_triggered(bool graph_result_empty, std::optional<std::int64_t> query_facilities,
                        std::int64_t max_num_facilities) {
    return graph_result_empty && query_facilities && *query_facilities > max_num_facilities;
}

GraphSearchResult search_with_fallback(const Graph& graph, const UserQuery& query, std::size_t limit,
                                       const ClusterConfig& config) {
    auto result = graph_search(graph, query, limit);
    if (graph.problem_count() == 0) return result;
    if (fallback_triggered(result.rows.empty(), query.num_facilities, graph.stats().max_num_facilities))
        return fallback_search(graph, query, limit, config);
    return result;
}

std::vector<ClusterTrend> cluster_trends(const Graph& graph, std::span<const std::string> problem_ids,
                                         const UserQuery& query, const ClusterConfig& config) {
    std::vector<ProblemMatch> problems;
    for (const auto& id : problem_ids)
        if (auto node = graph.find(NodeLabel::Problem, id)) problems.push_back(graph.describe_problem(*node));

    auto trend_for = [&](std::string kind, const std::string& label,
                         std::string ProblemMatch::*cluster) -> std::optional<ClusterTrend> {
        struct Tally {
            std::size_t count = 0;
            double cost_sum = 0;
        };
        std::map<std::string, Tally> tally;
        for (const auto& p : problems) {
            if (p.*cluster != label) continue;
            for (const auto& s : p.solutions) {
                auto& t = tally[s.method];
                ++t.count;
                t.cost_sum += s.node.get_real(prop::kCost).value_or(0);
            }
        }
        if (tally.empty()) return std::nullopt;
        ClusterTrend trend{std::move(kind), label, {}};
        for (const auto& [method, t] : tally)
            trend.entries.push_back({method, t.count, t.cost_sum / static_cast<double>(t.count)});
        std::sort(trend.entries.begin(), trend.entries.end(), [](const TrendEntry& a, const TrendEntry& b) {
            if (a.count != b.count) return a.count > b.count;
            return text::canonical_name(a.method) < text::canonical_name(b.method);
        });
        if (trend.entries.size() > kTrendEntries) trend.entries.resize(kTrendEntries);
        return trend;
    };

    std::vector<ClusterTrend> trends;
    if (query.num_facilities) {
        if (auto t = trend_for("scale", config.scale_for(*query.num_facilities), &ProblemMatch::scale_cluster))
            trends.push_back(std::move(*t));
    }
    if (auto t = trend_for("objective", std::string(objective_cluster_for(query.objectives.size())),
                           &ProblemMatch::objective_cluster))
        trends.push_back(std::move(*t));
    return trends;
}

std::vector<std::string> EvidenceDossier::evidence_methods() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& m) {
        if (!m.empty() && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    };
    for (const auto& r : graph_rows) add(r.method);
    for (const auto& v : vector_matches)
        for (const auto& m : v.methods) add(m);
    for (const auto& t : trends)
        for (const auto& e : t.entries) add(e.method);
    return out;
}

std::vector<std::string> EvidenceDossier::evidence_problem_ids() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& id) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    };
    for (const auto& r : graph_rows) add(r.problem_id);
    for (const auto& v : vector_matches) add(v.match.problem_id);
    return out;
}

EvidenceDossier retrieve_evidence(const Graph& graph, const EmbeddingIndex* index,
                                  const UserQuery& query, const RetrievalConfig& config) {
    EvidenceDossier dossier;
    dossier.query_echo = query;
    dossier.method_catalog = graph.catalog_names(NodeLabel::Method);

    std::future<std::vector<VectorMatch>> vector_channel;
    if (index != nullptr && query.free_text) {
        vector_channel = std::async(std::launch::async, [&] {
            return index->similarity_search(graph, *query.free_text, config.vector_k);
        });
    }

    auto graph_result = search_with_fallback(graph, query, config.graph_limit, config.clusters);
    dossier.graph_rows = std::move(graph_result.rows);
    dossier.used_fallback = graph_result.used_fallback;
    dossier.trends = cluster_trends(graph, graph_result.pre_limit_problem_ids, query, config.clusters);
    if (dossier.used_fallback)
        dossier.warnings.push_back("no precedent within the facility window; using large-scale fallback");

    if (vector_channel.valid()) {
        try {
            for (auto& m : vector_channel.get()) {
                VectorEvidence ev{std::move(m), {}};
                if (auto id = graph.find(NodeLabel::Problem, ev.match.problem_id)) {
                    for (const auto& s : graph.describe_problem(*id).solutions)
                        if (std::find(ev.methods.begin(), ev.methods.end(), s.method) == ev.methods.end())
                            ev.methods.push_back(s.method);
                }
                dossier.vector_matches.push_back(std::move(ev));
            }
        } catch (const Error& e) {
            dossier.warnings.push_back("vector search unavailable: " + std::string(e.what()));
        }
    }
    return dossier;
}

}  // namespace flpadv
