#pragma once
// Three-channel evidence retrieval: exact graph search (with the
// unprecedented-scale fallback), vector similarity over free text, and
// per-cluster method frequency trends.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flpadv/embedding.hpp"
#include "flpadv/graph_store.hpp"
#include "flpadv/ingestion.hpp"

namespace flpadv {

// What the caller typed or picked; nothing here is trusted yet.
struct QueryInput {
    std::optional<std::int64_t> num_facilities;
    std::vector<std::string> objectives;
    std::vector<std::string> constraints;
    std::optional<std::string> representation;
    std::optional<std::string> free_text;
};

// Validated query. Entity names are canonical and exist in the catalog;
// free_text is never used by graph filters.
struct UserQuery {
    std::optional<std::int64_t> num_facilities;
    std::vector<std::string> objectives;
    std::vector<std::string> constraints;
    std::optional<std::string> representation;
    std::optional<std::string> free_text;

    bool operator==(const UserQuery&) const = default;
};

// Throws UnknownEntity (with suggestions) for a name missing from the
// catalog and ValidationError for a non-positive facility count.
UserQuery normalize_query(const Graph& graph, const QueryInput& input);

// Catalog names sharing the longest case-insensitive prefix with `name`.
std::vector<std::string> suggest_names(std::span<const std::string> catalog, std::string_view name,
                                       std::size_t max_suggestions = 5);

struct GraphEvidenceRow {
    std::string problem_id;
    std::int64_t num_facilities = 0;
    std::vector<std::string> objective_names;
    std::vector<std::string> constraint_names;
    std::string representation;
    std::string constraint_handling;
    std::string solution_id;
    std::string method;
    std::string model_parameters;
    double cost = 0;
    double time_sec = 0;
    std::string source;
    std::int64_t objective_score = 0;
    std::int64_t constraint_score = 0;
    std::int64_t facility_distance = 0;

    bool operator==(const GraphEvidenceRow&) const = default;
};

// Relevance first: objective score desc, constraint score desc, then
// facility distance, cost and time ascending, then problem id and finally
// solution id so the order is total.
bool ranks_before(const GraphEvidenceRow& a, const GraphEvidenceRow& b);

inline constexpr std::size_t kDefaultGraphLimit = 5;

// Inclusive real-valued window [0.75 n, 1.25 n].
std::pair<double, double> facility_window(std::int64_t n);

struct GraphSearchResult {
    std::vector<GraphEvidenceRow> rows;              // ranked, at most `limit`
    std::vector<std::string> pre_limit_problem_ids;  // every candidate problem, ascending
    bool used_fallback = false;
};

GraphSearchResult graph_search(const Graph& graph, const UserQuery& query, std::size_t limit);

// Broadened search for queries larger than anything in the store: problems
// with num_facilities >= the top quartile that sit in the top-level scale
// cluster, ranked with the same comparator.
GraphSearchResult fallback_search(const Graph& graph, const UserQuery& query, std::size_t limit,
                                  const ClusterConfig& config);

bool fallback_triggered(bool graph_result_empty, std::optional<std::int64_t> query_facilities,
                        std::int64_t max_num_facilities);

// graph_search, then fallback_search when fallback_triggered() holds.
GraphSearchResult search_with_fallback(const Graph& graph, const UserQuery& query, std::size_t limit,
                                       const ClusterConfig& config);

struct TrendEntry {
    std::string method;
    std::size_t count = 0;
    double mean_cost = 0;

    bool operator==(const TrendEntry&) const = default;
};

struct ClusterTrend {
    std::string cluster_kind;  // "scale" or "objective"
    std::string cluster_label;
    std::vector<TrendEntry> entries;  // at most 3; count desc, then canonical name asc

    bool operator==(const ClusterTrend&) const = default;
};

inline constexpr std::size_t kTrendEntries = 3;

std::vector<ClusterTrend> cluster_trends(const Graph& graph, std::span<const std::string> problem_ids,
                                         const UserQuery& query, const ClusterConfig& config);

struct VectorEvidence {
    VectorMatch match;
    std::vector<std::string> methods;  // methods of the matched problem's solutions
};

struct EvidenceDossier {
    std::vector<GraphEvidenceRow> graph_rows;
    bool used_fallback = false;
    std::vector<VectorEvidence> vector_matches;
    std::vector<ClusterTrend> trends;
    UserQuery query_echo;
    std::vector<std::string> warnings;
    // Every Method name in the store when the dossier was built; lets the
    // parser recognise methods the evidence does not support.
    std::vector<std::string> method_catalog;

    // Methods named anywhere in the evidence, first-appearance order.
    std::vector<std::string> evidence_methods() const;
    std::vector<std::string> evidence_problem_ids() const;
    bool empty() const { return graph_rows.empty() && vector_matches.empty() && trends.empty(); }
};

struct RetrievalConfig {
    std::size_t graph_limit = kDefaultGraphLimit;
    std::size_t vector_k = kDefaultVectorK;
    ClusterConfig clusters = ClusterConfig::defaults();
};

// Runs the three channels against one snapshot. `index` may be null, in
// which case the vector channel is skipped. Vector failures degrade to a
// warning.
EvidenceDossier retrieve_evidence(const Graph& graph, const EmbeddingIndex* index,
                                  const UserQuery& query, const RetrievalConfig& config);

}  // namespace flpadv
