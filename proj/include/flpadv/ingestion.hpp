#pragma once
// CSV corpus ingestion: one row per solved problem-solution pair.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flpadv/error.hpp"
#include "flpadv/graph_store.hpp"

namespace flpadv {

inline constexpr std::array<std::string_view, 14> kCorpusColumns = {
    "problem_id",  "num_facilities",      "floor_w",          "floor_h",
    "problem_representation", "facility_dimension_data", "objective", "constraints",
    "constraint_handling", "method",      "model_parameters", "cost",
    "time_sec",    "source",
};

// Column name -> raw cell text, keyed by canonical snake_case column.
using RawRecord = std::map<std::string, std::string, std::less<>>;

struct CorpusRow {
    std::string problem_id;
    std::int64_t num_facilities = 0;
    double floor_w = 0;
    double floor_h = 0;
    std::string problem_representation;
    std::string facility_dimension_data;
    std::string objective;    // raw comma-separated
    std::string constraints;  // raw comma-separated
    std::string constraint_handling;
    std::string method;
    std::string model_parameters;  // raw "key=value;key=value"
    double cost = 0;
    double time_sec = 0;
    std::string source;

    bool operator==(const CorpusRow&) const = default;
};

struct RowError {
    std::size_t line = 0;
    std::string reason;
};

struct ParsedCorpus {
    std::vector<CorpusRow> rows;
    std::vector<RowError> errors;
};

// "Model_parameters" -> "model_parameters", "source(reference)" -> "source".
std::string normalize_header(std::string_view header);

// Throws HeaderMismatch when a required column is absent. Bad rows become
// RowErrors and never abort the batch.
ParsedCorpus parse_corpus(std::string_view csv_text);
ParsedCorpus read_corpus_file(const std::filesystem::path& path);

struct RowValidation {
    std::optional<CorpusRow> row;
    std::vector<FieldError> errors;  // every failing field, not just the first
};

RowValidation validate_record(const RawRecord& record);

RawRecord to_raw_record(const CorpusRow& row);
std::string to_csv(std::span<const CorpusRow> rows);

struct CanonicalList {
    std::string joined;
    std::vector<std::string> names;

    bool operator==(const CanonicalList&) const = default;
};

// Split on commas, canonicalize each name, drop empties, sort, join with ", ".
CanonicalList canonicalize_name_list(std::string_view raw);

using ModelParameters = std::vector<std::pair<std::string, std::string>>;

// Split on ';' then on the first '='; values stay strings. Empty segments are
// ignored; a segment without '=' or with an empty key is malformed.
std::optional<ModelParameters> parse_model_parameters(std::string_view raw);
std::string format_model_parameters(const ModelParameters& params);

// Canonical text form of every field; applying it twice changes nothing.
CorpusRow normalize_row(const CorpusRow& row);

struct ProblemInstance {
    std::string problem_id;
    std::int64_t num_facilities = 0;
    double floor_width = 0;
    double floor_height = 0;
    std::string representation;
    std::string facility_dimension_data;
    std::vector<std::string> objectives;
    std::vector<std::string> constraints;
    std::string constraint_handling;
    std::string description_text;
    std::optional<std::vector<double>> embedding;
};

struct SolutionRecord {
    std::string solution_id;
    std::string problem_id;
    std::string method;
    ModelParameters model_parameters;
    double cost = 0;
    double time_sec = 0;
    std::string source;
};

std::string make_solution_id(std::string_view problem_id, std::string_view method, int sequence);

ProblemInstance to_problem_instance(const CorpusRow& row);
SolutionRecord to_solution_record(const CorpusRow& row, int sequence);

// Rebuilds the instance view of a stored Problem node from its neighbours.
ProblemInstance problem_from_graph(const Graph& graph, NodeId problem);

inline constexpr std::string_view kSingleObjective = "single-objective";
inline constexpr std::string_view kMultiObjective = "multi-objective";
inline constexpr std::string_view kUncategorized = "uncategorized";

struct ClusterConfig {
    std::int64_t small_max = 15;
    std::int64_t medium_max = 35;
    std::string small_label = "small";
    std::string medium_label = "medium";
    std::string large_label = "large";  // the top-level scale cluster
    std::map<std::string, std::string> method_families;
    std::map<std::string, std::string> constraint_handling_families;

    static ClusterConfig defaults();
    // JSON with optional "scale_thresholds" {small_max, medium_max},
    // "method_families" and "constraint_handling_families" objects.
    static ClusterConfig from_json_text(std::string_view json_text);
    static ClusterConfig from_file(const std::filesystem::path& path);

    const std::string& scale_for(std::int64_t num_facilities) const;
    std::string method_family(std::string_view method) const;
    std::string constraint_handling_family(std::string_view name) const;
};

std::string_view objective_cluster_for(std::size_t objective_count);

struct ClusterAssignment {
    std::string scale_cluster;
    std::string objective_cluster;
    std::string method_cluster;
    std::string constraint_handling_cluster;

    bool operator==(const ClusterAssignment&) const = default;
};

ClusterAssignment assign_clusters(const ProblemInstance& problem, std::string_view method,
                                  const ClusterConfig& config);

struct RowEffect {
    NodeId problem;
    bool problem_created = false;
    bool solution_created = false;
    std::size_t created_nodes = 0;
    std::size_t linked_existing = 0;
    std::size_t edges_created = 0;
    bool reclustered = false;
    bool description_changed = false;
};

// Merges one row into the graph: Problem, catalog nodes, Solution, every
// schema edge, cluster edges and the description property.
RowEffect apply_row(Graph& graph, const CorpusRow& row, int sequence, const ClusterConfig& config);

struct LoadReport {
    std::size_t problems_created = 0;
    std::size_t solutions_created = 0;
    std::size_t entities_linked = 0;
    std::vector<RowError> errors;
};

LoadReport load_corpus(Graph& graph, std::span<const CorpusRow> rows, const ClusterConfig& config);

// Same, applied as one atomic batch.
LoadReport load_corpus(GraphStore& store, std::span<const CorpusRow> rows,
                       const ClusterConfig& config);

}  // namespace flpadv
