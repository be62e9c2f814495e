#include "flpadv/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flpadv/csv.hpp"
#include "flpadv/embedding.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

const std::map<std::string, std::string, std::less<>>& header_aliases() {
    static const std::map<std::string, std::string, std::less<>> aliases = {
        {"source_reference", "source"},
        {"reference", "source"},
        {"representation", "problem_representation"},
        {"floor_width", "floor_w"},
        {"floor_height", "floor_h"},
        {"objectives", "objective"},
        {"constraint", "constraints"},
        {"cons_handling", "constraint_handling"},
        {"time", "time_sec"},
    };
    return aliases;
}

std::string cell(const RawRecord& record, std::string_view column) {
    auto it = record.find(column);
    return it == record.end() ? std::string() : std::string(text::trim(it->second));
}

}  // namespace

std::string normalize_header(std::string_view header) {
    std::string out;
    for (char c : text::trim(header)) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    if (auto it = header_aliases().find(out); it != header_aliases().end()) return it->second;
    return out;
}

RowValidation validate_record(const RawRecord& record) {
    RowValidation result;
    auto& errors = result.errors;
    CorpusRow row;

    row.problem_id = cell(record, "problem_id");
    if (row.problem_id.empty()) errors.push_back({"problem_id", "required"});

    auto n_text = cell(record, "num_facilities");
    if (auto n = text::parse_int(n_text); !n) {
        errors.push_back({"num_facilities", "not an integer: '" + n_text + "'"});
    } else if (*n < 1) {
        errors.push_back({"num_facilities", "non-positive scale"});
    } else {
        row.num_facilities = *n;
    }

    auto positive_real = [&](std::string_view field, double& out) {
        auto raw = cell(record, field);
        auto v = text::parse_real(raw);
        if (!v) {
            errors.push_back({std::string(field), "not a number: '" + raw + "'"});
        } else if (*v <= 0) {
            errors.push_back({std::string(field), "must be positive"});
        } else {
            out = *v;
        }
    };
    auto non_negative_real = [&](std::string_view field, double& out) {
        auto raw = cell(record, field);
        auto v = text::parse_real(raw);
        if (!v) {
            errors.push_back({std::string(field), "not a number: '" + raw + "'"});
        } else if (*v < 0) {
            errors.push_back({std::string(field), "must be non-negative"});
        } else {
            out = *v;
        }
    };
    positive_real("floor_w", row.floor_w);
    positive_real("floor_h", row.floor_h);
    non_negative_real("cost", row.cost);
    non_negative_real("time_sec", row.time_sec);

    row.problem_representation = cell(record, "problem_representation");
    row.facility_dimension_data = cell(record, "facility_dimension_data");
    row.objective = cell(record, "objective");
    row.constraints = cell(record, "constraints");
    row.constraint_handling = cell(record, "constraint_handling");
    row.source = cell(record, "source");

    row.method = cell(record, "method");
    if (row.method.empty()) errors.push_back({"method", "required"});

    row.model_parameters = cell(record, "model_parameters");
    if (!parse_model_parameters(row.model_parameters))
        errors.push_back({"model_parameters", "expected key=value pairs separated by ';'"});

    if (errors.empty()) result.row = std::move(row);
    return result;
}

ParsedCorpus parse_corpus(std::string_view csv_text) {
    auto records = csv::parse(csv_text);
    if (records.empty()) {
        std::vector<std::string> missing(kCorpusColumns.begin(), kCorpusColumns.end());
        throw HeaderMismatch(std::move(missing));
    }

    std::map<std::string, std::size_t> column_of;
    for (std::size_t i = 0; i < records.front().fields.size(); ++i)
        column_of.emplace(normalize_header(records.front().fields[i]), i);

    std::vector<std::string> missing;
    for (auto column : kCorpusColumns)
        if (!column_of.contains(std::string(column))) missing.emplace_back(column);
    if (!missing.empty()) throw HeaderMismatch(std::move(missing));

    ParsedCorpus parsed;
    const auto width = records.front().fields.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != width) {
            parsed.errors.push_back({rec.line, "expected " + std::to_string(width) + " fields, found " +
                                                   std::to_string(rec.fields.size())});
            continue;
        }
        RawRecord raw;
        for (auto column : kCorpusColumns)
            raw.emplace(std::string(column), rec.fields[column_of.at(std::string(column))]);
        auto validated = validate_record(raw);
        if (!validated.row) {
            std::vector<std::string> parts;
            for (const auto& e : validated.errors) parts.push_back(e.field + ": " + e.message);
            parsed.errors.push_back({rec.line, text::join(parts, "; ")});
            continue;
        }
        parsed.rows.push_back(std::move(*validated.row));
    }
    return parsed;
}

ParsedCorpus read_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

RawRecord to_raw_record(const CorpusRow& row) {
    return {
        {"problem_id", row.problem_id},
        {"num_facilities", std::to_string(row.num_facilities)},
        {"floor_w", text::format_real(row.floor_w)},
        {"floor_h", text::format_real(row.floor_h)},
        {"problem_representation", row.problem_representation},
        {"facility_dimension_data", row.facility_dimension_data},
        {"objective", row.objective},
        {"constraints", row.constraints},
        {"constraint_handling", row.constraint_handling},
        {"method", row.method},
        {"model_parameters", row.model_parameters},
        {"cost", text::format_real(row.cost)},
        {"time_sec", text::format_real(row.time_sec)},
        {"source", row.source},
    };
}

std::string to_csv(std::span<const CorpusRow> rows) {
    std::vector<std::string> header(kCorpusColumns.begin(), kCorpusColumns.end());
    std::string out = csv::format_record(header) + "\n";
    for (const auto& row : rows) {
        auto raw = to_raw_record(row);
        std::vector<std::string> fields;
        for (auto column : kCorpusColumns) fields.push_back(raw.at(std::string(column)));
        out += csv::format_record(fields) + "\n";
    }
    return out;
}

CanonicalList canonicalize_name_list(std::string_view raw) {
    std::set<std::string> unique;
    for (const auto& part : text::split(raw, ',')) {
        auto name = text::canonical_name(part);
        if (!name.empty()) unique.insert(std::move(name));
    }
    CanonicalList out;
    out.names.assign(unique.begin(), unique.end());
    out.joined = text::join(out.names, ", ");
    return out;
}

std::optional<ModelParameters> parse_model_parameters(std::string_view raw) {
    ModelParameters params;
    for (const auto& segment : text::split(raw, ';')) {
        auto trimmed = text::trim(segment);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        auto key = text::trim(trimmed.substr(0, eq));
        if (key.empty()) return std::nullopt;
        params.emplace_back(std::string(key), std::string(text::trim(trimmed.substr(eq + 1))));
    }
    return params;
}

std::string format_model_parameters(const ModelParameters& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i != 0) out.push_back(';');
        out += params[i].first + "=" + params[i].second;
    }
    return out;
}

CorpusRow normalize_row(const CorpusRow& row) {
    CorpusRow out = row;
    out.problem_id = std::string(text::trim(row.problem_id));
    out.problem_representation = text::canonical_name(row.problem_representation);
    out.facility_dimension_data = text::canonical_name(row.facility_dimension_data);
    out.objective = canonicalize_name_list(row.objective).joined;
    out.constraints = canonicalize_name_list(row.constraints).joined;
    out.constraint_handling = text::canonical_name(row.constraint_handling);
    out.method = text::collapse_whitespace(row.method);
    if (auto params = parse_model_parameters(row.model_parameters))
        out.model_parameters = format_model_parameters(*params);
    out.source = text::collapse_whitespace(row.source);
    return out;
}

std::string make_solution_id(std::string_view problem_id, std::string_view method, int sequence) {
    return std::string(text::trim(problem_id)) + "::" + text::canonical_name(method) +
           "::" + std::to_string(sequence);
}

ProblemInstance to_problem_instance(const CorpusRow& raw) {
    auto row = normalize_row(raw);
    ProblemInstance p;
    p.problem_id = row.problem_id;
    p.num_facilities = row.num_facilities;
    p.floor_width = row.floor_w;
    p.floor_height = row.floor_h;
    p.representation = row.problem_representation;
    p.facility_dimension_data = row.facility_dimension_data;
    p.objectives = canonicalize_name_list(row.objective).names;
    p.constraints = canonicalize_name_list(row.constraints).names;
    p.constraint_handling = row.constraint_handling;
    p.description_text = build_description(p);
    return p;
}

SolutionRecord to_solution_record(const CorpusRow& raw, int sequence) {
    auto row = normalize_row(raw);
    SolutionRecord s;
    s.solution_id = make_solution_id(row.problem_id, row.method, sequence);
    s.problem_id = row.problem_id;
    s.method = row.method;
    s.model_parameters = parse_model_parameters(row.model_parameters).value_or(ModelParameters{});
    s.cost = row.cost;
    s.time_sec = row.time_sec;
    s.source = row.source;
    return s;
}

ProblemInstance problem_from_graph(const Graph& graph, NodeId problem) {
    auto match = graph.describe_problem(problem);
    const auto& node = match.problem;
    ProblemInstance p;
    p.problem_id = node.key;
    p.num_facilities = match.num_facilities;
    p.floor_width = node.get_real(prop::kFloorWidth).value_or(0);
    p.floor_height = node.get_real(prop::kFloorHeight).value_or(0);
    if (!match.representations.empty()) p.representation = match.representations.front();
    if (const auto* fdd = node.get_string(prop::kFacilityDimensionData)) p.facility_dimension_data = *fdd;
    p.objectives = match.objectives;
    p.constraints = match.constraints;
    if (!match.constraint_handlings.empty()) p.constraint_handling = match.constraint_handlings.front();
    if (const auto* d = node.get_string(prop::kDescription)) p.description_text = *d;
    if (const auto* v = node.get_vector(prop::kEmbedding)) p.embedding = *v;
    return p;
}

// Clusters

ClusterConfig ClusterConfig::defaults() {
    ClusterConfig c;
    for (auto m : {"ga", "hga", "brkga", "brkga-lp", "ga-lp", "cro-sl"})
        c.method_families.emplace(m, "evolutionary");
    for (auto m : {"aco-fbs", "aco", "pso"}) c.method_families.emplace(m, "swarm");
    c.method_families.emplace("hsa", "harmony-search");
    c.method_families.emplace("sa", "annealing");
    for (auto m : {"tabusearch", "tabu search"}) c.method_families.emplace(m, "local-search");
    for (auto m : {"construction heuristic", "prop1"}) c.method_families.emplace(m, "constructive");
    c.constraint_handling_families.emplace("shapely intersection", "geometric-feasibility");
    for (auto h : {"penalty", "penalties", "penalty function"})
        c.constraint_handling_families.emplace(h, "penalty-function");
    return c;
}

ClusterConfig ClusterConfig::from_json_text(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cluster configuration: ") + e.what());
    }
    ClusterConfig c = defaults();
    try {
        if (j.contains("scale_thresholds")) {
            const auto& t = j.at("scale_thresholds");
            c.small_max = t.value("small_max", c.small_max);
            c.medium_max = t.value("medium_max", c.medium_max);
        }
        if (j.contains("method_families")) {
            c.method_families.clear();
            for (const auto& [name, family] : j.at("method_families").items())
                c.method_families[text::canonical_name(name)] = family.get<std::string>();
        }
        if (j.contains("constraint_handling_families")) {
            c.constraint_handling_families.clear();
            for (const auto& [name, family] : j.at("constraint_handling_families").items())
                c.constraint_handling_families[text::canonical_name(name)] = family.get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cluster configuration: ") + e.what());
    }
    if (c.small_max < 1 || c.medium_max <= c.small_max)
        throw ConfigError("scale thresholds must satisfy 1 <= small_max < medium_max");
    return c;
}

ClusterConfig ClusterConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cluster configuration " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

const std::string& ClusterConfig::scale_for(std::int64_t num_facilities) const {
    if (num_facilities <= small_max) return small_label;
    if (num_facilities <= medium_max) return medium_label;
    return large_label;
}

std::string ClusterConfig::method_family(std::string_view method) const {
    auto it = method_families.find(text::canonical_name(method));
    return it == method_families.end() ? std::string(kUncategorized) : it->second;
}

std::string ClusterConfig::constraint_handling_family(std::string_view name) const {
    auto it = constraint_handling_families.find(text::canonical_name(name));
    return it == constraint_handling_families.end() ? std::string(kUncategorized) : it->second;
}

std::string_view objective_cluster_for(std::size_t objective_count) {
    return objective_count >= 2 ? kMultiObjective : kSingleObjective;
}

ClusterAssignment assign_clusters(const ProblemInstance& problem, std::string_view method,
                                  const ClusterConfig& config) {
    // Arity from the canonical joined string: a comma means two or more names.
    auto joined = canonicalize_name_list(text::join(problem.objectives, ",")).joined;
    bool multi = joined.find(',') != std::string::npos;
    return {
        config.scale_for(problem.num_facilities),
        std::string(multi ? kMultiObjective : kSingleObjective),
        config.method_family(method),
        config.constraint_handling_family(problem.constraint_handling),
    };
}

// Loading

namespace {

class RowWriter {
public:
    RowWriter(Graph& graph, RowEffect& effect) : graph_(graph), effect_(effect) {}

    NodeId node(NodeLabel label, std::string_view key, const PropertyMap& props = {}) {
        auto r = graph_.upsert_node(label, key, props);
        ++(r.created ? effect_.created_nodes : effect_.linked_existing);
        return r.id;
    }

    void edge(NodeId from, EdgeType type, NodeId to) {
        if (graph_.upsert_edge(from, type, to).created) ++effect_.edges_created;
    }

    // Keeps exactly one outgoing edge of `type` from `from`, pointing at `to`.
    bool replace_single(NodeId from, EdgeType type, NodeId to) {
        bool changed = false;
        for (auto old : graph_.targets(from, type)) {
            if (old != to) {
                graph_.remove_edge(from, type, old);
                changed = true;
            }
        }
        if (graph_.upsert_edge(from, type, to).created) {
            ++effect_.edges_created;
            changed = true;
        }
        return changed;
    }

private:
    Graph& graph_;
    RowEffect& effect_;
};

}  // namespace

RowEffect apply_row(Graph& graph, const CorpusRow& raw, int sequence, const ClusterConfig& config) {
    auto row = normalize_row(raw);
    RowEffect effect;
    RowWriter w(graph, effect);

    auto problem_existed = graph.find(NodeLabel::Problem, row.problem_id).has_value();
    auto problem = w.node(NodeLabel::Problem, row.problem_id,
                          {{std::string(prop::kNumFacilities), row.num_facilities},
                           {std::string(prop::kFloorWidth), row.floor_w},
                           {std::string(prop::kFloorHeight), row.floor_h},
                           {std::string(prop::kFacilityDimensionData), row.facility_dimension_data}});
    effect.problem = problem;
    effect.problem_created = !problem_existed;

    for (const auto& name : canonicalize_name_list(row.objective).names)
        w.edge(problem, EdgeType::HasObjective, w.node(NodeLabel::Objective, name));
    for (const auto& name : canonicalize_name_list(row.constraints).names)
        w.edge(problem, EdgeType::HasConstraint, w.node(NodeLabel::Constraint, name));
    if (!row.problem_representation.empty())
        w.edge(problem, EdgeType::HasRepresentation,
               w.node(NodeLabel::Representation, row.problem_representation));
    if (!row.constraint_handling.empty()) {
        auto ch = w.node(NodeLabel::ConstraintHandling, row.constraint_handling);
        w.edge(problem, EdgeType::ConsHandling, ch);
        auto family = w.node(NodeLabel::ConstraintHandlingCluster,
                             config.constraint_handling_family(row.constraint_handling));
        w.replace_single(ch, EdgeType::IsTypeOf, family);
    }

    auto method = w.node(NodeLabel::Method, row.method, {{std::string(prop::kName), row.method}});
    w.replace_single(method, EdgeType::IsTypeOf,
                     w.node(NodeLabel::MethodCluster, config.method_family(row.method)));

    auto solution_key = make_solution_id(row.problem_id, row.method, sequence);
    effect.solution_created = !graph.find(NodeLabel::Solution, solution_key).has_value();
    auto solution = w.node(NodeLabel::Solution, solution_key,
                           {{std::string(prop::kCost), row.cost},
                            {std::string(prop::kTimeSec), row.time_sec},
                            {std::string(prop::kModelParameters), row.model_parameters},
                            {std::string(prop::kSource), row.source}});
    w.edge(solution, EdgeType::Solved, problem);
    w.edge(solution, EdgeType::UsedMethod, method);

    // Clusters and description derive from the merged problem, not just this row.
    auto instance = problem_from_graph(graph, problem);
    auto clusters = assign_clusters(instance, row.method, config);
    bool scale_changed = w.replace_single(problem, EdgeType::BelongsToScale,
                                          w.node(NodeLabel::ScaleCluster, clusters.scale_cluster));
    bool objective_changed =
        w.replace_single(problem, EdgeType::ObjectiveCluster,
                         w.node(NodeLabel::ObjectiveCluster, clusters.objective_cluster));
    effect.reclustered = scale_changed || objective_changed;

    auto description = build_description(instance);
    if (instance.description_text != description) {
        graph.upsert_node(NodeLabel::Problem, row.problem_id,
                          {{std::string(prop::kDescription), description}});
        graph.erase_property(problem, prop::kEmbedding);  // stale once the text changes
        effect.description_changed = true;
    }
    return effect;
}

LoadReport load_corpus(Graph& graph, std::span<const CorpusRow> rows, const ClusterConfig& config) {
    LoadReport report;
    std::map<std::pair<std::string, std::string>, int> occurrences;
    for (const auto& row : rows) {
        auto key = std::pair{std::string(text::trim(row.problem_id)), text::canonical_name(row.method)};
        int sequence = ++occurrences[key];
        auto effect = apply_row(graph, row, sequence, config);
        if (effect.problem_created) ++report.problems_created;
        if (effect.solution_created) ++report.solutions_created;
        report.entities_linked += effect.edges_created;
    }
    return report;
}

LoadReport load_corpus(GraphStore& store, std::span<const CorpusRow> rows,
                       const ClusterConfig& config) {
    return store.write([&](Graph& graph) { return load_corpus(graph, rows, config); });
}

}  // namespace flpadv
