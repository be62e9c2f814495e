#include "flpadv/graph_store.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flpadv/error.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, std::size(kAllNodeLabels)> kLabelNames = {
    "Problem",  "Method",           "Objective",    "Constraint",    "Representation",
    "ConstraintHandling", "Solution", "ObjectiveCluster", "ScaleCluster", "MethodCluster",
    "ConstraintHandlingCluster",
};

constexpr std::array<std::string_view, std::size(kAllEdgeTypes)> kEdgeNames = {
    "SOLVED",     "USED_METHOD",      "HAS_OBJECTIVE", "HAS_CONSTRAINT",     "HAS_REPRESENTATION",
    "CONS_HANDLING", "BELONGS_TO_SCALE", "IS_TYPE_OF", "OBJECTIVE_CLUSTER",
};

struct SchemaTriple {
    NodeLabel from;
    EdgeType type;
    NodeLabel to;
};

constexpr SchemaTriple kSchema[] = {
    {NodeLabel::Solution, EdgeType::Solved, NodeLabel::Problem},
    {NodeLabel::Solution, EdgeType::UsedMethod, NodeLabel::Method},
    {NodeLabel::Problem, EdgeType::HasObjective, NodeLabel::Objective},
    {NodeLabel::Problem, EdgeType::HasConstraint, NodeLabel::Constraint},
    {NodeLabel::Problem, EdgeType::HasRepresentation, NodeLabel::Representation},
    {NodeLabel::Problem, EdgeType::ConsHandling, NodeLabel::ConstraintHandling},
    {NodeLabel::Problem, EdgeType::BelongsToScale, NodeLabel::ScaleCluster},
    {NodeLabel::Method, EdgeType::IsTypeOf, NodeLabel::MethodCluster},
    {NodeLabel::ConstraintHandling, EdgeType::IsTypeOf, NodeLabel::ConstraintHandlingCluster},
    {NodeLabel::Problem, EdgeType::ObjectiveCluster, NodeLabel::ObjectiveCluster},
};

constexpr std::string_view kSnapshotFormat = "flpadv-snapshot";
constexpr int kSnapshotVersion = 1;

json property_to_json(const PropertyValue& value) {
    return std::visit([](const auto& v) -> json { return json(v); }, value);
}

PropertyValue property_from_json(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_array()) {
        std::vector<double> out;
        out.reserve(j.size());
        for (const auto& e : j) {
            if (!e.is_number()) throw FormatError("vector property holds a non-number");
            out.push_back(e.get<double>());
        }
        return out;
    }
    throw FormatError("unsupported property value: " + j.dump());
}

const char* type_name(const PropertyValue& v) {
    switch (v.index()) {
        case 0: return "string";
        case 1: return "integer";
        case 2: return "real";
        default: return "real-vector";
    }
}

void require_type(NodeLabel label, const PropertyMap& props, std::string_view name,
                  std::size_t index) {
    auto it = props.find(name);
    if (it == props.end() || it->second.index() == index) return;
    throw SchemaViolation(std::string(to_string(label)) + "." + std::string(name) +
                          " has type " + type_name(it->second));
}

}  // namespace

std::string_view to_string(NodeLabel label) { return kLabelNames[static_cast<std::size_t>(label)]; }

std::string_view to_string(EdgeType type) { return kEdgeNames[static_cast<std::size_t>(type)]; }

std::optional<NodeLabel> parse_node_label(std::string_view s) {
    for (auto label : kAllNodeLabels)
        if (to_string(label) == s) return label;
    return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view s) {
    for (auto type : kAllEdgeTypes)
        if (to_string(type) == s) return type;
    return std::nullopt;
}

bool edge_allowed(NodeLabel from, EdgeType type, NodeLabel to) {
    return std::any_of(std::begin(kSchema), std::end(kSchema), [&](const SchemaTriple& t) {
        return t.from == from && t.type == type && t.to == to;
    });
}

bool is_catalog_label(NodeLabel label) {
    return label != NodeLabel::Problem && label != NodeLabel::Solution;
}

std::string normalize_key(NodeLabel label, std::string_view key) {
    if (is_catalog_label(label)) return text::canonical_name(key);
    return std::string(text::trim(key));
}

std::int64_t nearest_rank_percentile(std::span<const std::int64_t> sorted, int numerator,
                                     int denominator) {
    const auto n = static_cast<std::int64_t>(sorted.size());
    // ceil(numerator * n / denominator) without floating point
    auto rank = (numerator * n + denominator - 1) / denominator;
    rank = std::clamp<std::int64_t>(rank, 1, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

// GraphNode

const std::string* GraphNode::get_string(std::string_view name) const {
    auto it = properties.find(name);
    return it == properties.end() ? nullptr : std::get_if<std::string>(&it->second);
}

std::optional<std::int64_t> GraphNode::get_int(std::string_view name) const {
    auto it = properties.find(name);
    if (it == properties.end()) return std::nullopt;
    if (auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
}

std::optional<double> GraphNode::get_real(std::string_view name) const {
    auto it = properties.find(name);
    if (it == properties.end()) return std::nullopt;
    if (auto* v = std::get_if<double>(&it->second)) return *v;
    return std::nullopt;
}

const std::vector<double>* GraphNode::get_vector(std::string_view name) const {
    auto it = properties.find(name);
    return it == properties.end() ? nullptr : std::get_if<std::vector<double>>(&it->second);
}

std::string GraphNode::display_name() const {
    if (const auto* n = get_string(prop::kName); n != nullptr && !n->empty()) return *n;
    return key;
}

// Graph

void Graph::validate_properties(NodeLabel label, const PropertyMap& props, bool creating) const {
    require_type(label, props, prop::kName, 0);
    require_type(label, props, prop::kDescription, 0);
    require_type(label, props, prop::kEmbedding, 3);

    if (label == NodeLabel::Problem) {
        require_type(label, props, prop::kNumFacilities, 1);
        require_type(label, props, prop::kFloorWidth, 2);
        require_type(label, props, prop::kFloorHeight, 2);
        auto it = props.find(prop::kNumFacilities);
        if (it == props.end()) {
            if (creating) throw SchemaViolation("Problem requires num_facilities");
        } else if (std::get<std::int64_t>(it->second) < 1) {
            throw SchemaViolation("Problem.num_facilities must be >= 1");
        }
    }
    if (label == NodeLabel::Solution) {
        for (auto name : {prop::kCost, prop::kTimeSec}) {
            require_type(label, props, name, 2);
            auto it = props.find(name);
            if (it == props.end()) {
                if (creating) throw SchemaViolation("Solution requires " + std::string(name));
            } else if (!(std::get<double>(it->second) >= 0.0)) {
                throw SchemaViolation("Solution." + std::string(name) + " must be >= 0");
            }
        }
    }
}

void Graph::index_facilities(NodeId id, std::optional<std::int64_t> before) {
    auto after = nodes_[id.value].get_int(prop::kNumFacilities);
    if (before == after) return;
    if (before) {
        auto [lo, hi] = facility_index_.equal_range(*before);
        for (auto it = lo; it != hi; ++it) {
            if (it->second == id) {
                facility_index_.erase(it);
                break;
            }
        }
    }
    if (after) facility_index_.emplace(*after, id);
}

NodeUpsert Graph::upsert_node(NodeLabel label, std::string_view key, const PropertyMap& properties) {
    auto normalized = normalize_key(label, key);
    if (normalized.empty()) throw SchemaViolation(std::string(to_string(label)) + " key is empty");

    auto existing = find(label, normalized);
    validate_properties(label, properties, !existing.has_value());

    if (existing) {
        auto& node = nodes_[existing->value];
        auto before = node.get_int(prop::kNumFacilities);
        for (const auto& [name, value] : properties) node.properties.insert_or_assign(name, value);
        if (label == NodeLabel::Problem) index_facilities(node.id, before);
        return {*existing, false};
    }

    GraphNode node;
    node.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
    node.label = label;
    node.key = normalized;
    node.properties = properties;
    if (is_catalog_label(label) && !node.properties.contains(prop::kName))
        node.properties.emplace(std::string(prop::kName), text::collapse_whitespace(key));
    identity_.emplace(std::pair{label, normalized}, node.id);
    nodes_.push_back(std::move(node));
    if (label == NodeLabel::Problem) index_facilities(nodes_.back().id, std::nullopt);
    return {nodes_.back().id, true};
}

EdgeUpsert Graph::upsert_edge(NodeId from, EdgeType type, NodeId to) {
    const auto& a = node(from);
    const auto& b = node(to);
    if (!edge_allowed(a.label, type, b.label)) {
        throw SchemaViolation("(" + std::string(to_string(a.label)) + ")-[" +
                              std::string(to_string(type)) + "]->(" +
                              std::string(to_string(b.label)) + ") is not in the schema");
    }
    Edge edge{from, type, to};
    bool created = edges_.insert(edge).second;
    if (created) reverse_.insert(Edge{to, type, from});
    return {edge, created};
}

bool Graph::remove_edge(NodeId from, EdgeType type, NodeId to) {
    if (edges_.erase(Edge{from, type, to}) == 0) return false;
    reverse_.erase(Edge{to, type, from});
    return true;
}

bool Graph::erase_property(NodeId id, std::string_view name) {
    auto& props = nodes_.at(id.value).properties;
    auto it = props.find(name);
    if (it == props.end()) return false;
    if (name == prop::kNumFacilities && nodes_[id.value].label == NodeLabel::Problem)
        throw SchemaViolation("Problem.num_facilities cannot be removed");
    if ((name == prop::kCost || name == prop::kTimeSec) && nodes_[id.value].label == NodeLabel::Solution)
        throw SchemaViolation("Solution." + std::string(name) + " cannot be removed");
    props.erase(it);
    return true;
}

std::optional<NodeId> Graph::find(NodeLabel label, std::string_view key) const {
    auto it = identity_.find(std::pair{label, normalize_key(label, key)});
    if (it == identity_.end()) return std::nullopt;
    return it->second;
}

const GraphNode& Graph::node(NodeId id) const { return nodes_.at(id.value); }

std::vector<NodeId> Graph::nodes_with_label(NodeLabel label) const {
    std::vector<NodeId> out;
    for (auto it = identity_.lower_bound(std::pair{label, std::string()});
         it != identity_.end() && it->first.first == label; ++it)
        out.push_back(it->second);
    return out;
}

std::vector<NodeId> Graph::targets(NodeId from, EdgeType type) const {
    std::vector<NodeId> out;
    for (auto it = edges_.lower_bound(Edge{from, type, NodeId{0}});
         it != edges_.end() && it->from == from && it->type == type; ++it)
        out.push_back(it->to);
    return out;
}

std::vector<NodeId> Graph::sources(NodeId to, EdgeType type) const {
    std::vector<NodeId> out;
    for (auto it = reverse_.lower_bound(Edge{to, type, NodeId{0}});
         it != reverse_.end() && it->from == to && it->type == type; ++it)
        out.push_back(it->to);
    return out;
}

std::vector<std::string> Graph::catalog_names(NodeLabel label) const {
    std::vector<std::string> out;
    for (auto id : nodes_with_label(label)) out.push_back(node(id).display_name());
    return out;
}

ProblemMatch Graph::describe_problem(NodeId problem) const {
    ProblemMatch match;
    match.problem = node(problem);
    match.num_facilities = match.problem.get_int(prop::kNumFacilities).value_or(0);

    auto keys_of = [&](EdgeType type) {
        std::vector<std::string> keys;
        for (auto id : targets(problem, type)) keys.push_back(node(id).key);
        std::sort(keys.begin(), keys.end());
        return keys;
    };
    match.objectives = keys_of(EdgeType::HasObjective);
    match.constraints = keys_of(EdgeType::HasConstraint);
    match.representations = keys_of(EdgeType::HasRepresentation);
    match.constraint_handlings = keys_of(EdgeType::ConsHandling);
    if (auto s = keys_of(EdgeType::BelongsToScale); !s.empty()) match.scale_cluster = s.front();
    if (auto o = keys_of(EdgeType::ObjectiveCluster); !o.empty()) match.objective_cluster = o.front();

    for (auto sid : sources(problem, EdgeType::Solved)) {
        SolutionView view{node(sid), {}};
        if (auto methods = targets(sid, EdgeType::UsedMethod); !methods.empty())
            view.method = node(methods.front()).display_name();
        match.solutions.push_back(std::move(view));
    }
    std::sort(match.solutions.begin(), match.solutions.end(),
              [](const SolutionView& a, const SolutionView& b) { return a.node.key < b.node.key; });
    return match;
}

std::vector<ProblemMatch> Graph::match_problems(const ProblemPredicate& predicate) const {
    std::vector<NodeId> candidates;
    if (predicate.min_facilities || predicate.max_facilities) {
        auto first = facility_index_.begin();
        if (predicate.min_facilities) {
            auto bound = static_cast<std::int64_t>(std::ceil(*predicate.min_facilities));
            first = facility_index_.lower_bound(bound);
        }
        for (auto it = first; it != facility_index_.end(); ++it) {
            auto n = static_cast<double>(it->first);
            if (predicate.max_facilities && n > *predicate.max_facilities) break;
            if (predicate.min_facilities && n < *predicate.min_facilities) continue;
            candidates.push_back(it->second);
        }
    } else {
        candidates = nodes_with_label(NodeLabel::Problem);
    }

    std::vector<ProblemMatch> out;
    for (auto id : candidates) {
        auto match = describe_problem(id);
        if (predicate.scale_cluster && match.scale_cluster != *predicate.scale_cluster) continue;
        if (predicate.objective_cluster && match.objective_cluster != *predicate.objective_cluster)
            continue;
        if (!predicate.any_of.empty()) {
            bool any = false;
            for (const auto& req : predicate.any_of) {
                const std::vector<std::string>* linked = nullptr;
                switch (req.edge) {
                    case EdgeType::HasObjective: linked = &match.objectives; break;
                    case EdgeType::HasConstraint: linked = &match.constraints; break;
                    case EdgeType::HasRepresentation: linked = &match.representations; break;
                    case EdgeType::ConsHandling: linked = &match.constraint_handlings; break;
                    default: throw SchemaViolation("predicate on unsupported relationship " +
                                                   std::string(to_string(req.edge)));
                }
                for (const auto& name : req.names) {
                    if (std::binary_search(linked->begin(), linked->end(), text::canonical_name(name))) {
                        any = true;
                        break;
                    }
                }
                if (any) break;
            }
            if (!any) continue;
        }
        out.push_back(std::move(match));
    }
    std::sort(out.begin(), out.end(), [](const ProblemMatch& a, const ProblemMatch& b) {
        return a.problem_id() < b.problem_id();
    });
    return out;
}

KnowledgeBaseStats Graph::stats() const {
    if (facility_index_.empty()) throw EmptyStore();
    KnowledgeBaseStats stats;
    for (auto label : kAllNodeLabels) stats.node_count_by_label[std::string(to_string(label))] = 0;
    for (auto type : kAllEdgeTypes) stats.edge_count_by_type[std::string(to_string(type))] = 0;
    for (const auto& n : nodes_) ++stats.node_count_by_label[std::string(to_string(n.label))];
    for (const auto& e : edges_) ++stats.edge_count_by_type[std::string(to_string(e.type))];

    std::vector<std::int64_t> sizes;
    sizes.reserve(facility_index_.size());
    for (const auto& [n, id] : facility_index_) sizes.push_back(n);  // multimap keeps them sorted
    stats.max_num_facilities = sizes.back();
    stats.facility_top_quartile = nearest_rank_percentile(sizes, 3, 4);
    return stats;
}

// Snapshot

void Graph::save(std::ostream& out) const {
    auto ref = [&](NodeId id) {
        const auto& n = node(id);
        return json::array({std::string(to_string(n.label)), n.key});
    };

    out << json{{"format", std::string(kSnapshotFormat)}, {"version", kSnapshotVersion}}.dump() << '\n';

    std::vector<const GraphNode*> ordered;
    ordered.reserve(nodes_.size());
    for (const auto& n : nodes_) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(), [](const GraphNode* a, const GraphNode* b) {
        return std::tie(a->label, a->key) < std::tie(b->label, b->key);
    });
    for (const auto* n : ordered) {
        json props = json::object();
        for (const auto& [name, value] : n->properties) props[name] = property_to_json(value);
        out << json{{"node", std::string(to_string(n->label))}, {"key", n->key}, {"props", props}}.dump() << '\n';
    }

    std::vector<const Edge*> edges;
    edges.reserve(edges_.size());
    for (const auto& e : edges_) edges.push_back(&e);
    auto edge_key = [&](const Edge* e) {
        const auto& a = node(e->from);
        const auto& b = node(e->to);
        return std::tie(e->type, a.label, a.key, b.label, b.key);
    };
    std::sort(edges.begin(), edges.end(),
              [&](const Edge* a, const Edge* b) { return edge_key(a) < edge_key(b); });
    for (const auto* e : edges) {
        out << json{{"edge", std::string(to_string(e->type))}, {"from", ref(e->from)}, {"to", ref(e->to)}}.dump()
            << '\n';
    }
    out << json{{"end", true}, {"nodes", nodes_.size()}, {"edges", edges_.size()}}.dump() << '\n';
}

std::string Graph::serialize() const {
    std::ostringstream out;
    save(out);
    return out.str();
}

Graph Graph::load(std::istream& in) {
    Graph graph;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool end_seen = false;

    auto fail = [&](const std::string& why) -> FormatError {
        return FormatError("snapshot line " + std::to_string(line_no) + ": " + why);
    };
    auto resolve = [&](const json& ref) {
        if (!ref.is_array() || ref.size() != 2) throw fail("bad node reference");
        auto label = parse_node_label(ref[0].get<std::string>());
        if (!label) throw fail("unknown label in reference");
        auto id = graph.find(*label, ref[1].get<std::string>());
        if (!id) throw fail("edge references unknown node");
        return *id;
    };

    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (end_seen) throw fail("content after end marker");
            auto record = json::parse(line);
            if (!header_seen) {
                if (record.value("format", "") != kSnapshotFormat ||
                    record.value("version", 0) != kSnapshotVersion)
                    throw fail("not a snapshot header");
                header_seen = true;
            } else if (record.contains("node")) {
                auto label = parse_node_label(record.at("node").get<std::string>());
                if (!label) throw fail("unknown node label");
                PropertyMap props;
                for (const auto& [name, value] : record.at("props").items())
                    props.emplace(name, property_from_json(value));
                auto key = record.at("key").get<std::string>();
                if (graph.find(*label, key)) throw fail("duplicate node");
                graph.upsert_node(*label, key, props);
            } else if (record.contains("edge")) {
                auto type = parse_edge_type(record.at("edge").get<std::string>());
                if (!type) throw fail("unknown edge type");
                graph.upsert_edge(resolve(record.at("from")), *type, resolve(record.at("to")));
            } else if (record.contains("end")) {
                if (record.at("nodes").get<std::size_t>() != graph.node_count() ||
                    record.at("edges").get<std::size_t>() != graph.edge_count())
                    throw fail("record counts do not match end marker");
                end_seen = true;
            } else {
                throw fail("unrecognized record");
            }
        }
    } catch (const json::exception& e) {
        throw fail(e.what());
    } catch (const SchemaViolation& e) {
        throw fail(e.what());
    }
    if (!header_seen) throw FormatError("snapshot is empty");
    if (!end_seen) throw FormatError("snapshot is truncated (no end marker)");
    return graph;
}

void Graph::snapshot_save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        save(out);
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

Graph Graph::snapshot_load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load(in);
}

}  // namespace flpadv
