#pragma once
// Embedded typed property graph for the facility-layout knowledge base.
//
// Graph is a plain value type: copyable, not synchronized. GraphStore wraps
// it with copy-on-write batches so that readers always hold an immutable,
// fully applied snapshot and writers serialize on one mutex.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace flpadv {

enum class NodeLabel : std::uint8_t {
    Problem,
    Method,
    Objective,
    Constraint,
    Representation,
    ConstraintHandling,
    Solution,
    ObjectiveCluster,
    ScaleCluster,
    MethodCluster,
    ConstraintHandlingCluster,
};

enum class EdgeType : std::uint8_t {
    Solved,
    UsedMethod,
    HasObjective,
    HasConstraint,
    HasRepresentation,
    ConsHandling,
    BelongsToScale,
    IsTypeOf,
    ObjectiveCluster,
};

inline constexpr NodeLabel kAllNodeLabels[] = {
    NodeLabel::Problem,          NodeLabel::Method,         NodeLabel::Objective,
    NodeLabel::Constraint,       NodeLabel::Representation, NodeLabel::ConstraintHandling,
    NodeLabel::Solution,         NodeLabel::ObjectiveCluster, NodeLabel::ScaleCluster,
    NodeLabel::MethodCluster,    NodeLabel::ConstraintHandlingCluster,
};

inline constexpr EdgeType kAllEdgeTypes[] = {
    EdgeType::Solved,         EdgeType::UsedMethod,        EdgeType::HasObjective,
    EdgeType::HasConstraint,  EdgeType::HasRepresentation, EdgeType::ConsHandling,
    EdgeType::BelongsToScale, EdgeType::IsTypeOf,          EdgeType::ObjectiveCluster,
};

std::string_view to_string(NodeLabel label);
std::string_view to_string(EdgeType type);
std::optional<NodeLabel> parse_node_label(std::string_view s);
std::optional<EdgeType> parse_edge_type(std::string_view s);

// Relationship schema: the closed set of (source, type, target) triples.
bool edge_allowed(NodeLabel from, EdgeType type, NodeLabel to);

// Catalog labels are identified by canonical (lower-cased, trimmed) name.
bool is_catalog_label(NodeLabel label);

// Identity key as stored: canonical name for catalog labels, trimmed otherwise.
std::string normalize_key(NodeLabel label, std::string_view key);

namespace prop {
inline constexpr std::string_view kName = "name";
inline constexpr std::string_view kNumFacilities = "num_facilities";
inline constexpr std::string_view kFloorWidth = "floor_w";
inline constexpr std::string_view kFloorHeight = "floor_h";
inline constexpr std::string_view kFacilityDimensionData = "facility_dimension_data";
inline constexpr std::string_view kDescription = "description";
inline constexpr std::string_view kEmbedding = "embedding";
inline constexpr std::string_view kCost = "cost";
inline constexpr std::string_view kTimeSec = "time_sec";
inline constexpr std::string_view kModelParameters = "model_parameters";
inline constexpr std::string_view kSource = "source";
}  // namespace prop

using PropertyValue = std::variant<std::string, std::int64_t, double, std::vector<double>>;
using PropertyMap = std::map<std::string, PropertyValue, std::less<>>;

struct NodeId {
    std::uint32_t value = 0;
    auto operator<=>(const NodeId&) const = default;
};

struct GraphNode {
    NodeId id;
    NodeLabel label = NodeLabel::Problem;
    std::string key;
    PropertyMap properties;

    const std::string* get_string(std::string_view name) const;
    std::optional<std::int64_t> get_int(std::string_view name) const;
    std::optional<double> get_real(std::string_view name) const;
    const std::vector<double>* get_vector(std::string_view name) const;

    // Display name: the "name" property when present, otherwise the key.
    std::string display_name() const;
};

struct Edge {
    NodeId from;
    EdgeType type = EdgeType::Solved;
    NodeId to;
    auto operator<=>(const Edge&) const = default;
};

struct NodeUpsert {
    NodeId id;
    bool created = false;
};

struct EdgeUpsert {
    Edge edge;
    bool created = false;
};

// Any-of membership on one relationship, compared against canonical keys.
struct EntityRequirement {
    EdgeType edge = EdgeType::HasObjective;
    std::vector<std::string> names;
};

// A Problem passes when every set field holds; `any_of` entries are OR-ed
// together and an empty `any_of` always passes.
struct ProblemPredicate {
    std::optional<double> min_facilities;
    std::optional<double> max_facilities;
    std::vector<EntityRequirement> any_of;
    std::optional<std::string> scale_cluster;
    std::optional<std::string> objective_cluster;
};

struct SolutionView {
    GraphNode node;
    std::string method;
};

struct ProblemMatch {
    GraphNode problem;
    std::int64_t num_facilities = 0;
    std::vector<std::string> objectives;
    std::vector<std::string> constraints;
    std::vector<std::string> representations;
    std::vector<std::string> constraint_handlings;
    std::string scale_cluster;
    std::string objective_cluster;
    std::vector<SolutionView> solutions;  // ordered by solution key

    const std::string& problem_id() const { return problem.key; }
};

struct KnowledgeBaseStats {
    std::map<std::string, std::size_t> node_count_by_label;
    std::map<std::string, std::size_t> edge_count_by_type;
    std::int64_t max_num_facilities = 0;
    std::int64_t facility_top_quartile = 0;

    bool operator==(const KnowledgeBaseStats&) const = default;
};

// Nearest-rank percentile: smallest value whose cumulative rank reaches
// ceil(fraction * N). `sorted` must be ascending and non-empty.
std::int64_t nearest_rank_percentile(std::span<const std::int64_t> sorted, int numerator,
                                     int denominator);

class Graph {
public:
    NodeUpsert upsert_node(NodeLabel label, std::string_view key, const PropertyMap& properties);
    EdgeUpsert upsert_edge(NodeId from, EdgeType type, NodeId to);
    bool remove_edge(NodeId from, EdgeType type, NodeId to);
    bool erase_property(NodeId id, std::string_view name);

    std::optional<NodeId> find(NodeLabel label, std::string_view key) const;
    const GraphNode& node(NodeId id) const;
    std::span<const GraphNode> nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::vector<NodeId> nodes_with_label(NodeLabel label) const;
    std::vector<NodeId> targets(NodeId from, EdgeType type) const;
    std::vector<NodeId> sources(NodeId to, EdgeType type) const;

    // Display names of every node with `label`, ordered by key.
    std::vector<std::string> catalog_names(NodeLabel label) const;

    std::vector<ProblemMatch> match_problems(const ProblemPredicate& predicate) const;
    ProblemMatch describe_problem(NodeId problem) const;

    KnowledgeBaseStats stats() const;
    std::size_t problem_count() const { return facility_index_.size(); }

    // Canonical line-delimited snapshot: nodes ordered by (label, key),
    // edges by (type, endpoints); independent of insertion order.
    void save(std::ostream& out) const;
    std::string serialize() const;
    static Graph load(std::istream& in);

    void snapshot_save(const std::filesystem::path& path) const;
    static Graph snapshot_load(const std::filesystem::path& path);

private:
    void validate_properties(NodeLabel label, const PropertyMap& properties, bool creating) const;
    void index_facilities(NodeId id, std::optional<std::int64_t> before);

    std::vector<GraphNode> nodes_;
    std::map<std::pair<NodeLabel, std::string>, NodeId, std::less<>> identity_;
    std::set<Edge> edges_;
    std::set<Edge> reverse_;  // stored as (to, type, from)
    std::multimap<std::int64_t, NodeId> facility_index_;
};

class GraphStore {
public:
    GraphStore() : current_(std::make_shared<const Graph>()) {}
    explicit GraphStore(Graph graph) : current_(std::make_shared<const Graph>(std::move(graph))) {}

    GraphStore(const GraphStore&) = delete;
    GraphStore& operator=(const GraphStore&) = delete;

    // Immutable view; stays valid and consistent while held.
    std::shared_ptr<const Graph> snapshot() const {
        std::lock_guard lock(publish_mutex_);
        return current_;
    }

    // Applies `fn` to a private copy and publishes it only if `fn` returns
    // normally. Readers see either the previous graph or the whole batch.
    template <class Fn>
    auto write(Fn&& fn) -> std::invoke_result_t<Fn, Graph&> {
        std::lock_guard writer(writer_mutex_);
        auto next = std::make_shared<Graph>(*snapshot());
        if constexpr (std::is_void_v<std::invoke_result_t<Fn, Graph&>>) {
            fn(*next);
            publish(std::move(next));
        } else {
            auto result = fn(*next);
            publish(std::move(next));
            return result;
        }
    }

    void replace(Graph graph) {
        std::lock_guard writer(writer_mutex_);
        publish(std::make_shared<Graph>(std::move(graph)));
    }

    KnowledgeBaseStats stats() const { return snapshot()->stats(); }

private:
    void publish(std::shared_ptr<Graph> next) {
        std::lock_guard lock(publish_mutex_);
        current_ = std::move(next);
    }

    mutable std::mutex publish_mutex_;
    std::mutex writer_mutex_;
    std::shared_ptr<const Graph> current_;
};

}  // namespace flpadv
