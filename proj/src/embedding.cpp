#include "flpadv/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "flpadv/error.hpp"
#include "flpadv/ingestion.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string joined_or_unspecified(const std::vector<std::string>& names) {
    return names.empty() ? std::string("unspecified") : text::join(names, ", ");
}

std::string or_unspecified(const std::string& s) { return s.empty() ? std::string("unspecified") : s; }

}  // namespace

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ < 8) throw ConfigError("embedding dimension must be at least 8");
}

std::vector<double> MockEmbeddingProvider::embed(std::string_view input) {
    std::vector<double> v(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        v[fnv1a(token) % dimension_] += 1.0;
        token.clear();
    };
    for (char c : input) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();

    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm > 0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

std::string build_description(const ProblemInstance& p) {
    return "Facility layout problem with " + std::to_string(p.num_facilities) +
           " facilities. Objectives: " + joined_or_unspecified(p.objectives) +
           ". Constraints: " + joined_or_unspecified(p.constraints) +
           ". Representation: " + or_unspecified(p.representation) +
           ". Constraint handling: " + or_unspecified(p.constraint_handling) + ".";
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw IndexingError("cosine of vectors with different dimensions");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> EmbeddingIndex::checked_embed(std::string_view input) const {
    std::vector<double> v;
    try {
        v = provider_.embed(input);
    } catch (const ProviderError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProviderError(std::string("embedding provider failed: ") + e.what());
    }
    if (v.size() != provider_.dimension())
        throw IndexingError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                            std::to_string(provider_.dimension()));
    return v;
}

bool EmbeddingIndex::index_problem(std::string_view problem_id) {
    auto graph = store_.snapshot();
    auto id = graph->find(NodeLabel::Problem, problem_id);
    if (!id) throw SchemaViolation("no Problem '" + std::string(problem_id) + "'");
    if (graph->node(*id).get_vector(prop::kEmbedding) != nullptr) return false;

    auto instance = problem_from_graph(*graph, *id);
    auto description =
        instance.description_text.empty() ? build_description(instance) : instance.description_text;

    auto vector = checked_embed(description);
    bool nonzero = std::any_of(vector.begin(), vector.end(), [](double x) { return x != 0.0; });
    bool finite = std::all_of(vector.begin(), vector.end(), [](double x) { return std::isfinite(x); });
    if (!nonzero || !finite)
        throw IndexingError("embedding for '" + std::string(problem_id) + "' is zero or non-finite");

    return store_.write([&](Graph& g) {
        auto current = g.find(NodeLabel::Problem, problem_id);
        if (!current || g.node(*current).get_vector(prop::kEmbedding) != nullptr) return false;
        PropertyMap props{{std::string(prop::kEmbedding), std::move(vector)}};
        if (g.node(*current).get_string(prop::kDescription) == nullptr)
            props.emplace(std::string(prop::kDescription), description);
        g.upsert_node(NodeLabel::Problem, problem_id, props);
        return true;
    });
}

std::size_t EmbeddingIndex::index_all() {
    auto graph = store_.snapshot();
    std::size_t added = 0;
    for (auto id : graph->nodes_with_label(NodeLabel::Problem))
        if (index_problem(graph->node(id).key)) ++added;
    return added;
}

std::vector<VectorMatch> EmbeddingIndex::similarity_search(std::string_view query_text,
                                                           std::size_t k) const {
    auto graph = store_.snapshot();
    return similarity_search(*graph, query_text, k);
}

std::vector<VectorMatch> EmbeddingIndex::similarity_search(const Graph& graph,
                                                           std::string_view query_text,
                                                           std::size_t k) const {
    if (k == 0) throw SchemaViolation("k must be at least 1");
    std::vector<const GraphNode*> indexed;
    for (auto id : graph.nodes_with_label(NodeLabel::Problem))
        if (graph.node(id).get_vector(prop::kEmbedding) != nullptr) indexed.push_back(&graph.node(id));
    if (indexed.empty()) throw EmptyIndex();

    auto query = checked_embed(query_text);
    std::vector<VectorMatch> matches;
    matches.reserve(indexed.size());
    for (const auto* node : indexed) {
        VectorMatch m;
        m.problem_id = node->key;
        m.similarity = cosine_similarity(query, *node->get_vector(prop::kEmbedding));
        if (const auto* d = node->get_string(prop::kDescription)) m.description_text = *d;
        matches.push_back(std::move(m));
    }
    // Scores equal to 12 decimals are ties; rounding noise from different
    // token orders must not decide the order.
    auto tie_key = [](double s) { return std::llround(s * 1e12); };
    auto by_rank = [&](const VectorMatch& a, const VectorMatch& b) {
        auto ka = tie_key(a.similarity), kb = tie_key(b.similarity);
        if (ka != kb) return ka > kb;
        return a.problem_id < b.problem_id;
    };
    if (matches.size() > k) {
        std::partial_sort(matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(k),
                          matches.end(), by_rank);
        matches.resize(k);
    } else {
        std::sort(matches.begin(), matches.end(), by_rank);
    }
    return matches;
}

std::size_t EmbeddingIndex::indexed_count() const {
    auto graph = store_.snapshot();
    std::size_t n = 0;
    for (auto id : graph->nodes_with_label(NodeLabel::Problem))
        if (graph->node(id).get_vector(prop::kEmbedding) != nullptr) ++n;
    return n;
}

}  // namespace flpadv
