#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flpadv/graph_store.hpp"

namespace flpadv {

struct ProblemInstance;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // Same text, same vector; every vector has dimension() entries.
    virtual std::vector<double> embed(std::string_view text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Offline hashing embedder: lower-cased alphanumeric tokens are hashed
// (FNV-1a) into `dimension` buckets, counted, and L2-normalized. Text with
// no tokens maps to the zero vector.
class MockEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dimension = 64);

    std::vector<double> embed(std::string_view text) override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
};

std::string build_description(const ProblemInstance& problem);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct VectorMatch {
    std::string problem_id;
    double similarity = 0;
    std::string description_text;
};

inline constexpr std::size_t kDefaultVectorK = 5;

// Exact cosine search over the embeddings cached on Problem nodes. The
// store is the index: membership is the set of Problems carrying an
// "embedding" property.
class EmbeddingIndex {
public:
    EmbeddingIndex(GraphStore& store, EmbeddingProvider& provider)
        : store_(store), provider_(provider) {}

    // False without calling the provider when the node is already embedded.
    // Provider failures surface as ProviderError and leave the node untouched.
    bool index_problem(std::string_view problem_id);

    // Embeds every Problem that lacks a vector; returns how many were added.
    std::size_t index_all();

    std::vector<VectorMatch> similarity_search(std::string_view query_text, std::size_t k) const;

    // Same search against an explicit snapshot (used by retrieval so all
    // channels read one consistent graph).
    std::vector<VectorMatch> similarity_search(const Graph& graph, std::string_view query_text,
                                               std::size_t k) const;

    std::size_t indexed_count() const;
    EmbeddingProvider& provider() const { return provider_; }

private:
    std::vector<double> checked_embed(std::string_view text) const;

    GraphStore& store_;
    EmbeddingProvider& provider_;
};

}  // namespace flpadv
