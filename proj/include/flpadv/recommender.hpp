#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flpadv/llm.hpp"
#include "flpadv/retrieval.hpp"

namespace flpadv {

struct MethodParameters {
    std::string method;
    std::string model_parameters;
    std::string problem_id;  // the evidence row the values were copied from
};

struct Recommendation {
    std::vector<std::string> methods;  // ranked, first-mention order
    std::vector<MethodParameters> model_parameters;
    std::optional<std::string> representation;
    std::optional<std::string> constraint_handling;
    std::string recommendation_text;
    std::string reasoning;
    std::vector<std::string> cited_problem_ids;
    bool grounded = false;
    std::vector<std::string> ungrounded_methods;
};

// Byte-identical output for identical dossiers. Section order: ROLE, USER
// QUERY, GRAPH EVIDENCE, VECTOR EVIDENCE, CLUSTER TRENDS, OUTPUT FORMAT.
std::string compile_prompt(const EvidenceDossier& dossier);

// Original prompt plus an instruction to name only methods from the evidence.
std::string corrective_prompt(const std::string& prompt, const std::vector<std::string>& rejected);

// Splits on the first RECOMMENDATION: / REASONING: headers (any case) and
// extracts method names as whole words from the recommendation section,
// using the dossier's method catalog as vocabulary. Throws
// MalformedResponse when a header is missing, the reasoning is empty, or no
// known method is named.
Recommendation parse_response(std::string_view raw, const EvidenceDossier& dossier);

// The two-section text the parser expects.
std::string format_recommendation(const Recommendation& recommendation);

// Deterministic offline stand-in for the LLM. It reads the evidence lines of
// a compiled prompt and recommends the top two distinct methods, citing the
// rows it used. Given a dataset prompt (no evidence lines) it recommends the
// most frequent method in the CSV.
class EvidenceMockLlm final : public LlmProvider {
public:
    std::string complete(const std::string& prompt) override;
};

struct RecommenderConfig {
    RetrievalConfig retrieval;
    int transport_retries = 2;
    std::chrono::milliseconds backoff{250};  // doubles after each failed attempt
};

struct RecommendResult {
    Recommendation recommendation;
    EvidenceDossier dossier;
    std::size_t llm_calls = 0;
    bool corrective_retry = false;
    std::vector<std::string> warnings;
};

class Recommender {
public:
    Recommender(GraphStore& store, const EmbeddingIndex* index, LlmProvider& llm,
                RecommenderConfig config = {})
        : store_(store), index_(index), llm_(llm), config_(std::move(config)) {}

    // retrieve -> compile -> complete -> parse, with one corrective retry
    // when the answer is ungrounded or malformed. Throws EmptyEvidence when
    // every channel came back empty and ProviderError once the transport
    // retry budget is spent.
    RecommendResult recommend(const UserQuery& query) const;
    RecommendResult recommend(const Graph& snapshot, const UserQuery& query) const;

    const RecommenderConfig& config() const { return config_; }

    // complete() with transport retries and exponential backoff.
    std::string complete_with_retries(const std::string& prompt) const;

private:
    GraphStore& store_;
    const EmbeddingIndex* index_;
    LlmProvider& llm_;
    RecommenderConfig config_;
};

}  // namespace flpadv
