#pragma once
// Evaluation protocol: accuracy against ground truth plus an LLM judge that
// scores the reasoning on a five-level rubric. Runs either the full
// pipeline or the raw-CSV baseline.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flpadv/ingestion.hpp"
#include "flpadv/llm.hpp"
#include "flpadv/recommender.hpp"
#include "flpadv/retrieval.hpp"

namespace flpadv {

struct TestCase {
    std::string id;
    QueryInput query;
    std::vector<std::string> ground_truth;  // non-empty
};

// JSON list of {"id", "query": {num_facilities, objectives, constraints,
// representation, free_text}, "ground_truth": [..]}. FormatError on shape
// problems.
std::vector<TestCase> parse_cases(const nlohmann::json& json);
std::vector<TestCase> load_cases(const std::filesystem::path& path);

// 1 when the canonical name sets intersect.
int score_accuracy(std::span<const std::string> recommended, std::span<const std::string> ground_truth);

extern const std::string_view kReasoningRubric;

std::string dossier_summary(const EvidenceDossier& dossier);
std::string judge_prompt(std::string_view recommendation_text, std::string_view reasoning,
                         std::string_view summary);

// First standalone integer in 1..5.
std::optional<int> parse_judge_score(std::string_view response);

// Asks once, retries once, then throws MalformedResponse.
int judge_reasoning(LlmProvider& judge, std::string_view recommendation_text, std::string_view reasoning,
                    std::string_view summary);

// Offline judge. Scores by how many evidence problem ids the reasoning
// cites and whether it quotes numbers.
class RubricMockJudge final : public LlmProvider {
public:
    std::string complete(const std::string& prompt) override;
};

enum class EvalMode { KgRag, Baseline };
std::string_view to_string(EvalMode mode);

struct CaseResult {
    std::string id;
    std::vector<std::string> ground_truth;
    std::vector<std::string> methods;
    int accuracy_bit = 0;
    std::optional<int> reasoning_score;
    bool grounded = false;
    std::optional<std::string> error;
};

struct EvalReport {
    EvalMode mode = EvalMode::KgRag;
    std::vector<CaseResult> cases;
    double accuracy_fraction = 0;  // mean of accuracy bits; 0 for no cases
    double mean_reasoning = 0;     // over cases that received a score
    std::size_t scored_cases = 0;

    void aggregate();
};

nlohmann::json to_json(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

// <dir>/<stem>.report.json next to the cases file.
std::filesystem::path report_path_for(const std::filesystem::path& cases_path);

struct SuiteOptions {
    bool parallel = false;  // kgrag mode only
};

EvalReport run_kgrag_suite(std::span<const TestCase> cases, const Recommender& recommender,
                           GraphStore& store, LlmProvider& judge, SuiteOptions options = {});

// The whole corpus goes into the prompt under a DATASET heading.
std::string baseline_prompt(std::string_view corpus_csv, const QueryInput& query);

// Every corpus row as evidence, so the shared parser can check grounding.
EvidenceDossier baseline_dossier(std::span<const CorpusRow> rows, const QueryInput& query);

EvalReport run_baseline_suite(std::span<const TestCase> cases, std::string_view corpus_csv,
                              LlmProvider& llm, LlmProvider& judge);

}  // namespace flpadv
