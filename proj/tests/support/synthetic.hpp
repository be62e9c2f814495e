#pragma once
// Random corpora and brute-force reference implementations for tests.
// The oracles work from CorpusRow lists only and never touch the graph.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flpadv/ingestion.hpp"
#include "flpadv/retrieval.hpp"

namespace flpadv::testing {

extern const std::vector<std::string> kObjectivePool;
extern const std::vector<std::string> kConstraintPool;
extern const std::vector<std::string> kMethodPool;

// Every problem keeps the same attributes on all of its rows and every
// (problem, method) pair occurs once, so solution ids do not depend on
// the ingestion path. Costs and times come from small sets to force ties.
std::vector<CorpusRow> random_corpus(std::mt19937_64& rng, std::size_t max_problems);

UserQuery random_query(std::mt19937_64& rng, const std::vector<CorpusRow>& rows);

struct OracleRow {
    std::string problem_id;
    std::string method;  // canonical
    double cost = 0;
    double time_sec = 0;
    std::int64_t objective_score = 0;
    std::int64_t constraint_score = 0;
    std::int64_t facility_distance = 0;

    bool operator==(const OracleRow&) const = default;
};

struct OracleResult {
    std::vector<OracleRow> rows;
    std::vector<std::string> candidate_ids;  // sorted
};

// Filter by facility window and entity overlap, apply the multi-objective
// preference, sort by the relevance key, truncate.
OracleResult oracle_graph_search(const std::vector<CorpusRow>& rows, const UserQuery& query, std::size_t limit);

OracleRow to_oracle_row(const GraphEvidenceRow& row);

// ceil(3N/4)-th smallest value, found by counting.
std::int64_t oracle_top_quartile(std::vector<std::int64_t> values);

struct OracleTrend {
    std::string kind;
    std::string label;
    std::vector<std::pair<std::string, std::size_t>> top;  // canonical method, count
};

std::vector<OracleTrend> oracle_trends(const std::vector<CorpusRow>& rows, const std::vector<std::string>& problem_ids,
                                       const UserQuery& query, std::int64_t small_max, std::int64_t medium_max);

// Plain loops, no shared code with the library.
double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b);

std::vector<CorpusRow> seed_rows();  // data/seed_corpus.csv
std::string seed_csv_path();
std::string cases_path();

}  // namespace flpadv::testing
