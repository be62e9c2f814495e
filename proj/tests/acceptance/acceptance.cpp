// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flpadv/error.hpp"
#include "flpadv/eval.hpp"
#include "flpadv/feedback.hpp"
#include "flpadv/recommender.hpp"
#include "synthetic.hpp"

using namespace flpadv;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Each check returns an empty string on success, otherwise what went wrong.
struct Criterion {
    const char* name;
    std::string (*check)();
};

Graph graph_of(const std::vector<CorpusRow>& rows) {
    Graph g;
    load_corpus(g, rows, ClusterConfig::defaults());
    return g;
}

UserQuery query(const Graph& g, std::optional<std::int64_t> n, std::vector<std::string> objectives,
                std::vector<std::string> constraints) {
    QueryInput in;
    in.num_facilities = n;
    in.objectives = std::move(objectives);
    in.constraints = std::move(constraints);
    return normalize_query(g, in);
}

RecommenderConfig fast() {
    RecommenderConfig c;
    c.backoff = std::chrono::milliseconds(1);
    return c;
}

std::string ranking_oracle() {
    auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    int mismatches = 0, queries = 0;
    for (int store = 0; store < 120; ++store) {
        auto rows = testing::random_corpus(rng, 50);
        auto g = graph_of(rows);
        for (int k = 0; k < 10; ++k, ++queries) {
            auto q = testing::random_query(rng, rows);
            auto got = graph_search(g, q, 5);
            auto want = testing::oracle_graph_search(rows, q, 5);
            std::vector<testing::OracleRow> got_rows;
            for (const auto& r : got.rows) got_rows.push_back(testing::to_oracle_row(r));
            if (got_rows != want.rows || got.pre_limit_problem_ids != want.candidate_ids) ++mismatches;
        }
    }
    auto elapsed = seconds_since(start);
    std::ostringstream out;
    if (mismatches) out << mismatches << " of " << queries << " queries differ from the oracle";
    else if (elapsed >= 5.0) out << "took " << elapsed << " s";
    return out.str();
}

std::string facility_window() {
    // One problem of every size 1..240, no entity names, so only the window filters.
    std::vector<CorpusRow> rows;
    for (int n = 1; n <= 240; ++n) {
        CorpusRow r;
        r.problem_id = "W_" + std::to_string(n);
        r.num_facilities = n;
        r.floor_w = r.floor_h = 10;
        r.method = "GA";
        r.cost = 1;
        r.time_sec = 1;
        rows.push_back(r);
    }
    auto g = graph_of(rows);
    int mismatches = 0;
    for (int q = 1; q <= 190; ++q) {
        UserQuery uq;
        uq.num_facilities = q;
        auto got = graph_search(g, uq, 1000).pre_limit_problem_ids;
        std::set<std::string> got_set(got.begin(), got.end());
        for (int n = 1; n <= 240; ++n) {
            bool want = 0.75 * q <= n && n <= 1.25 * q;
            if (got_set.count("W_" + std::to_string(n)) != static_cast<std::size_t>(want)) ++mismatches;
        }
    }
    UserQuery eight;
    eight.num_facilities = 8;
    auto ids = graph_search(g, eight, 1000).pre_limit_problem_ids;
    bool boundary = ids.front() == "W_10" && ids.back() == "W_9" && ids.size() == 5;  // 6..10, sorted as text
    std::set<std::string> s(ids.begin(), ids.end());
    boundary = boundary && s.count("W_6") && s.count("W_10") && !s.count("W_5") && !s.count("W_11");
    if (mismatches) return std::to_string(mismatches) + " inclusion mismatches";
    if (!boundary) return "n=8 does not include exactly 6..10";
    return {};
}

std::string fallback_truth_table() {
    auto g = graph_of(testing::seed_rows());
    auto config = ClusterConfig::defaults();
    auto stats = g.stats();
    int fired = 0;
    for (bool empty : {false, true})
        for (bool beyond : {false, true}) {
            std::int64_t n = beyond ? stats.max_num_facilities + 1 : stats.max_num_facilities;
            if (fallback_triggered(empty, n, stats.max_num_facilities)) {
                ++fired;
                if (!(empty && beyond)) return "fallback fired for a non-qualifying combination";
            }
        }
    if (fired != 1) return "fallback fired " + std::to_string(fired) + " times";

    // The same four cases against real searches.
    auto empty_within = search_with_fallback(g, query(g, 48, {"min total distance"}, {}), 5, config);
    auto full_within = search_with_fallback(g, query(g, 10, {}, {}), 5, config);
    auto full_beyond = search_with_fallback(g, query(g, 50, {}, {}), 5, config);
    auto empty_beyond = search_with_fallback(g, query(g, 100, {}, {}), 5, config);
    if (!empty_within.rows.empty() || empty_within.used_fallback) return "empty result within range fell back";
    if (full_within.rows.empty() || full_within.used_fallback) return "non-empty result within range fell back";
    if (full_beyond.rows.empty() || full_beyond.used_fallback) return "non-empty result beyond max fell back";
    if (!empty_beyond.used_fallback || empty_beyond.rows.empty()) return "empty result beyond max did not fall back";
    for (const auto& r : empty_beyond.rows) {
        auto id = *g.find(NodeLabel::Problem, r.problem_id);
        auto p = g.describe_problem(id);
        if (p.num_facilities < stats.facility_top_quartile || p.scale_cluster != config.large_label)
            return "fallback row " + r.problem_id + " is outside the top quartile or the large cluster";
    }
    if (empty_beyond.rows.front().method != "BRKGA-LP") return "fallback does not rank BRKGA-LP first";
    return {};
}

std::string multi_objective() {
    auto g = graph_of(testing::seed_rows());
    auto q = query(g, 15, {"max closeness rating", "min material handling cost"},
                   {"non-overlapping", "boundary constraints", "aspect ratio"});
    auto r = graph_search(g, q, 100);
    if (r.rows.empty()) return "no rows";
    for (const auto& row : r.rows) {
        if (row.objective_names.size() < 2) return "single-objective problem " + row.problem_id + " in rows";
        if (row.method == "ACO-FBS") return "ACO-FBS appears";
    }
    if (r.rows.front().method != "HSA") return "first method is " + r.rows.front().method;
    return {};
}

std::string benchmark_suite() {
    auto start = Clock::now();
    GraphStore store;
    load_corpus(store, testing::seed_rows(), ClusterConfig::defaults());
    MockEmbeddingProvider embedder;
    EmbeddingIndex index(store, embedder);
    index.index_all();
    EvidenceMockLlm llm;
    RubricMockJudge judge;
    Recommender rec(store, &index, llm, fast());
    auto cases = load_cases(testing::cases_path());
    auto report = run_kgrag_suite(cases, rec, store, judge);
    auto elapsed = seconds_since(start);

    // Each ground truth must also be the comparator-optimal answer.
    auto snap = store.snapshot();
    for (const auto& c : cases) {
        auto d = retrieve_evidence(*snap, nullptr, normalize_query(*snap, c.query), {});
        if (d.graph_rows.empty() || !score_accuracy(std::vector<std::string>{d.graph_rows.front().method}, c.ground_truth))
            return "case " + c.id + ": top-ranked row is not the ground truth";
    }
    if (report.cases.size() != 5) return "expected 5 cases";
    for (const auto& c : report.cases) {
        if (c.error) return "case " + c.id + ": " + *c.error;
        if (!c.grounded) return "case " + c.id + " not grounded";
        if (!c.accuracy_bit) return "case " + c.id + " missed its ground truth";
    }
    if (report.accuracy_fraction != 1.0) return "accuracy below 5/5";
    if (elapsed >= 10.0) return "took " + std::to_string(elapsed) + " s";
    return {};
}

std::string idempotence_and_paths() {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 20; ++round) {
        auto rows = testing::random_corpus(rng, 30);

        GraphStore via_csv;
        auto parsed = parse_corpus(to_csv(rows));
        if (!parsed.errors.empty()) return "synthetic CSV did not parse";
        load_corpus(via_csv, parsed.rows, ClusterConfig::defaults());
        MockEmbeddingProvider e1;
        EmbeddingIndex i1(via_csv, e1);
        i1.index_all();
        auto once = via_csv.snapshot()->serialize();

        load_corpus(via_csv, parsed.rows, ClusterConfig::defaults());
        i1.index_all();
        if (via_csv.snapshot()->serialize() != once) return "second ingestion changed the store";

        GraphStore via_feedback;
        MockEmbeddingProvider e2;
        EmbeddingIndex i2(via_feedback, e2);
        auto shuffled = rows;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (const auto& r : shuffled) ingest_feedback(via_feedback, &i2, to_raw_record(r), ClusterConfig::defaults());
        if (via_feedback.snapshot()->serialize() != once) return "feedback path differs from CSV path";
        for (const auto& r : shuffled) ingest_feedback(via_feedback, &i2, to_raw_record(r), ClusterConfig::defaults());
        if (via_feedback.snapshot()->serialize() != once) return "repeated feedback changed the store";
    }
    return {};
}

std::string learning_loop() {
    GraphStore store;
    load_corpus(store, testing::seed_rows(), ClusterConfig::defaults());
    MockEmbeddingProvider embedder;
    EmbeddingIndex index(store, embedder);
    index.index_all();
    if (store.stats().max_num_facilities != 48) return "unexpected seed maximum";

    FeedbackRecord r = {{"problem_id", "U_50"},
                        {"num_facilities", "50"},
                        {"floor_w", "130"},
                        {"floor_h", "100"},
                        {"problem_representation", "continuous"},
                        {"objective", "min material handling cost"},
                        {"constraints", "non-overlapping, aspect ratio"},
                        {"constraint_handling", "penalty function"},
                        {"method", "GA-LP"},
                        {"model_parameters", "pop_size=400"},
                        {"cost", "50500"},
                        {"time_sec", "1400"},
                        {"source", "user"}};
    ingest_feedback(store, &index, r, ClusterConfig::defaults());
    if (store.stats().max_num_facilities != 50) return "max did not move to 50";

    auto snap = store.snapshot();
    auto q = query(*snap, 50, {"min material handling cost"}, {"aspect ratio"});
    auto d = retrieve_evidence(*snap, &index, q, {});
    bool found = std::any_of(d.graph_rows.begin(), d.graph_rows.end(),
                             [](const GraphEvidenceRow& row) { return row.problem_id == "U_50"; });
    if (!found) return "new record missing from graph evidence";
    if (d.used_fallback) return "query fell back";
    return {};
}

std::string vector_oracle() {
    std::mt19937_64 rng(4242);
    std::vector<std::string> words = {"cost", "layout", "aisle", "crane", "dock", "ratio", "area", "bay", "flow",
                                      "slicing", "tree", "weld", "paint", "buffer", "robot", "cell", "zone",
                                      "adjacency", "closeness", "distance", "shape", "fixed", "open", "row"};
    auto random_text = [&] {
        std::uniform_int_distribution<std::size_t> len(1, 8), pick(0, words.size() - 1);
        std::string t;
        for (auto i = len(rng); i > 0; --i) t += words[pick(rng)] + " ";
        return t;
    };
    // 200 problems whose descriptions carry random objective text.
    std::vector<CorpusRow> rows;
    for (int i = 0; i < 200; ++i) {
        CorpusRow r;
        r.problem_id = "V_" + std::to_string(i);
        r.num_facilities = 5 + i % 40;
        r.floor_w = r.floor_h = 10;
        r.objective = random_text();
        r.method = "GA";
        r.cost = 1;
        r.time_sec = 1;
        rows.push_back(r);
    }
    GraphStore store;
    load_corpus(store, rows, ClusterConfig::defaults());
    MockEmbeddingProvider provider;
    EmbeddingIndex index(store, provider);
    index.index_all();
    auto snap = store.snapshot();

    std::vector<std::pair<std::string, std::vector<double>>> vectors;
    for (auto id : snap->nodes_with_label(NodeLabel::Problem))
        vectors.emplace_back(snap->node(id).key, *snap->node(id).get_vector(prop::kEmbedding));

    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        auto text = random_text();
        auto qv = MockEmbeddingProvider().embed(text);
        std::vector<std::pair<double, std::string>> want;
        for (const auto& [key, v] : vectors) want.emplace_back(testing::oracle_cosine(qv, v), key);
        std::sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
            auto ka = std::llround(a.first * 1e12), kb = std::llround(b.first * 1e12);
            if (ka != kb) return ka > kb;
            return a.second < b.second;
        });
        auto got = index.similarity_search(text, 10);
        for (std::size_t i = 0; i < got.size(); ++i)
            if (got[i].problem_id != want[i].second || std::abs(got[i].similarity - want[i].first) > 1e-9)
                ++mismatches;
    }
    if (mismatches) return std::to_string(mismatches) + " ranked entries differ from brute force";

    for (auto id : snap->nodes_with_label(NodeLabel::Problem)) {
        const auto* description = snap->node(id).get_string(prop::kDescription);
        auto top = index.similarity_search(*description, 1);
        if (std::abs(top.front().similarity - 1.0) > 1e-9) return "self-query similarity is not 1";
    }
    return {};
}

std::string grounding() {
    GraphStore store;
    load_corpus(store, testing::seed_rows(), ClusterConfig::defaults());
    auto snap = store.snapshot();
    auto catalog = snap->catalog_names(NodeLabel::Method);
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        std::vector<CorpusRow> seed = testing::seed_rows();
        auto q = query(*snap, seed[rng() % seed.size()].num_facilities, {}, {});
        auto dossier = retrieve_evidence(*snap, nullptr, q, {});
        auto evidence = dossier.evidence_methods();
        for (const auto& m : catalog) {
            if (std::find(evidence.begin(), evidence.end(), m) != evidence.end()) continue;
            auto bad = "RECOMMENDATION: " + m + "\nREASONING: it is popular.";
            auto parsed = parse_response(bad, dossier);
            if (parsed.grounded) return m + " accepted as grounded";

            auto llm = ScriptedLlmProvider::constant(bad);
            Recommender rec(store, nullptr, llm, fast());
            auto result = rec.recommend(*snap, q);
            if (llm.call_count() != 2) return "expected exactly one corrective retry, saw " +
                                              std::to_string(llm.call_count()) + " calls";
            if (result.recommendation.grounded || !result.corrective_retry) return "retry bookkeeping wrong";
            ++checked;
        }
    }
    if (checked == 0) return "no non-dossier method was exercised";
    return {};
}

std::string snapshot_round_trip() {
    std::mt19937_64 rng(99);
    auto path = std::filesystem::temp_directory_path() / "flpadv_acceptance.snapshot";
    for (int round = 0; round < 10; ++round) {
        GraphStore store;
        auto rows = testing::random_corpus(rng, 40);
        if (round == 0) rows = testing::seed_rows();
        load_corpus(store, rows, ClusterConfig::defaults());
        MockEmbeddingProvider embedder(32 + 8 * round);
        EmbeddingIndex(store, embedder).index_all();
        auto before = store.snapshot();
        before->snapshot_save(path);
        auto after = Graph::snapshot_load(path);
        if (!(after.stats() == before->stats())) return "stats differ";
        if (after.node_count() != before->node_count() || after.edge_count() != before->edge_count())
            return "counts differ";
        for (const auto& node : before->nodes()) {
            auto id = after.find(node.label, node.key);
            if (!id) return "node " + node.key + " lost";
            if (after.node(*id).properties != node.properties) return "properties of " + node.key + " differ";
        }
        for (const auto& e : before->edges()) {
            auto from = after.find(before->node(e.from).label, before->node(e.from).key);
            auto to = after.find(before->node(e.to).label, before->node(e.to).key);
            auto targets = after.targets(*from, e.type);
            if (std::find(targets.begin(), targets.end(), *to) == targets.end()) return "edge lost";
        }
        if (after.serialize() != before->serialize()) return "canonical serialization differs";
    }
    std::filesystem::remove(path);
    return {};
}

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"ranking oracle equivalence", ranking_oracle},
        {"facility window", facility_window},
        {"fallback trigger truth table", fallback_truth_table},
        {"multi-objective preference", multi_objective},
        {"benchmark fixture suite", benchmark_suite},
        {"merge idempotence and path equivalence", idempotence_and_paths},
        {"learning loop closure", learning_loop},
        {"vector search oracle", vector_oracle},
        {"grounding guarantee", grounding},
        {"snapshot round-trip", snapshot_round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        std::string problem;
        try {
            problem = check();
        } catch (const std::exception& e) {
            problem = std::string("exception: ") + e.what();
        }
        if (problem.empty()) {
            std::printf("PASS %s\n", name);
        } else {
            std::printf("FAIL %s: %s\n", name, problem.c_str());
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
