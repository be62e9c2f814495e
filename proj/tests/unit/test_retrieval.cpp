#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "flpadv/error.hpp"
#include "flpadv/retrieval.hpp"
#include "flpadv/text.hpp"
#include "synthetic.hpp"

using namespace flpadv;

namespace {

Graph seeded() {
    Graph g;
    load_corpus(g, testing::seed_rows(), ClusterConfig::defaults());
    return g;
}

CorpusRow row(std::string id, std::int64_t n, std::string objective, std::string constraints, std::string method,
              double cost) {
    CorpusRow r;
    r.problem_id = std::move(id);
    r.num_facilities = n;
    r.floor_w = r.floor_h = 10;
    r.objective = std::move(objective);
    r.constraints = std::move(constraints);
    r.method = std::move(method);
    r.cost = cost;
    r.time_sec = 1;
    return r;
}

Graph graph_of(const std::vector<CorpusRow>& rows) {
    Graph g;
    load_corpus(g, rows, ClusterConfig::defaults());
    return g;
}

std::vector<std::string> methods_of(const std::vector<GraphEvidenceRow>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) out.push_back(r.method);
    return out;
}

class FailingProvider : public EmbeddingProvider {
public:
    std::vector<double> embed(std::string_view) override { throw ProviderError("down"); }
    std::size_t dimension() const override { return 64; }
};

}  // namespace

TEST_CASE("normalize_query validates against the catalog") {
    auto g = seeded();
    QueryInput in;
    in.num_facilities = 10;
    in.objectives = {"  MIN material handling cost"};
    in.constraints = {"Non-Overlapping", "boundary constraints"};
    auto q = normalize_query(g, in);
    CHECK(q.objectives == std::vector<std::string>{"min material handling cost"});
    CHECK(q.constraints == std::vector<std::string>{"boundary constraints", "non-overlapping"});

    in.constraints = {"boundary constrains"};
    try {
        normalize_query(g, in);
        FAIL("expected UnknownEntity");
    } catch (const UnknownEntity& e) {
        CHECK(e.field() == "constraints");
        CHECK(e.name() == "boundary constrains");
        CHECK_FALSE(e.suggestions().empty());
        CHECK(std::find(e.suggestions().begin(), e.suggestions().end(), "boundary constraint") !=
              e.suggestions().end());
    }

    QueryInput bad;
    bad.num_facilities = 0;
    CHECK_THROWS_AS(normalize_query(g, bad), ValidationError);

    QueryInput none;
    none.num_facilities = 30;
    none.objectives = {"None"};
    none.constraints = {"none", ""};
    auto qn = normalize_query(g, none);
    CHECK(qn.objectives.empty());
    CHECK(qn.constraints.empty());
}

TEST_CASE("facility window boundaries") {
    auto [lo, hi] = facility_window(8);
    CHECK(lo == 6.0);
    CHECK(hi == 10.0);
    auto g = graph_of({row("A", 6, "", "", "GA", 1), row("B", 10, "", "", "SA", 1), row("C", 5, "", "", "PSO", 1),
                       row("D", 11, "", "", "HSA", 1)});
    UserQuery q;
    q.num_facilities = 8;
    auto r = graph_search(g, q, 10);
    std::vector<std::string> ids;
    for (const auto& x : r.rows) ids.push_back(x.problem_id);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{"A", "B"});
    CHECK(r.pre_limit_problem_ids == std::vector<std::string>{"A", "B"});
}

TEST_CASE("benchmark case 1 ranking on the seed store") {
    auto g = seeded();
    UserQuery q;
    q.num_facilities = 10;
    q.objectives = {"min material handling cost"};
    q.constraints = {"boundary constraints", "non-overlapping"};
    auto r = graph_search(g, q, kDefaultGraphLimit);
    REQUIRE(r.rows.size() == 5);
    CHECK(methods_of(r.rows) == std::vector<std::string>{"CRO-SL", "BRKGA", "GA", "CRO-SL", "ACO-FBS"});
    CHECK(r.rows[0].problem_id == "D_10");
    CHECK(r.rows[0].objective_score == 1);
    CHECK(r.rows[0].constraint_score == 2);
    CHECK(r.rows[0].facility_distance == 0);
    CHECK(r.rows[3].problem_id == "P_8");
    CHECK_FALSE(r.used_fallback);
}

TEST_CASE("multi-objective preference") {
    auto g = seeded();
    UserQuery q;
    q.num_facilities = 15;
    q.objectives = {"max closeness rating", "min material handling cost"};
    q.constraints = {"aspect ratio", "boundary constraints", "non-overlapping"};
    auto r = graph_search(g, q, kDefaultGraphLimit);
    REQUIRE_FALSE(r.rows.empty());
    CHECK(r.rows.front().method == "HSA");
    for (const auto& x : r.rows) CHECK(x.objective_names.size() >= 2);
    CHECK(r.pre_limit_problem_ids == std::vector<std::string>{"M_14", "M_15"});

    // without any multi-objective candidate the preference does nothing
    auto g2 = graph_of({row("S", 15, "min material handling cost", "", "GA", 1)});
    auto r2 = graph_search(g2, q, 5);
    REQUIRE(r2.rows.size() == 1);
    CHECK(r2.rows[0].problem_id == "S");
}

TEST_CASE("query without n has no facility filter") {
    auto g = seeded();
    UserQuery q;
    q.objectives = {"min total distance"};
    auto r = graph_search(g, q, 5);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].method == "Construction Heuristic");
    CHECK(r.rows[0].facility_distance == 0);
    auto trends = cluster_trends(g, r.pre_limit_problem_ids, q, ClusterConfig::defaults());
    REQUIRE(trends.size() == 1);
    CHECK(trends[0].cluster_kind == "objective");
}

TEST_CASE("fallback truth table") {
    for (bool empty : {false, true})
        for (bool has_n : {false, true})
            for (std::int64_t n : {10, 48, 60}) {
                std::optional<std::int64_t> qn = has_n ? std::optional<std::int64_t>(n) : std::nullopt;
                bool expected = empty && has_n && n > 48;
                CHECK(fallback_triggered(empty, qn, 48) == expected);
            }
}

TEST_CASE("fallback search returns top-quartile large problems") {
    auto g = seeded();
    auto stats = g.stats();
    CHECK(stats.max_num_facilities == 48);
    CHECK(stats.facility_top_quartile == 30);

    UserQuery q;
    q.num_facilities = 200;
    q.objectives = {"min material handling cost"};
    auto r = search_with_fallback(g, q, 5, ClusterConfig::defaults());
    CHECK(r.used_fallback);
    REQUIRE_FALSE(r.rows.empty());
    for (const auto& x : r.rows) {
        CHECK(x.num_facilities >= stats.facility_top_quartile);
        CHECK(x.num_facilities > 35);
    }
    CHECK(r.pre_limit_problem_ids == std::vector<std::string>{"L_42", "L_48"});
    CHECK(r.rows.front().problem_id == "L_42");  // matches the objective

    // empty result with n within range: no fallback
    UserQuery within;
    within.num_facilities = 48;
    within.objectives = {"min total distance"};
    auto r2 = search_with_fallback(g, within, 5, ClusterConfig::defaults());
    CHECK(r2.rows.empty());
    CHECK_FALSE(r2.used_fallback);
}

TEST_CASE("graph search matches the brute-force oracle") {
    std::mt19937_64 rng(101);
    int mismatches = 0;
    for (int store = 0; store < 60; ++store) {
        auto rows = testing::random_corpus(rng, 50);
        auto g = graph_of(rows);
        for (int k = 0; k < 10; ++k) {
            auto q = testing::random_query(rng, rows);
            auto got = graph_search(g, q, 5);
            auto want = testing::oracle_graph_search(rows, q, 5);
            std::vector<testing::OracleRow> got_rows;
            for (const auto& r : got.rows) got_rows.push_back(testing::to_oracle_row(r));
            if (got_rows != want.rows || got.pre_limit_problem_ids != want.candidate_ids) ++mismatches;
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("trends match a brute-force group-by") {
    std::mt19937_64 rng(202);
    auto config = ClusterConfig::defaults();
    for (int store = 0; store < 40; ++store) {
        auto rows = testing::random_corpus(rng, 40);
        auto g = graph_of(rows);
        auto q = testing::random_query(rng, rows);
        auto search = graph_search(g, q, 5);
        auto trends = cluster_trends(g, search.pre_limit_problem_ids, q, config);
        auto want = testing::oracle_trends(rows, search.pre_limit_problem_ids, q, config.small_max, config.medium_max);
        REQUIRE(trends.size() == want.size());
        for (std::size_t i = 0; i < trends.size(); ++i) {
            CHECK(trends[i].cluster_kind == want[i].kind);
            CHECK(trends[i].cluster_label == want[i].label);
            REQUIRE(trends[i].entries.size() == want[i].top.size());
            for (std::size_t j = 0; j < want[i].top.size(); ++j) {
                CHECK(text::canonical_name(trends[i].entries[j].method) == want[i].top[j].first);
                CHECK(trends[i].entries[j].count == want[i].top[j].second);
            }
        }
    }
}

TEST_CASE("trend mean cost") {
    auto g = graph_of({row("A", 10, "o", "", "GA", 100), row("B", 12, "o", "", "GA", 300),
                       row("C", 11, "o", "", "SA", 50)});
    UserQuery q;
    q.num_facilities = 10;
    auto r = graph_search(g, q, 5);
    auto t = cluster_trends(g, r.pre_limit_problem_ids, q, ClusterConfig::defaults());
    REQUIRE(t.size() == 2);
    CHECK(t[0].cluster_kind == "scale");
    CHECK(t[0].cluster_label == "small");
    REQUIRE(t[0].entries.size() == 2);
    CHECK(t[0].entries[0].method == "GA");
    CHECK(t[0].entries[0].count == 2);
    CHECK(t[0].entries[0].mean_cost == 200);
    CHECK(t[1].cluster_label == "single-objective");
}

TEST_CASE("dossier assembly") {
    GraphStore store(seeded());
    MockEmbeddingProvider provider;
    EmbeddingIndex index(store, provider);
    index.index_all();
    auto snap = store.snapshot();

    UserQuery q;
    q.num_facilities = 10;
    q.objectives = {"min material handling cost"};
    q.free_text = "min material handling cost non-overlapping boundary constraints";
    auto d = retrieve_evidence(*snap, &index, q, {});
    CHECK_FALSE(d.graph_rows.empty());
    CHECK(d.vector_matches.size() == kDefaultVectorK);
    CHECK_FALSE(d.trends.empty());
    CHECK(d.query_echo == q);
    CHECK(d.warnings.empty());
    auto methods = d.evidence_methods();
    CHECK(std::find(methods.begin(), methods.end(), "CRO-SL") != methods.end());
    CHECK(d.method_catalog.size() == snap->nodes_with_label(NodeLabel::Method).size());

    // deterministic
    auto d2 = retrieve_evidence(*snap, &index, q, {});
    CHECK(d2.graph_rows == d.graph_rows);
    CHECK(d2.trends == d.trends);

    // no free text: vector channel skipped
    q.free_text.reset();
    CHECK(retrieve_evidence(*snap, &index, q, {}).vector_matches.empty());
}

TEST_CASE("vector failure degrades to a warning") {
    GraphStore store(seeded());
    MockEmbeddingProvider good;
    EmbeddingIndex(store, good).index_all();
    FailingProvider bad;
    EmbeddingIndex index(store, bad);
    UserQuery q;
    q.num_facilities = 10;
    q.free_text = "anything";
    auto d = retrieve_evidence(*store.snapshot(), &index, q, {});
    CHECK_FALSE(d.graph_rows.empty());
    CHECK_FALSE(d.trends.empty());
    CHECK(d.vector_matches.empty());
    REQUIRE(d.warnings.size() == 1);
    CHECK(d.warnings[0].find("vector") != std::string::npos);
}

TEST_CASE("fallback dossier carries a warning and trends") {
    auto g = seeded();
    UserQuery q;
    q.num_facilities = 100;
    auto d = retrieve_evidence(g, nullptr, q, {});
    CHECK(d.used_fallback);
    CHECK_FALSE(d.warnings.empty());
    REQUIRE_FALSE(d.trends.empty());
    CHECK(d.trends[0].cluster_label == "large");
}

TEST_CASE("suggestions share the longest prefix") {
    std::vector<std::string> catalog = {"aspect ratio", "area requirement", "boundary constraint",
                                        "boundary constraints", "non-overlapping"};
    auto s = suggest_names(catalog, "Boundary");
    CHECK(s == std::vector<std::string>{"boundary constraint", "boundary constraints"});
    auto a = suggest_names(catalog, "ar");
    CHECK(a == std::vector<std::string>{"area requirement"});
}
