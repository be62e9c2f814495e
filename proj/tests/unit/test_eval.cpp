#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flpadv/error.hpp"
#include "flpadv/eval.hpp"
#include "synthetic.hpp"

using namespace flpadv;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Seeded {
    GraphStore store;
    MockEmbeddingProvider embedder;
    EmbeddingIndex index{store, embedder};

    Seeded() {
        load_corpus(store, testing::seed_rows(), ClusterConfig::defaults());
        index.index_all();
    }
};

RecommenderConfig fast() {
    RecommenderConfig c;
    c.backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST_CASE("accuracy is set intersection on canonical names") {
    using V = std::vector<std::string>;
    CHECK(score_accuracy(V{"CRO-SL", "BRKGA"}, V{"CRO-SL"}) == 1);
    CHECK(score_accuracy(V{"ACO-FBS"}, V{"HSA"}) == 0);
    CHECK(score_accuracy(V{"GA"}, V{"GA"}) == 1);
    CHECK(score_accuracy(V{"construction  heuristic"}, V{"Construction Heuristic"}) == 1);
    CHECK(score_accuracy(V{"GA", "GA", "SA"}, V{"SA"}) == score_accuracy(V{"SA", "GA"}, V{"SA", "SA"}));
}

TEST_CASE("case file parsing") {
    auto cases = load_cases(testing::cases_path());
    REQUIRE(cases.size() == 5);
    CHECK(cases[0].query.num_facilities == 10);
    CHECK(cases[2].ground_truth == std::vector<std::string>{"BRKGA-LP", "GA-LP"});
    CHECK(cases[4].query.objectives.empty());
    CHECK(cases[4].query.constraints.empty());

    CHECK_THROWS_AS(parse_cases(json::object()), FormatError);
    CHECK_THROWS_AS(parse_cases(json::parse(R"([{"id": "x", "query": {}, "ground_truth": []}])")), FormatError);
    CHECK_THROWS_AS(parse_cases(json::parse(R"([{"id": "x", "query": {"num_facilities": "ten"}, "ground_truth": ["GA"]}])")),
                    FormatError);
    CHECK_THROWS_AS(load_cases("/nonexistent/cases.json"), IoError);
}

TEST_CASE("judge prompt carries the rubric verbatim") {
    auto p = judge_prompt("RECOMMENDATION: GA", "D_10 shows GA", "- problem_id=D_10 | method=GA\n");
    CHECK(p.find("## RUBRIC") != std::string::npos);
    CHECK(p.find(std::string(kReasoningRubric)) != std::string::npos);
    CHECK(p.find("Irrelevant or ambiguous explanation.") != std::string::npos);
    CHECK(p.find("Combines several correct, cited evidence points to construct a firm, evidence-based conclusion.") !=
          std::string::npos);
}

TEST_CASE("judge score parsing") {
    CHECK(parse_judge_score("5") == 5);
    CHECK(parse_judge_score("Score: 3/5") == 3);
    CHECK(parse_judge_score("I give it a 4.") == 4);
    CHECK_FALSE(parse_judge_score("excellent"));
    CHECK_FALSE(parse_judge_score("10 out of 10"));
    CHECK_FALSE(parse_judge_score("4.5"));
    CHECK_FALSE(parse_judge_score("0"));
    CHECK(parse_judge_score("step2 then 2") == 2);
}

TEST_CASE("judge retries once then gives up") {
    auto five = ScriptedLlmProvider::constant("5");
    CHECK(judge_reasoning(five, "r", "x", "") == 5);

    auto late = ScriptedLlmProvider::sequence({"excellent", "4"});
    CHECK(judge_reasoning(late, "r", "x", "") == 4);
    CHECK(late.call_count() == 2);

    auto never = ScriptedLlmProvider::constant("excellent");
    CHECK_THROWS_AS(judge_reasoning(never, "r", "x", ""), MalformedResponse);
    CHECK(never.call_count() == 2);
}

TEST_CASE("rubric mock judge levels") {
    RubricMockJudge judge;
    std::string summary = "- problem_id=D_10 | method=GA\n- problem_id=P_8 | method=CRO-SL\n";
    CHECK(judge_reasoning(judge, "r", "D_10 and P_8 both favour it", summary) == 5);
    CHECK(judge_reasoning(judge, "r", "D_10 favours it", summary) == 4);
    CHECK(judge_reasoning(judge, "r", "costs near 1200 suggest it", summary) == 4);
    CHECK(judge_reasoning(judge, "r", "this method is widely used for layouts of this general kind", summary) == 3);
    CHECK(judge_reasoning(judge, "r", "it is good", summary) == 2);
    CHECK(judge_reasoning(judge, "r", "", summary) == 1);
}

TEST_CASE("benchmark suite with the full pipeline") {
    Seeded s;
    EvidenceMockLlm llm;
    RubricMockJudge judge;
    Recommender rec(s.store, &s.index, llm, fast());
    auto cases = load_cases(testing::cases_path());
    for (bool parallel : {false, true}) {
        auto report = run_kgrag_suite(cases, rec, s.store, judge, {parallel});
        REQUIRE(report.cases.size() == 5);
        CHECK(report.accuracy_fraction == 1.0);
        CHECK(report.mean_reasoning == 5.0);
        for (const auto& c : report.cases) {
            CHECK(c.grounded);
            CHECK_FALSE(c.error);
        }
        CHECK(report.cases[3].methods.front() == "BRKGA-LP");
        CHECK(report.cases[4].methods.front() == "Construction Heuristic");
    }
    auto a = to_json(run_kgrag_suite(cases, rec, s.store, judge));
    auto b = to_json(run_kgrag_suite(cases, rec, s.store, judge));
    CHECK(a == b);
}

TEST_CASE("baseline suite reproduces one hit in five") {
    auto cases = load_cases(testing::cases_path());
    auto csv = read_file(testing::seed_csv_path());
    auto llm = ScriptedLlmProvider::sequence({
        "RECOMMENDATION: ACO-FBS\nREASONING: it appears often in the dataset.",
        "RECOMMENDATION: ACO-FBS\nREASONING: it appears often in the dataset.",
        "RECOMMENDATION: BRKGA-LP\nREASONING: it appears often in the dataset.",
        "RECOMMENDATION: ACO-FBS\nREASONING: it appears often in the dataset.",
        "RECOMMENDATION: PROP1\nREASONING: it appears often in the dataset.",
    });
    RubricMockJudge judge;
    auto report = run_baseline_suite(cases, csv, llm, judge);
    REQUIRE(report.cases.size() == 5);
    CHECK(report.accuracy_fraction == Catch::Approx(0.2));
    CHECK(report.cases[2].accuracy_bit == 1);
    CHECK(report.mean_reasoning == 2.0);

    auto prompts = llm.prompts();
    REQUIRE(prompts.size() == 5);
    CHECK(prompts[0].find("## DATASET\n" + csv) != std::string::npos);
    CHECK(prompts[0].find("RECOMMENDATION:") != std::string::npos);
}

TEST_CASE("baseline with the evidence mock answers the majority method") {
    auto cases = load_cases(testing::cases_path());
    auto csv = read_file(testing::seed_csv_path());
    EvidenceMockLlm llm;
    RubricMockJudge judge;
    auto report = run_baseline_suite(cases, csv, llm, judge);
    CHECK(report.accuracy_fraction < 1.0);
    for (const auto& c : report.cases) CHECK_FALSE(c.error);
}

TEST_CASE("suite records per-case errors and keeps going") {
    Seeded s;
    auto llm = ScriptedLlmProvider::constant("no idea");
    RubricMockJudge judge;
    Recommender rec(s.store, nullptr, llm, fast());
    auto cases = load_cases(testing::cases_path());
    cases[1].query.objectives = {"not an objective"};
    auto report = run_kgrag_suite(cases, rec, s.store, judge);
    REQUIRE(report.cases.size() == 5);
    for (const auto& c : report.cases) CHECK(c.error);
    CHECK(report.accuracy_fraction == 0);
    CHECK(report.scored_cases == 0);
    CHECK(report.mean_reasoning == 0);
}

TEST_CASE("empty case list") {
    Seeded s;
    EvidenceMockLlm llm;
    RubricMockJudge judge;
    Recommender rec(s.store, nullptr, llm, fast());
    auto report = run_kgrag_suite({}, rec, s.store, judge);
    CHECK(report.cases.empty());
    CHECK(report.accuracy_fraction == 0);
    CHECK(report.mean_reasoning == 0);
    CHECK(to_json(report)["cases"].empty());
    CHECK_FALSE(format_report_table(report).empty());
}

TEST_CASE("report path and table") {
    CHECK(report_path_for("/tmp/x/benchmark_cases.json") == std::filesystem::path("/tmp/x/benchmark_cases.report.json"));
    EvalReport r;
    r.cases.push_back({"1", {"GA"}, {"GA", "SA"}, 1, 5, true, std::nullopt});
    r.cases.push_back({"2", {"HSA"}, {}, 0, std::nullopt, false, std::string("provider down")});
    r.aggregate();
    CHECK(r.accuracy_fraction == 0.5);
    CHECK(r.mean_reasoning == 5.0);
    auto j = to_json(r);
    CHECK(j["aggregate"]["accuracy_fraction"] == 0.5);
    CHECK(j["cases"][1]["error"] == "provider down");
    auto table = format_report_table(r);
    CHECK(table.find("GA, SA") != std::string::npos);
}
