#include "flpadv/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "flpadv/error.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& what) {
    std::vector<std::string> out;
    if (j.is_null()) return out;
    if (j.is_string()) {
        out.push_back(j.get<std::string>());
        return out;
    }
    if (!j.is_array()) throw FormatError(what + " must be a list of strings");
    for (const auto& v : j) {
        if (!v.is_string()) throw FormatError(what + " must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

// "None" in a case file means "no selection".
std::vector<std::string> drop_none(std::vector<std::string> names) {
    std::erase_if(names, [](const std::string& n) {
        auto t = text::trim(n);
        return t.empty() || text::iequals(t, "none");
    });
    return names;
}

std::string section_after(std::string_view prompt, std::string_view header) {
    auto pos = prompt.find(header);
    if (pos == std::string_view::npos) return {};
    auto start = prompt.find('\n', pos);
    if (start == std::string_view::npos) return {};
    ++start;
    auto end = prompt.find("\n## ", start);
    return std::string(prompt.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

void write_query(std::ostream& p, const QueryInput& q) {
    p << "num_facilities: " << (q.num_facilities ? std::to_string(*q.num_facilities) : "unspecified") << '\n'
      << "objectives: " << (q.objectives.empty() ? "none" : text::join(q.objectives, ", ")) << '\n'
      << "constraints: " << (q.constraints.empty() ? "none" : text::join(q.constraints, ", ")) << '\n'
      << "representation: " << q.representation.value_or("unspecified") << '\n'
      << "free_text: " << q.free_text.value_or("(none)") << '\n';
}

CaseResult score_case(const TestCase& c, const Recommendation& rec, const EvidenceDossier& dossier,
                      LlmProvider& judge) {
    CaseResult r;
    r.id = c.id;
    r.ground_truth = c.ground_truth;
    r.methods = rec.methods;
    r.grounded = rec.grounded;
    r.accuracy_bit = score_accuracy(rec.methods, c.ground_truth);
    try {
        r.reasoning_score = judge_reasoning(judge, rec.recommendation_text, rec.reasoning, dossier_summary(dossier));
    } catch (const std::exception& e) {
        r.error = std::string("judge: ") + e.what();
    }
    return r;
}

CaseResult failed_case(const TestCase& c, const std::exception& e) {
    CaseResult r;
    r.id = c.id;
    r.ground_truth = c.ground_truth;
    r.error = e.what();
    return r;
}

}  // namespace

std::vector<TestCase> parse_cases(const nlohmann::json& json) {
    if (!json.is_array()) throw FormatError("cases file must hold a JSON list");
    std::vector<TestCase> cases;
    for (std::size_t i = 0; i < json.size(); ++i) {
        const auto& j = json[i];
        auto where = "case " + std::to_string(i + 1);
        if (!j.is_object()) throw FormatError(where + " is not an object");
        TestCase c;
        if (j.contains("id")) c.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        else c.id = std::to_string(i + 1);
        const auto& q = j.contains("query") ? j["query"] : nlohmann::json::object();
        if (!q.is_object()) throw FormatError(where + ": query must be an object");
        if (q.contains("num_facilities") && !q["num_facilities"].is_null()) {
            if (!q["num_facilities"].is_number_integer()) throw FormatError(where + ": num_facilities must be an integer");
            c.query.num_facilities = q["num_facilities"].get<std::int64_t>();
        }
        c.query.objectives = drop_none(string_list(q.value("objectives", nlohmann::json()), where + " objectives"));
        c.query.constraints = drop_none(string_list(q.value("constraints", nlohmann::json()), where + " constraints"));
        if (q.contains("representation") && q["representation"].is_string())
            c.query.representation = q["representation"].get<std::string>();
        if (q.contains("free_text") && q["free_text"].is_string())
            c.query.free_text = q["free_text"].get<std::string>();
        c.ground_truth = string_list(j.value("ground_truth", nlohmann::json()), where + " ground_truth");
        if (c.ground_truth.empty()) throw FormatError(where + ": ground_truth must not be empty");
        cases.push_back(std::move(c));
    }
    return cases;
}

std::vector<TestCase> load_cases(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read cases file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto json = nlohmann::json::parse(buf.str(), nullptr, false);
    if (json.is_discarded()) throw FormatError(path.string() + " is not valid JSON");
    return parse_cases(json);
}

int score_accuracy(std::span<const std::string> recommended, std::span<const std::string> ground_truth) {
    std::set<std::string> truth;
    for (const auto& g : ground_truth) truth.insert(text::canonical_name(g));
    for (const auto& m : recommended)
        if (truth.count(text::canonical_name(m))) return 1;
    return 0;
}

const std::string_view kReasoningRubric =
    "1 (Poor): Irrelevant or ambiguous explanation.\n"
    "2 (Weak): Plausible but not specific.\n"
    "3 (Acceptable): Reasonable but unsupported by cited evidence.\n"
    "4 (Good): Applies to some numbers, but the analysis is superficial.\n"
    "5 (Excellent): Combines several correct, cited evidence points to construct a firm, evidence-based "
    "conclusion.\n";

std::string dossier_summary(const EvidenceDossier& d) {
    std::ostringstream s;
    for (const auto& r : d.graph_rows)
        s << "- problem_id=" << r.problem_id << " | num_facilities=" << r.num_facilities
          << " | method=" << r.method << " | cost=" << text::format_real(r.cost)
          << " | time_sec=" << text::format_real(r.time_sec) << '\n';
    for (const auto& v : d.vector_matches) {
        char sim[32];
        std::snprintf(sim, sizeof(sim), "%.4f", v.match.similarity);
        s << "- problem_id=" << v.match.problem_id << " | similarity=" << sim
          << " | methods=" << text::join(v.methods, ", ") << '\n';
    }
    for (const auto& t : d.trends) {
        s << "- cluster=" << t.cluster_kind << ':' << t.cluster_label;
        for (const auto& e : t.entries) s << " | " << e.method << " x" << e.count;
        s << '\n';
    }
    auto out = s.str();
    return out.empty() ? "(none)\n" : out;
}

std::string judge_prompt(std::string_view recommendation_text, std::string_view reasoning,
                         std::string_view summary) {
    std::ostringstream p;
    p << "## ROLE\nYou are an impartial judge. Score how detailed, rich and verifiably evidence-based the "
         "reasoning below is.\n\n"
      << "## RUBRIC\n" << kReasoningRubric << '\n'
      << "## EVIDENCE SUMMARY\n" << summary;
    if (!summary.ends_with('\n')) p << '\n';
    p << "\n## RECOMMENDATION\n" << text::trim(recommendation_text) << "\n\n"
      << "## REASONING\n" << text::trim(reasoning) << "\n\n"
      << "## TASK\nReply with a single integer from 1 to 5.\n";
    return p.str();
}

std::optional<int> parse_judge_score(std::string_view response) {
    for (std::size_t i = 0; i < response.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(response[i]))) continue;
        std::size_t j = i;
        while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j]))) ++j;
        bool standalone = (i == 0 || !std::isalnum(static_cast<unsigned char>(response[i - 1]))) &&
                          (j == response.size() || !std::isalpha(static_cast<unsigned char>(response[j])));
        bool decimal = j < response.size() && response[j] == '.' && j + 1 < response.size() &&
                       std::isdigit(static_cast<unsigned char>(response[j + 1]));
        if (standalone && !decimal && j - i == 1 && response[i] >= '1' && response[i] <= '5')
            return response[i] - '0';
        if (decimal) {
            j += 1;
            while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j]))) ++j;
        }
        i = j;
    }
    return std::nullopt;
}

int judge_reasoning(LlmProvider& judge, std::string_view recommendation_text, std::string_view reasoning,
                    std::string_view summary) {
    auto prompt = judge_prompt(recommendation_text, reasoning, summary);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto response = judge.complete(prompt);
        if (auto score = parse_judge_score(response)) return *score;
        if (attempt == 0) prompt += "\nYour previous reply contained no score. Reply with one digit from 1 to 5.\n";
    }
    throw MalformedResponse("judge gave no score from 1 to 5");
}

std::string RubricMockJudge::complete(const std::string& prompt) {
    auto summary = section_after(prompt, "## EVIDENCE SUMMARY");
    auto reasoning = section_after(prompt, "## REASONING");

    std::set<std::string> ids;
    constexpr std::string_view key = "problem_id=";
    for (auto pos = summary.find(key); pos != std::string::npos; pos = summary.find(key, pos + 1)) {
        auto start = pos + key.size();
        auto end = summary.find_first_of(" \n", start);
        ids.insert(summary.substr(start, end - start));
    }
    std::size_t cited = 0;
    for (const auto& id : ids) {
        for (auto pos = reasoning.find(id); pos != std::string::npos; pos = reasoning.find(id, pos + 1)) {
            if (text::at_word_boundary(reasoning, pos, id.size())) {
                ++cited;
                break;
            }
        }
    }
    bool numbers = std::any_of(reasoning.begin(), reasoning.end(),
                               [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    auto words = text::split(text::collapse_whitespace(reasoning), ' ').size();

    int score = 1;
    if (cited >= 2) score = 5;
    else if (cited == 1 || numbers) score = 4;
    else if (words >= 10) score = 3;
    else if (!text::trim(reasoning).empty()) score = 2;
    return "Score: " + std::to_string(score);
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::KgRag ? "kgrag" : "baseline"; }

void EvalReport::aggregate() {
    accuracy_fraction = 0;
    mean_reasoning = 0;
    scored_cases = 0;
    if (cases.empty()) return;
    double bits = 0, scores = 0;
    for (const auto& c : cases) {
        bits += c.accuracy_bit;
        if (c.reasoning_score) {
            scores += *c.reasoning_score;
            ++scored_cases;
        }
    }
    accuracy_fraction = bits / static_cast<double>(cases.size());
    if (scored_cases) mean_reasoning = scores / static_cast<double>(scored_cases);
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : report.cases) {
        nlohmann::json j = {{"id", c.id},
                            {"ground_truth", c.ground_truth},
                            {"methods", c.methods},
                            {"accuracy_bit", c.accuracy_bit},
                            {"reasoning_score", c.reasoning_score ? nlohmann::json(*c.reasoning_score) : nlohmann::json()},
                            {"grounded", c.grounded}};
        if (c.error) j["error"] = *c.error;
        cases.push_back(std::move(j));
    }
    return {{"mode", std::string(to_string(report.mode))},
            {"cases", std::move(cases)},
            {"aggregate",
             {{"case_count", report.cases.size()},
              {"accuracy_fraction", report.accuracy_fraction},
              {"mean_reasoning", report.mean_reasoning},
              {"scored_cases", report.scored_cases}}}};
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "mode: " << to_string(report.mode) << '\n';
    out << "case | ground truth | recommended | acc | reasoning | grounded\n";
    for (const auto& c : report.cases) {
        out << c.id << " | " << text::join(c.ground_truth, ", ") << " | "
            << (c.methods.empty() ? "-" : text::join(c.methods, ", ")) << " | " << c.accuracy_bit << " | "
            << (c.reasoning_score ? std::to_string(*c.reasoning_score) : "-") << " | "
            << (c.grounded ? "yes" : "no");
        if (c.error) out << " | error: " << *c.error;
        out << '\n';
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "accuracy: %.2f (%zu cases), mean reasoning: %.2f\n", report.accuracy_fraction,
                  report.cases.size(), report.mean_reasoning);
    out << buf;
    return out.str();
}

std::filesystem::path report_path_for(const std::filesystem::path& cases_path) {
    auto out = cases_path;
    out.replace_filename(cases_path.stem().string() + ".report.json");
    return out;
}

EvalReport run_kgrag_suite(std::span<const TestCase> cases, const Recommender& recommender, GraphStore& store,
                           LlmProvider& judge, SuiteOptions options) {
    auto snapshot = store.snapshot();
    auto run_one = [&](const TestCase& c) -> CaseResult {
        try {
            auto query = normalize_query(*snapshot, c.query);
            auto result = recommender.recommend(*snapshot, query);
            return score_case(c, result.recommendation, result.dossier, judge);
        } catch (const std::exception& e) {
            return failed_case(c, e);
        }
    };

    EvalReport report;
    report.mode = EvalMode::KgRag;
    if (options.parallel) {
        std::vector<std::future<CaseResult>> futures;
        for (const auto& c : cases) futures.push_back(std::async(std::launch::async, run_one, std::cref(c)));
        for (auto& f : futures) report.cases.push_back(f.get());
    } else {
        for (const auto& c : cases) report.cases.push_back(run_one(c));
    }
    report.aggregate();
    return report;
}

std::string baseline_prompt(std::string_view corpus_csv, const QueryInput& query) {
    std::ostringstream p;
    p << "## ROLE\n"
         "You are a professional analyst who recommends optimization algorithms for facility layout "
         "problems. The dataset below lists solved problem instances. Base your answer on it.\n\n"
      << "## DATASET\n" << corpus_csv;
    if (!corpus_csv.ends_with('\n')) p << '\n';
    p << "\n## USER QUERY\n";
    write_query(p, query);
    p << "\n## OUTPUT FORMAT\n"
         "Answer with exactly two sections and nothing else:\n"
         "RECOMMENDATION: ranked, comma-separated method names, followed by suggested model parameters, "
         "representation and constraint handling.\n"
         "REASONING: a data-driven explanation that cites problem ids, costs and times.\n";
    return p.str();
}

EvidenceDossier baseline_dossier(std::span<const CorpusRow> rows, const QueryInput& query) {
    EvidenceDossier d;
    d.query_echo.num_facilities = query.num_facilities;
    d.query_echo.objectives = query.objectives;
    d.query_echo.constraints = query.constraints;
    d.query_echo.representation = query.representation;
    d.query_echo.free_text = query.free_text;
    for (const auto& raw : rows) {
        auto row = normalize_row(raw);
        GraphEvidenceRow g;
        g.problem_id = row.problem_id;
        g.num_facilities = row.num_facilities;
        g.objective_names = canonicalize_name_list(row.objective).names;
        g.constraint_names = canonicalize_name_list(row.constraints).names;
        g.representation = row.problem_representation;
        g.constraint_handling = row.constraint_handling;
        g.method = row.method;
        g.model_parameters = row.model_parameters;
        g.cost = row.cost;
        g.time_sec = row.time_sec;
        g.source = row.source;
        d.graph_rows.push_back(std::move(g));
        if (std::none_of(d.method_catalog.begin(), d.method_catalog.end(),
                         [&](const std::string& m) { return text::iequals(m, row.method); }))
            d.method_catalog.push_back(row.method);
    }
    return d;
}

EvalReport run_baseline_suite(std::span<const TestCase> cases, std::string_view corpus_csv, LlmProvider& llm,
                              LlmProvider& judge) {
    EvalReport report;
    report.mode = EvalMode::Baseline;
    std::vector<CorpusRow> rows;
    try {
        rows = parse_corpus(corpus_csv).rows;
    } catch (const std::exception& e) {
        for (const auto& c : cases) report.cases.push_back(failed_case(c, e));
        report.aggregate();
        return report;
    }
    for (const auto& c : cases) {
        try {
            auto dossier = baseline_dossier(rows, c.query);
            auto raw = llm.complete(baseline_prompt(corpus_csv, c.query));
            auto rec = parse_response(raw, dossier);
            report.cases.push_back(score_case(c, rec, dossier, judge));
        } catch (const std::exception& e) {
            report.cases.push_back(failed_case(c, e));
        }
    }
    report.aggregate();
    return report;
}

}  // namespace flpadv
