#include "flpadv/recommender.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "flpadv/csv.hpp"
#include "flpadv/error.hpp"
#include "flpadv/ingestion.hpp"
#include "flpadv/text.hpp"

namespace flpadv {

namespace {

constexpr std::string_view kRecommendationHeader = "RECOMMENDATION:";
constexpr std::string_view kReasoningHeader = "REASONING:";

// Keeps one evidence item on one line and away from the field separator.
std::string clean(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\n' || c == '\r' || c == '\t') out.push_back(' ');
        else if (c == '|') out.push_back('/');
        else out.push_back(c);
    }
    return text::collapse_whitespace(out);
}

std::string list_or(const std::vector<std::string>& names, std::string_view empty) {
    return names.empty() ? std::string(empty) : clean(text::join(names, ", "));
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string canonical_method(std::string_view m) { return text::canonical_name(m); }

bool contains_method(const std::vector<std::string>& names, std::string_view m) {
    auto key = canonical_method(m);
    return std::any_of(names.begin(), names.end(),
                       [&](const std::string& n) { return canonical_method(n) == key; });
}

// Whole-word occurrences of `vocabulary` entries in `haystack`, longest name
// first at each position, deduplicated, in first-mention order.
std::vector<std::string> find_mentions(std::string_view haystack, std::vector<std::string> vocabulary) {
    std::sort(vocabulary.begin(), vocabulary.end(), [](const std::string& a, const std::string& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    std::vector<std::string> found;
    std::size_t i = 0;
    while (i < haystack.size()) {
        bool matched = false;
        for (const auto& name : vocabulary) {
            if (name.empty() || i + name.size() > haystack.size()) continue;
            if (!text::iequals(haystack.substr(i, name.size()), name)) continue;
            if (!text::at_word_boundary(haystack, i, name.size())) continue;
            if (!contains_method(found, name)) found.push_back(name);
            i += name.size();
            matched = true;
            break;
        }
        if (!matched) ++i;
    }
    return found;
}

std::optional<std::string> labelled_line(std::string_view section, std::string_view label) {
    auto pos = text::ifind(section, label);
    if (pos == std::string_view::npos) return std::nullopt;
    if (pos > 0 && section[pos - 1] != '\n' && section[pos - 1] != ' ') return std::nullopt;
    auto start = pos + label.size();
    auto end = section.find('\n', start);
    auto value = text::trim(section.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                                : end - start));
    if (value.empty()) return std::nullopt;
    return std::string(value);
}

}  // namespace

std::string compile_prompt(const EvidenceDossier& d) {
    std::ostringstream p;
    const auto& q = d.query_echo;

    p << "## ROLE\n"
         "You are a professional analyst who recommends optimization algorithms for facility layout "
         "problems. Use only the evidence given below. Do not rely on general knowledge and do not "
         "recommend any method that does not appear in the evidence. Combine the graph, vector and "
         "cluster evidence into one recommendation.\n\n";

    p << "## USER QUERY\n"
      << "num_facilities: " << (q.num_facilities ? std::to_string(*q.num_facilities) : "unspecified") << '\n'
      << "objectives: " << list_or(q.objectives, "none") << '\n'
      << "constraints: " << list_or(q.constraints, "none") << '\n'
      << "representation: " << (q.representation ? clean(*q.representation) : "unspecified") << '\n'
      << "free_text: " << (q.free_text ? clean(*q.free_text) : "(none)") << "\n\n";

    p << "## GRAPH EVIDENCE\n";
    if (d.used_fallback)
        p << "Note: no stored problem lies within 25% of the requested size; rows come from the "
             "largest known problems (top quartile, large scale cluster).\n";
    if (d.graph_rows.empty()) p << "(none)\n";
    for (std::size_t i = 0; i < d.graph_rows.size(); ++i) {
        const auto& r = d.graph_rows[i];
        p << "- [G" << i + 1 << "] problem_id=" << clean(r.problem_id)
          << " | num_facilities=" << r.num_facilities
          << " | objectives=" << list_or(r.objective_names, "none")
          << " | constraints=" << list_or(r.constraint_names, "none")
          << " | representation=" << (r.representation.empty() ? "unspecified" : clean(r.representation))
          << " | constraint_handling="
          << (r.constraint_handling.empty() ? "unspecified" : clean(r.constraint_handling))
          << " | method=" << clean(r.method)
          << " | model_parameters=" << (r.model_parameters.empty() ? "none" : clean(r.model_parameters))
          << " | cost=" << text::format_real(r.cost)
          << " | time_sec=" << text::format_real(r.time_sec)
          << " | source=" << (r.source.empty() ? "unknown" : clean(r.source))
          << " | objective_score=" << r.objective_score
          << " | constraint_score=" << r.constraint_score
          << " | facility_distance=" << r.facility_distance << '\n';
    }
    p << '\n';

    p << "## VECTOR EVIDENCE\n";
    if (d.vector_matches.empty()) p << "(none)\n";
    for (std::size_t i = 0; i < d.vector_matches.size(); ++i) {
        const auto& v = d.vector_matches[i];
        p << "- [V" << i + 1 << "] problem_id=" << clean(v.match.problem_id)
          << " | similarity=" << fixed4(v.match.similarity)
          << " | methods=" << list_or(v.methods, "none")
          << " | description=" << clean(v.match.description_text) << '\n';
    }
    p << '\n';

    p << "## CLUSTER TRENDS\n";
    if (d.trends.empty()) p << "(none)\n";
    for (std::size_t i = 0; i < d.trends.size(); ++i) {
        const auto& t = d.trends[i];
        p << "- [T" << i + 1 << "] cluster=" << t.cluster_kind << ':' << clean(t.cluster_label);
        for (const auto& e : t.entries)
            p << " | method=" << clean(e.method) << " count=" << e.count
              << " mean_cost=" << text::format_real(e.mean_cost);
        p << '\n';
    }
    p << '\n';

    p << "## OUTPUT FORMAT\n"
         "Answer with exactly two sections and nothing else:\n"
         "RECOMMENDATION: ranked, comma-separated method names taken from the evidence, followed by "
         "suggested model parameters, representation and constraint handling.\n"
         "REASONING: a data-driven explanation that cites problem ids, costs, times and cluster "
         "trends from the evidence.\n";
    return p.str();
}

std::string corrective_prompt(const std::string& prompt, const std::vector<std::string>& rejected) {
    std::string out = prompt + "\n## CORRECTION\n";
    if (rejected.empty()) {
        out += "Your previous answer did not follow the output format. ";
    } else {
        out += "Your previous answer named methods that do not appear in the evidence: " +
               text::join(rejected, ", ") + ". ";
    }
    out += "Answer again and name only methods from the evidence above.\n";
    return out;
}

Recommendation parse_response(std::string_view raw, const EvidenceDossier& dossier) {
    auto rec_pos = text::ifind(raw, kRecommendationHeader);
    auto reason_pos = text::ifind(raw, kReasoningHeader);
    if (rec_pos == std::string_view::npos) throw MalformedResponse("response has no RECOMMENDATION: section");
    if (reason_pos == std::string_view::npos) throw MalformedResponse("response has no REASONING: section");

    auto rec_start = rec_pos + kRecommendationHeader.size();
    auto reason_start = reason_pos + kReasoningHeader.size();
    std::string_view rec_section = rec_pos < reason_pos ? raw.substr(rec_start, reason_pos - rec_start)
                                                        : raw.substr(rec_start);
    std::string_view reasoning = reason_pos > rec_pos ? raw.substr(reason_start)
                                                      : raw.substr(reason_start, rec_pos - reason_start);

    Recommendation rec;
    rec.recommendation_text = std::string(text::trim(rec_section));
    rec.reasoning = std::string(text::trim(reasoning));
    if (rec.reasoning.empty()) throw MalformedResponse("REASONING: section is empty");

    auto evidence = dossier.evidence_methods();
    auto vocabulary = dossier.method_catalog;
    for (const auto& m : evidence)
        if (!contains_method(vocabulary, m)) vocabulary.push_back(m);

    rec.methods = find_mentions(rec_section, vocabulary);
    if (rec.methods.empty()) throw MalformedResponse("recommendation names no known method");

    for (const auto& m : rec.methods)
        if (!contains_method(evidence, m)) rec.ungrounded_methods.push_back(m);
    rec.grounded = rec.ungrounded_methods.empty();

    for (const auto& m : rec.methods) {
        auto row = std::find_if(dossier.graph_rows.begin(), dossier.graph_rows.end(),
                                [&](const GraphEvidenceRow& r) { return text::iequals(r.method, m); });
        if (row != dossier.graph_rows.end())
            rec.model_parameters.push_back({m, row->model_parameters, row->problem_id});
    }

    rec.representation = labelled_line(rec_section, "representation:");
    rec.constraint_handling = labelled_line(rec_section, "constraint handling:");
    auto top = std::find_if(dossier.graph_rows.begin(), dossier.graph_rows.end(),
                            [&](const GraphEvidenceRow& r) { return text::iequals(r.method, rec.methods.front()); });
    if (top != dossier.graph_rows.end()) {
        if (!rec.representation && !top->representation.empty()) rec.representation = top->representation;
        if (!rec.constraint_handling && !top->constraint_handling.empty())
            rec.constraint_handling = top->constraint_handling;
    }

    std::vector<std::pair<std::size_t, std::string>> cited;
    for (const auto& id : dossier.evidence_problem_ids()) {
        for (auto pos = raw.find(id); pos != std::string_view::npos; pos = raw.find(id, pos + 1)) {
            if (text::at_word_boundary(raw, pos, id.size())) {
                cited.emplace_back(pos, id);
                break;
            }
        }
    }
    std::sort(cited.begin(), cited.end());
    for (auto& [pos, id] : cited) rec.cited_problem_ids.push_back(std::move(id));
    return rec;
}

std::string format_recommendation(const Recommendation& r) {
    return std::string(kRecommendationHeader) + " " + text::join(r.methods, ", ") + "\n" +
           std::string(kReasoningHeader) + " " + r.reasoning + "\n";
}

// EvidenceMockLlm

namespace {

struct PromptEvidence {
    struct Row {
        std::map<std::string, std::string> fields;
    };
    std::vector<Row> graph;
    std::vector<Row> vector;
    std::vector<std::pair<std::string, std::vector<TrendEntry>>> trends;
    std::string dataset_csv;
};

std::map<std::string, std::string> split_fields(std::string_view line) {
    std::map<std::string, std::string> fields;
    auto close = line.find("] ");
    if (close != std::string_view::npos) line.remove_prefix(close + 2);
    std::size_t start = 0;
    while (start <= line.size()) {
        auto sep = line.find(" | ", start);
        auto part = line.substr(start, sep == std::string_view::npos ? std::string_view::npos : sep - start);
        auto eq = part.find('=');
        if (eq != std::string_view::npos)
            fields.emplace(std::string(part.substr(0, eq)), std::string(part.substr(eq + 1)));
        if (sep == std::string_view::npos) break;
        start = sep + 3;
    }
    return fields;
}

PromptEvidence read_prompt(const std::string& prompt) {
    PromptEvidence ev;
    std::istringstream in(prompt);
    std::string line, section;
    while (std::getline(in, line)) {
        if (line.starts_with("## ")) {
            section = line.substr(3);
            continue;
        }
        if (section == "GRAPH EVIDENCE" && line.starts_with("- [G")) {
            ev.graph.push_back({split_fields(line)});
        } else if (section == "VECTOR EVIDENCE" && line.starts_with("- [V")) {
            ev.vector.push_back({split_fields(line)});
        } else if (section == "CLUSTER TRENDS" && line.starts_with("- [T")) {
            std::vector<TrendEntry> entries;
            std::string label;
            std::string_view rest(line);
            for (const auto& part : text::split(rest, '|')) {
                auto p = std::string(text::trim(part));
                auto m = p.find("method=");
                auto c = p.find(" count=");
                auto mc = p.find(" mean_cost=");
                if (m == 0 && c != std::string::npos && mc != std::string::npos) {
                    TrendEntry e;
                    e.method = p.substr(7, c - 7);
                    e.count = static_cast<std::size_t>(text::parse_int(p.substr(c + 7, mc - c - 7)).value_or(0));
                    e.mean_cost = text::parse_real(p.substr(mc + 11)).value_or(0);
                    entries.push_back(std::move(e));
                } else if (auto cl = p.find("cluster="); cl != std::string::npos) {
                    label = p.substr(cl + 8);
                }
            }
            ev.trends.emplace_back(label, std::move(entries));
        } else if (section.starts_with("DATASET")) {
            ev.dataset_csv += line + "\n";
        }
    }
    return ev;
}

std::string dataset_answer(const std::string& csv_text) {
    std::vector<csv::Record> records;
    try {
        records = csv::parse(csv_text);
    } catch (const Error&) {
        return "RECOMMENDATION: none\nREASONING: The dataset could not be read.\n";
    }
    if (records.empty()) return "RECOMMENDATION: none\nREASONING: The dataset is empty.\n";
    std::size_t method_col = records.front().fields.size();
    for (std::size_t i = 0; i < records.front().fields.size(); ++i)
        if (normalize_header(records.front().fields[i]) == "method") method_col = i;
    std::vector<std::pair<std::string, std::size_t>> counts;
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (method_col >= records[r].fields.size()) continue;
        auto m = text::collapse_whitespace(records[r].fields[method_col]);
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == m; });
        if (it == counts.end()) counts.emplace_back(m, 1);
        else ++it->second;
    }
    if (counts.empty()) return "RECOMMENDATION: none\nREASONING: The dataset lists no methods.\n";
    auto best = std::max_element(counts.begin(), counts.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    return "RECOMMENDATION: " + best->first + "\nREASONING: " + best->first + " is the most frequent method in the dataset (" +
           std::to_string(best->second) + " of " + std::to_string(records.size() - 1) + " rows).\n";
}

}  // namespace

std::string EvidenceMockLlm::complete(const std::string& prompt) {
    auto ev = read_prompt(prompt);
    if (ev.graph.empty() && ev.vector.empty() && ev.trends.empty() && !ev.dataset_csv.empty())
        return dataset_answer(ev.dataset_csv);

    std::vector<std::string> chosen;
    auto offer = [&](const std::string& m) {
        if (chosen.size() < 2 && !m.empty() && !contains_method(chosen, m)) chosen.push_back(m);
    };
    for (const auto& row : ev.graph) offer(row.fields.count("method") ? row.fields.at("method") : "");
    for (const auto& [label, entries] : ev.trends)
        for (const auto& e : entries) offer(e.method);
    for (const auto& row : ev.vector) {
        if (!row.fields.count("methods") || row.fields.at("methods") == "none") continue;
        for (const auto& m : text::split(row.fields.at("methods"), ',')) offer(text::collapse_whitespace(m));
    }
    if (chosen.empty()) return "RECOMMENDATION: none\nREASONING: The evidence contains no precedent.\n";

    std::string reasoning;
    // Up to two precedents per chosen method, from different problems.
    for (const auto& m : chosen) {
        std::vector<std::string> cited;
        for (const auto& row : ev.graph) {
            const auto& f = row.fields;
            if (cited.size() == 2 || !f.count("method") || !text::iequals(f.at("method"), m)) continue;
            if (std::find(cited.begin(), cited.end(), f.at("problem_id")) != cited.end()) continue;
            cited.push_back(f.at("problem_id"));
            reasoning += f.at("problem_id") + " (" + f.at("num_facilities") + " facilities) was solved by " + m +
                         " at cost " + f.at("cost") + " in " + f.at("time_sec") + " s, matching " +
                         f.at("objective_score") + " objective(s) and " + f.at("constraint_score") +
                         " constraint(s). ";
        }
    }
    for (const auto& [label, entries] : ev.trends) {
        if (entries.empty()) continue;
        reasoning += "In cluster " + label + ", " + entries.front().method + " is the most common method (" +
                     std::to_string(entries.front().count) + " solutions, mean cost " +
                     text::format_real(entries.front().mean_cost) + "). ";
    }
    for (const auto& row : ev.vector) {
        reasoning += "Similar problem " + row.fields.at("problem_id") + " has similarity " +
                     row.fields.at("similarity") + ". ";
        break;
    }
    return "RECOMMENDATION: " + text::join(chosen, ", ") + "\nREASONING: " +
           std::string(text::trim(reasoning)) + "\n";
}

// Recommender

std::string Recommender::complete_with_retries(const std::string& prompt) const {
    auto delay = config_.backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        try {
            return llm_.complete(prompt);
        } catch (const ProviderError& e) {
            last_error = e.what();
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw ProviderError("LLM provider failed after " + std::to_string(config_.transport_retries + 1) +
                        " attempts: " + last_error);
}

RecommendResult Recommender::recommend(const UserQuery& query) const {
    auto snapshot = store_.snapshot();
    return recommend(*snapshot, query);
}

RecommendResult Recommender::recommend(const Graph& snapshot, const UserQuery& query) const {
    RecommendResult result;
    result.dossier = retrieve_evidence(snapshot, index_, query, config_.retrieval);
    if (result.dossier.empty()) throw EmptyEvidence();
    result.warnings = result.dossier.warnings;

    const auto prompt = compile_prompt(result.dossier);
    auto raw = complete_with_retries(prompt);
    ++result.llm_calls;

    std::optional<Recommendation> parsed;
    try {
        parsed = parse_response(raw, result.dossier);
    } catch (const MalformedResponse&) {
    }

    if (!parsed || !parsed->grounded) {
        result.corrective_retry = true;
        auto rejected = parsed ? parsed->ungrounded_methods : std::vector<std::string>{};
        raw = complete_with_retries(corrective_prompt(prompt, rejected));
        ++result.llm_calls;
        parsed = parse_response(raw, result.dossier);
        if (!parsed->grounded)
            result.warnings.push_back("recommendation names methods outside the evidence: " +
                                      text::join(parsed->ungrounded_methods, ", "));
    }
    result.recommendation = std::move(*parsed);
    return result;
}

}  // namespace flpadv
