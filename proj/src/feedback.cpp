#include "flpadv/feedback.hpp"

#include "flpadv/error.hpp"

namespace flpadv {

std::variant<CorpusRow, std::vector<FieldError>> validate_feedback(const FeedbackRecord& record) {
    auto v = validate_record(record);
    if (!v.row) return std::move(v.errors);
    return normalize_row(*v.row);
}

FeedbackReport ingest_feedback(GraphStore& store, EmbeddingIndex* index, const FeedbackRecord& record,
                               const ClusterConfig& config) {
    auto checked = validate_feedback(record);
    if (auto* errors = std::get_if<std::vector<FieldError>>(&checked)) throw ValidationError(std::move(*errors));
    return ingest_feedback(store, index, std::get<CorpusRow>(checked), config);
}

FeedbackReport ingest_feedback(GraphStore& store, EmbeddingIndex* index, const CorpusRow& raw,
                               const ClusterConfig& config) {
    auto row = normalize_row(raw);
    auto effect = store.write([&](Graph& g) { return apply_row(g, row, 1, config); });

    FeedbackReport report;
    report.problem_id = row.problem_id;
    report.created_nodes = effect.created_nodes;
    report.linked_existing = effect.linked_existing;
    report.reclustered = effect.reclustered;
    if (index) report.embedded = index->index_problem(row.problem_id);
    return report;
}

}  // namespace flpadv
