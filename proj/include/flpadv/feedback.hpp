#pragma once
// User-submitted solved instances merged into the live store.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "flpadv/embedding.hpp"
#include "flpadv/graph_store.hpp"
#include "flpadv/ingestion.hpp"

namespace flpadv {

// Same shape as a corpus row.
using FeedbackRecord = RawRecord;

struct FeedbackReport {
    std::string problem_id;
    std::size_t created_nodes = 0;
    std::size_t linked_existing = 0;
    bool reclustered = false;
    bool embedded = false;
};

// Normalized row, or every failing field.
std::variant<CorpusRow, std::vector<FieldError>> validate_feedback(const FeedbackRecord& record);

// One record as one atomic write. A record is always its own batch, so its
// solution gets sequence 1. `index` may be null; otherwise the problem is
// (re-)embedded after the write when it has no vector. Throws
// ValidationError.
FeedbackReport ingest_feedback(GraphStore& store, EmbeddingIndex* index, const FeedbackRecord& record,
                               const ClusterConfig& config);
FeedbackReport ingest_feedback(GraphStore& store, EmbeddingIndex* index, const CorpusRow& row,
                               const ClusterConfig& config);

}  // namespace flpadv
