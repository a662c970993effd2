#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/sketch.hpp"

#include <optional>
#include <vector>

namespace streamgmm {

// Audit record of one chunk-cluster/base-cluster merge evaluation. For a
// rejected cluster the entropy fields describe the best candidate looked at
// (smallest delta_e1), or stay zero when the base set was empty.
struct MergeDecision {
    int chunk_index = 0;
    int chunk_cluster_ref = 0;  // index into the chunk clustering's signatures
    std::vector<int> candidate_base_ids;
    std::optional<int> chosen_base_id;
    int resulting_base_id = -1;  // chosen id, or the freshly appended id
    double e1 = 0.0;
    double e2 = 0.0;
    double e_merged = 0.0;
    double delta_e1_pct = 0.0;
    double delta_e2_pct = 0.0;
};

struct MergeEvaluation {
    double e1 = 0.0;
    double e2 = 0.0;
    double e_merged = 0.0;
    double delta_e1_pct = 0.0;
    double delta_e2_pct = 0.0;
};

// Ids of the min(m, base count) base signatures nearest to the chunk
// cluster's centroid (Euclidean), ties broken by lower id.
std::vector<int> nearest_candidates(const ClusterSignature& chunk_sig,
                                    const SketchState& sketch, int m);

// Entropy bookkeeping for one hypothetical merge:
//   delta_e1 = (e_merged - e1) / max(|e1|, 1e-9) * 100, same for e2.
// The absolute-value denominator keeps "percent increase" meaningful when
// differential entropy goes negative.
MergeEvaluation evaluate_merge(const ClusterSignature& base, const ClusterSignature& chunk);

// Does the evaluation pass the temporal merge rule for a chunk cluster of
// this size?
bool passes_thresholds(const MergeEvaluation& eval, std::int64_t chunk_points,
                       const MergeThresholds& thresholds);

// Temporal update: chunk clusters are applied largest-first against the
// live-updating base set; each merges into its best passing candidate or is
// appended with a fresh id. Increments chunks_processed.
std::vector<MergeDecision> apply_chunk(SketchState& sketch, const ChunkClustering& clustering,
                                       const MergeThresholds& thresholds);

// Per-cluster cumulative growth, indexed by chunk; the data behind concept
// drift plots.
struct DriftSeries {
    int cluster_id = -1;
    int created_at_chunk = 0;
    std::vector<std::int64_t> cumulative_points;  // one entry per processed chunk
};

std::vector<DriftSeries> drift_report(const SketchState& sketch);

}  // namespace streamgmm
