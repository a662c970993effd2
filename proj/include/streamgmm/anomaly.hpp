#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/merge.hpp"
#include "streamgmm/sketch.hpp"

#include <vector>

namespace streamgmm {

// Score every point of the chunk against the base cluster its chunk cluster
// merged into (or its own appended cluster) and return records for points
// above store_threshold. Must run after apply_chunk so the decisions carry
// each chunk cluster's resulting base id. Does not mutate the sketch.
std::vector<AnomalyRecord> flag_chunk_anomalies(const DataChunk& chunk,
                                                const ChunkClustering& clustering,
                                                const SketchState& sketch,
                                                const std::vector<MergeDecision>& decisions,
                                                const AnomalyConfig& config);

// End-of-chunk revision: every stored anomaly (except ones first seen this
// chunk, whose detection entry already covers it) gets one new temporal entry
// with the minimum Mahalanobis distance over all current base clusters.
void rescore_anomalies(SketchState& sketch, int chunk_index);

struct AnomalyReportRow {
    int anomaly_index = 0;
    Vector point;
    int first_seen_chunk = 0;
    double current_score = 0.0;
    int current_nearest_cluster_id = -1;
    std::vector<TemporalScore> temporal_scores;
};

// Stored anomalies whose current (latest) score is at least
// min_current_score; 0 returns everything.
std::vector<AnomalyReportRow> query_anomalies(const SketchState& sketch,
                                              double min_current_score);

}  // namespace streamgmm
