#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/merge.hpp"
#include "streamgmm/sketch.hpp"

#include <vector>

namespace streamgmm {

// One executed compression merge: who merged, at which thresholds, and what
// the entropies looked like.
struct CompressionStep {
    int surviving_id = -1;
    int absorbed_id = -1;
    int clusters_after = 0;
    double de1_threshold_pct = 0.0;
    double de2_threshold_pct = 0.0;
    MergeEvaluation eval;
};

struct CompressionResult {
    SketchState sketch;
    std::vector<CompressionStep> trace;
    bool noop_warning = false;  // target_k exceeded the current cluster count
};

// Greedy entropy-guarded reduction of the base set on a working copy; the
// input sketch is never mutated. Each executed merge appends one compression
// score entry to every anomaly.
CompressionResult compress(const SketchState& sketch, const CompressionSchedule& schedule);

// The (cluster_count, score, nearest id) series recorded during compression,
// one per anomaly, in sketch order.
struct CompressionProfile {
    int anomaly_index = 0;
    std::vector<CompressionScore> series;
};

std::vector<CompressionProfile> compression_profile(const SketchState& sketch);

}  // namespace streamgmm
