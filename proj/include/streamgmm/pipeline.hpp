#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/harness.hpp"
#include "streamgmm/merge.hpp"
#include "streamgmm/sketch.hpp"

#include <vector>

namespace streamgmm {

struct RunSummary {
    int chunks_processed = 0;
    int final_base_count = 0;
    int anomaly_count = 0;
    std::int64_t total_points = 0;
    double seconds = 0.0;
};

struct StreamResult {
    SketchState sketch;
    RunSummary summary;
    std::vector<MergeDecision> decisions;  // full audit log, all chunks
};

// The whole temporal loop over an already-loaded dataset: augment, stream,
// then per chunk fit -> merge -> flag -> rescore, with optional
// auto-compression when the base set outgrows the configured trigger.
StreamResult run_stream(const Dataset& dataset, const RunConfig& config);

struct ValidationRow {
    std::string dataset;
    std::uint64_t seed = 0;
    double rand_index = 0.0;
    int final_k = 0;
    double runtime_seconds = 0.0;
};

// One streaming run + batch baseline comparison per seed; the sketch is
// compressed to baseline_k before labeling.
std::vector<ValidationRow> validate_against_baseline(const Dataset& dataset,
                                                     const RunConfig& config, int baseline_k,
                                                     const std::vector<std::uint64_t>& seeds);

double median(std::vector<double> values);

}  // namespace streamgmm
