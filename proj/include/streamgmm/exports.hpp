#pragma once

#include "streamgmm/compress.hpp"
#include "streamgmm/merge.hpp"
#include "streamgmm/pipeline.hpp"
#include "streamgmm/sketch.hpp"

#include <ostream>

namespace streamgmm {

// Long-format anomaly score series: one row per recorded score, temporal and
// compression axes interleaved per anomaly.
// Columns: anomaly_id,axis_type,axis_value,score,nearest_cluster
void write_anomaly_series_csv(const SketchState& sketch, std::ostream& out);

// Columns: cluster_id,created_at_chunk,chunk_index,cumulative_points
void write_drift_csv(const SketchState& sketch, std::ostream& out);

// Columns: chunk_index,chunk_cluster,candidates,chosen_base_id,
//          resulting_base_id,e1,e2,e_merged,delta_e1_pct,delta_e2_pct,outcome
void write_merge_decisions_csv(const std::vector<MergeDecision>& decisions, std::ostream& out);

// Columns: dataset,seed,rand_index,final_k,runtime_seconds
void write_validation_csv(const std::vector<ValidationRow>& rows, std::ostream& out);

// Columns: step,surviving_id,absorbed_id,clusters_after,de1_threshold_pct,
//          de2_threshold_pct,e1,e2,e_merged,delta_e1_pct,delta_e2_pct
void write_compression_trace_csv(const std::vector<CompressionStep>& trace, std::ostream& out);

// Per-cluster listing: id, points, created_at, entropy, mean, covariance.
void write_cluster_report(const SketchState& sketch, std::ostream& out);

// Mahalanobis-3 boundary samples for 2-D sketches, 64 per cluster.
// Columns: cluster_id,sample_index,x,y
void write_boundary_ellipses_csv(const SketchState& sketch, std::ostream& out,
                                 double distance = 3.0, int samples = 64);

}  // namespace streamgmm
