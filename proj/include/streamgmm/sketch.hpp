#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/em.hpp"
#include "streamgmm/types.hpp"

#include <string>
#include <vector>

namespace streamgmm {

struct TemporalScore {
    int chunk_index = 0;
    double score = 0.0;
    int nearest_cluster_id = -1;

    friend bool operator==(const TemporalScore&, const TemporalScore&) = default;
};

struct CompressionScore {
    int cluster_count = 0;
    double score = 0.0;
    int nearest_cluster_id = -1;

    friend bool operator==(const CompressionScore&, const CompressionScore&) = default;
};

// An anomalous point and the evolution of its score: one temporal entry per
// chunk from detection onward, one compression entry per executed merge.
struct AnomalyRecord {
    Vector point;
    int first_seen_chunk = 0;
    int nearest_cluster_id = -1;
    std::vector<TemporalScore> temporal_scores;
    std::vector<CompressionScore> compression_scores;
};

// The whole stream summary; everything that survives after raw points are
// discarded.
struct SketchState {
    std::vector<ClusterSignature> base_signatures;
    std::vector<AnomalyRecord> anomalies;
    int next_cluster_id = 0;
    int chunks_processed = 0;
    int dimensionality = 0;
    RunConfig config_snapshot;

    const ClusterSignature* find_cluster(int id) const;
    std::int64_t total_points() const;
};

// Base set = the first chunk's signatures with fresh ids. The caller flags
// the first chunk's anomalies afterwards (each chunk cluster maps to the base
// signature at the same index).
SketchState init_from_first_chunk(const ChunkClustering& clustering,
                                  const RunConfig& config);

// Versioned plain-text persistence; numbers are written shortest-round-trip,
// so save -> load -> save is byte-stable. Format documented in the README.
void save(const SketchState& sketch, const std::string& path);
SketchState load(const std::string& path);

}  // namespace streamgmm
