#pragma once

#include "streamgmm/em.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace streamgmm {

// Entropy-increase limits for the temporal merge decision, in percent.
// Chunk clusters at or above small_cluster_cutoff points must pass both
// large-chunk limits; smaller ones only the small-chunk limit.
struct MergeThresholds {
    double large_chunk_de1_pct = 5.0;
    double large_chunk_de2_pct = 10.0;
    double small_chunk_de1_pct = 10.0;
    std::int64_t small_cluster_cutoff = 10;
    int candidate_count = 4;

    friend bool operator==(const MergeThresholds&, const MergeThresholds&) = default;
};

// Compression starts at the initial thresholds and relaxes both by step_pct
// whenever no pair passes, up to max_pct. target_k empty means "compress only
// while the thresholds in force allow it".
struct CompressionSchedule {
    double initial_de1_pct = 0.0;
    double initial_de2_pct = 0.0;
    double step_pct = 5.0;
    double max_pct = 100.0;
    std::optional<int> target_k;

    friend bool operator==(const CompressionSchedule&, const CompressionSchedule&) = default;
};

struct AnomalyConfig {
    double flag_threshold = 3.0;
    // Retention threshold for "watch" points; must not exceed flag_threshold.
    double store_threshold = 3.0;

    friend bool operator==(const AnomalyConfig&, const AnomalyConfig&) = default;
};

struct StreamSpec {
    int chunk_size = 500;
    std::uint64_t rng_seed = 1;
    int augmentation_copies = 2;

    friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

// Every parameter the engine takes, in one place. A sketch file records the
// snapshot in force when it was written.
struct RunConfig {
    int k_per_chunk = 30;
    std::optional<int> auto_compress_trigger;
    EmConfig em;
    MergeThresholds merge;
    CompressionSchedule compression;
    AnomalyConfig anomaly;
    StreamSpec stream;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// JSON round trip. Loading validates every field and rejects unknown keys;
// absent fields keep their defaults.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& config);  // single line, sorted keys
void validate(const RunConfig& config);

}  // namespace streamgmm
