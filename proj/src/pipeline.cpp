#include "streamgmm/pipeline.hpp"

#include "streamgmm/anomaly.hpp"
#include "streamgmm/compress.hpp"

#include <algorithm>
#include <chrono>

namespace streamgmm {

namespace {

// Synthetic decisions for the very first chunk: chunk cluster i became base
// signature i.
std::vector<MergeDecision> first_chunk_decisions(const ChunkClustering& clustering,
                                                 const SketchState& sketch) {
    std::vector<MergeDecision> decisions(clustering.signatures.size());
    for (std::size_t i = 0; i < clustering.signatures.size(); ++i) {
        decisions[i].chunk_index = clustering.chunk_index;
        decisions[i].chunk_cluster_ref = static_cast<int>(i);
        decisions[i].resulting_base_id = sketch.base_signatures[i].id;
    }
    return decisions;
}

}  // namespace

StreamResult run_stream(const Dataset& dataset, const RunConfig& config) {
    validate(config);
    const auto started = std::chrono::steady_clock::now();

    const Dataset augmented = augment(dataset, config.stream.augmentation_copies);
    const std::vector<DataChunk> chunks = make_stream(augmented, config.stream);

    StreamResult result;
    SketchState& sketch = result.sketch;
    for (const DataChunk& chunk : chunks) {
        const std::uint64_t em_seed = mix_seed(config.stream.rng_seed, chunk.chunk_index);
        const ChunkClustering clustering =
            fit_chunk(chunk, config.k_per_chunk, config.em, em_seed);

        std::vector<MergeDecision> decisions;
        if (chunk.chunk_index == 0) {
            sketch = init_from_first_chunk(clustering, config);
            decisions = first_chunk_decisions(clustering, sketch);
        } else {
            decisions = apply_chunk(sketch, clustering, config.merge);
        }

        auto new_records =
            flag_chunk_anomalies(chunk, clustering, sketch, decisions, config.anomaly);
        for (auto& rec : new_records) sketch.anomalies.push_back(std::move(rec));
        rescore_anomalies(sketch, chunk.chunk_index);

        if (config.auto_compress_trigger &&
            static_cast<int>(sketch.base_signatures.size()) > *config.auto_compress_trigger) {
            CompressionSchedule schedule = config.compression;
            schedule.target_k = *config.auto_compress_trigger;
            sketch = compress(sketch, schedule).sketch;
        }

        result.decisions.insert(result.decisions.end(), decisions.begin(), decisions.end());
    }

    result.summary.chunks_processed = sketch.chunks_processed;
    result.summary.final_base_count = static_cast<int>(sketch.base_signatures.size());
    result.summary.anomaly_count = static_cast<int>(sketch.anomalies.size());
    result.summary.total_points = sketch.total_points();
    result.summary.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::vector<ValidationRow> validate_against_baseline(const Dataset& dataset,
                                                     const RunConfig& config, int baseline_k,
                                                     const std::vector<std::uint64_t>& seeds) {
    std::vector<ValidationRow> rows;
    rows.reserve(seeds.size());
    for (const std::uint64_t seed : seeds) {
        RunConfig cfg = config;
        cfg.stream.rng_seed = seed;

        const auto started = std::chrono::steady_clock::now();
        StreamResult run = run_stream(dataset, cfg);

        CompressionSchedule schedule = cfg.compression;
        schedule.target_k = baseline_k;
        const SketchState compressed = compress(run.sketch, schedule).sketch;

        const Dataset augmented = augment(dataset, cfg.stream.augmentation_copies);
        const std::vector<int> stream_labels = label_by_sketch(augmented, compressed);
        const std::vector<int> batch_labels =
            batch_baseline(augmented, baseline_k, cfg.em, mix_seed(seed, 0xBA5EBA11));

        ValidationRow row;
        row.dataset = dataset.name;
        row.seed = seed;
        row.rand_index = rand_index(stream_labels, batch_labels);
        row.final_k = static_cast<int>(compressed.base_signatures.size());
        row.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace streamgmm
