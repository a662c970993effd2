#include "streamgmm/anomaly.hpp"

#include "streamgmm/gaussian.hpp"
#include "streamgmm/kernels.hpp"

#include <map>

namespace streamgmm {

std::vector<AnomalyRecord> flag_chunk_anomalies(const DataChunk& chunk,
                                                const ChunkClustering& clustering,
                                                const SketchState& sketch,
                                                const std::vector<MergeDecision>& decisions,
                                                const AnomalyConfig& config) {
    // chunk cluster -> the base cluster its points are scored against.
    std::map<int, int> target_base;
    for (const auto& d : decisions) {
        target_base[d.chunk_cluster_ref] = d.resulting_base_id;
    }
    std::map<int, kernels::PreparedGaussian> prepared;
    for (const auto& [ref, base_id] : target_base) {
        if (prepared.count(base_id)) continue;
        const ClusterSignature* base = sketch.find_cluster(base_id);
        if (base == nullptr) {
            throw StateError("flag_chunk_anomalies: decision points at missing cluster id " +
                             std::to_string(base_id));
        }
        prepared.emplace(base_id, kernels::prepare_gaussian(base->mean, base->covariance, base_id));
    }

    std::vector<AnomalyRecord> records;
    Vector diff(chunk.dim()), scratch(chunk.dim());
    for (Eigen::Index i = 0; i < chunk.size(); ++i) {
        const auto it = target_base.find(clustering.assignments[i]);
        if (it == target_base.end()) {
            throw StateError("flag_chunk_anomalies: no merge decision for chunk cluster " +
                             std::to_string(clustering.assignments[i]));
        }
        const auto& g = prepared.at(it->second);
        diff = chunk.points.row(i).transpose() - g.mean;
        double sq = 0.0;
        for (Eigen::Index r = 0; r < diff.size(); ++r) {
            double s = diff(r);
            for (Eigen::Index c = 0; c < r; ++c) s -= g.chol_lower(r, c) * scratch(c);
            scratch(r) = s / g.chol_lower(r, r);
            sq += scratch(r) * scratch(r);
        }
        const double score = std::sqrt(sq);
        if (score > config.store_threshold) {
            AnomalyRecord rec;
            rec.point = chunk.points.row(i).transpose();
            rec.first_seen_chunk = chunk.chunk_index;
            rec.nearest_cluster_id = it->second;
            rec.temporal_scores.push_back({chunk.chunk_index, score, it->second});
            records.push_back(std::move(rec));
        }
    }
    return records;
}

void rescore_anomalies(SketchState& sketch, int chunk_index) {
    if (sketch.anomalies.empty() || sketch.base_signatures.empty()) return;

    Matrix pts(sketch.anomalies.size(), sketch.dimensionality);
    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = sketch.anomalies[i].point.transpose();
    }
    const auto prepared = kernels::prepare_signatures(sketch.base_signatures);
    const auto scored = kernels::min_mahalanobis(pts, prepared);

    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        AnomalyRecord& rec = sketch.anomalies[i];
        if (rec.first_seen_chunk == chunk_index) continue;  // detection entry already present
        rec.temporal_scores.push_back({chunk_index, scored[i].score, scored[i].nearest_id});
        rec.nearest_cluster_id = scored[i].nearest_id;
    }
}

std::vector<AnomalyReportRow> query_anomalies(const SketchState& sketch,
                                              double min_current_score) {
    std::vector<AnomalyReportRow> rows;
    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        const AnomalyRecord& rec = sketch.anomalies[i];
        if (rec.temporal_scores.empty()) continue;
        const TemporalScore& latest = rec.temporal_scores.back();
        if (latest.score < min_current_score) continue;
        AnomalyReportRow row;
        row.anomaly_index = static_cast<int>(i);
        row.point = rec.point;
        row.first_seen_chunk = rec.first_seen_chunk;
        row.current_score = latest.score;
        row.current_nearest_cluster_id = latest.nearest_cluster_id;
        row.temporal_scores = rec.temporal_scores;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace streamgmm
