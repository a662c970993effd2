#include "streamgmm/compress.hpp"

#include "streamgmm/gaussian.hpp"
#include "streamgmm/kernels.hpp"

#include <algorithm>
#include <set>

namespace streamgmm {

namespace {

// Orientation for a compression pair: the larger-count member absorbs (its id
// survives); ties go to the lower id.
std::pair<int, int> orient(const ClusterSignature& a, const ClusterSignature& b) {
    if (a.num_points > b.num_points ||
        (a.num_points == b.num_points && a.id < b.id)) {
        return {a.id, b.id};
    }
    return {b.id, a.id};
}

Matrix anomaly_point_matrix(const SketchState& sketch) {
    Matrix pts(sketch.anomalies.size(), sketch.dimensionality);
    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = sketch.anomalies[i].point.transpose();
    }
    return pts;
}

}  // namespace

CompressionResult compress(const SketchState& sketch, const CompressionSchedule& schedule) {
    if (sketch.base_signatures.empty()) {
        throw StateError("compress: sketch has no base clusters");
    }
    CompressionResult result;
    result.sketch = sketch;

    const int start_count = static_cast<int>(sketch.base_signatures.size());
    if (schedule.target_k && *schedule.target_k > start_count) {
        result.noop_warning = true;
        return result;
    }
    if (schedule.target_k && *schedule.target_k == start_count) {
        return result;
    }

    SketchState& work = result.sketch;
    const Matrix anomaly_points =
        work.anomalies.empty() ? Matrix() : anomaly_point_matrix(work);

    double t1 = schedule.initial_de1_pct;
    double t2 = schedule.initial_de2_pct;

    while (true) {
        const int count = static_cast<int>(work.base_signatures.size());
        if (count <= 1) break;
        if (schedule.target_k && count <= *schedule.target_k) break;

        // Candidate pairs: each cluster against its nearest peers.
        const int m = std::min(4, count - 1);
        std::set<std::pair<int, int>> seen;
        struct Candidate {
            std::pair<int, int> ids;  // (survivor, absorbed)
            MergeEvaluation eval;
        };
        std::vector<Candidate> passing;
        for (const auto& sig : work.base_signatures) {
            std::vector<std::pair<double, int>> dist_id;
            for (const auto& other : work.base_signatures) {
                if (other.id == sig.id) continue;
                dist_id.emplace_back((other.mean - sig.mean).norm(), other.id);
            }
            std::sort(dist_id.begin(), dist_id.end());
            for (int j = 0; j < m; ++j) {
                const ClusterSignature* peer = work.find_cluster(dist_id[j].second);
                const std::pair<int, int> key = std::minmax(sig.id, peer->id);
                if (!seen.insert(key).second) continue;
                const auto [survivor_id, absorbed_id] = orient(sig, *peer);
                const ClusterSignature* survivor = work.find_cluster(survivor_id);
                const ClusterSignature* absorbed = work.find_cluster(absorbed_id);
                const MergeEvaluation eval = evaluate_merge(*survivor, *absorbed);
                if (eval.delta_e1_pct < t1 && eval.delta_e2_pct < t2) {
                    passing.push_back({{survivor_id, absorbed_id}, eval});
                }
            }
        }

        if (passing.empty()) {
            t1 += schedule.step_pct;
            t2 += schedule.step_pct;
            if (t1 > schedule.max_pct || t2 > schedule.max_pct) break;
            continue;
        }

        const Candidate* best = &passing.front();
        for (const auto& cand : passing) {
            const auto key = [](const Candidate& c) {
                return std::make_tuple(c.eval.delta_e1_pct, c.eval.delta_e2_pct,
                                       std::min(c.ids.first, c.ids.second),
                                       std::max(c.ids.first, c.ids.second));
            };
            if (key(cand) < key(*best)) best = &cand;
        }

        auto survivor_it =
            std::find_if(work.base_signatures.begin(), work.base_signatures.end(),
                         [&](const ClusterSignature& s) { return s.id == best->ids.first; });
        auto absorbed_it =
            std::find_if(work.base_signatures.begin(), work.base_signatures.end(),
                         [&](const ClusterSignature& s) { return s.id == best->ids.second; });
        ClusterSignature merged = merge_signatures(*survivor_it, *absorbed_it);
        merged.covariance = regularize(merged.covariance, work.config_snapshot.em.epsilon_scale,
                                       work.config_snapshot.em.cov_floor);
        *survivor_it = std::move(merged);
        const CompressionStep step{best->ids.first,
                                   best->ids.second,
                                   count - 1,
                                   t1,
                                   t2,
                                   best->eval};
        work.base_signatures.erase(absorbed_it);
        result.trace.push_back(step);

        // Rescore every anomaly against the reduced base set.
        if (!work.anomalies.empty()) {
            const auto prepared = kernels::prepare_signatures(work.base_signatures);
            const auto scored = kernels::min_mahalanobis(anomaly_points, prepared);
            for (std::size_t i = 0; i < work.anomalies.size(); ++i) {
                work.anomalies[i].compression_scores.push_back(
                    {step.clusters_after, scored[i].score, scored[i].nearest_id});
                work.anomalies[i].nearest_cluster_id = scored[i].nearest_id;
            }
        }
    }
    return result;
}

std::vector<CompressionProfile> compression_profile(const SketchState& sketch) {
    std::vector<CompressionProfile> profiles;
    profiles.reserve(sketch.anomalies.size());
    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        profiles.push_back({static_cast<int>(i), sketch.anomalies[i].compression_scores});
    }
    return profiles;
}

}  // namespace streamgmm
