#include "streamgmm/merge.hpp"

#include "streamgmm/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace streamgmm {

namespace {

double percent_delta(double e_merged, double e_ref) {
    const double denom = std::max(std::abs(e_ref), 1e-9);
    return (e_merged - e_ref) / denom * 100.0;
}

}  // namespace

std::vector<int> nearest_candidates(const ClusterSignature& chunk_sig,
                                    const SketchState& sketch, int m) {
    std::vector<std::pair<double, int>> dist_id;
    dist_id.reserve(sketch.base_signatures.size());
    for (const auto& base : sketch.base_signatures) {
        dist_id.emplace_back((base.mean - chunk_sig.mean).norm(), base.id);
    }
    std::sort(dist_id.begin(), dist_id.end());
    const std::size_t take = std::min<std::size_t>(m, dist_id.size());
    std::vector<int> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(dist_id[i].second);
    return ids;
}

MergeEvaluation evaluate_merge(const ClusterSignature& base, const ClusterSignature& chunk) {
    MergeEvaluation eval;
    eval.e1 = entropy(base.covariance);
    eval.e2 = entropy(chunk.covariance);
    // A numerically rank-deficient pooled covariance (e.g. two floor-
    // regularized singletons) has entropy -inf: the merge always passes.
    eval.e_merged = entropy_or_neg_inf(merge_signatures(base, chunk).covariance);
    eval.delta_e1_pct = percent_delta(eval.e_merged, eval.e1);
    eval.delta_e2_pct = percent_delta(eval.e_merged, eval.e2);
    return eval;
}

bool passes_thresholds(const MergeEvaluation& eval, std::int64_t chunk_points,
                       const MergeThresholds& thresholds) {
    if (chunk_points >= thresholds.small_cluster_cutoff) {
        return eval.delta_e1_pct < thresholds.large_chunk_de1_pct &&
               eval.delta_e2_pct < thresholds.large_chunk_de2_pct;
    }
    return eval.delta_e1_pct < thresholds.small_chunk_de1_pct;
}

std::vector<MergeDecision> apply_chunk(SketchState& sketch, const ChunkClustering& clustering,
                                       const MergeThresholds& thresholds) {
    if (!clustering.signatures.empty() &&
        clustering.signatures.front().dim() != sketch.dimensionality) {
        throw DimensionError("apply_chunk: chunk dimensionality differs from sketch");
    }

    // Largest chunk clusters first; ties by original index.
    std::vector<int> order(clustering.signatures.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return clustering.signatures[a].num_points > clustering.signatures[b].num_points;
    });

    std::vector<MergeDecision> decisions;
    decisions.reserve(order.size());

    for (int ref : order) {
        const ClusterSignature& chunk_sig = clustering.signatures[ref];
        MergeDecision decision;
        decision.chunk_index = clustering.chunk_index;
        decision.chunk_cluster_ref = ref;
        decision.candidate_base_ids =
            nearest_candidates(chunk_sig, sketch, thresholds.candidate_count);

        // Best passing candidate by (delta_e1, delta_e2, id); also track the
        // best evaluated one so rejections carry useful numbers.
        int best_pass = -1;
        int best_seen = -1;
        MergeEvaluation best_pass_eval, best_seen_eval;
        for (int id : decision.candidate_base_ids) {
            const ClusterSignature* base = sketch.find_cluster(id);
            const MergeEvaluation eval = evaluate_merge(*base, chunk_sig);
            const bool better_seen =
                best_seen < 0 || eval.delta_e1_pct < best_seen_eval.delta_e1_pct ||
                (eval.delta_e1_pct == best_seen_eval.delta_e1_pct &&
                 eval.delta_e2_pct < best_seen_eval.delta_e2_pct);
            if (better_seen) {
                best_seen = id;
                best_seen_eval = eval;
            }
            if (passes_thresholds(eval, chunk_sig.num_points, thresholds)) {
                const bool better_pass =
                    best_pass < 0 || eval.delta_e1_pct < best_pass_eval.delta_e1_pct ||
                    (eval.delta_e1_pct == best_pass_eval.delta_e1_pct &&
                     eval.delta_e2_pct < best_pass_eval.delta_e2_pct);
                if (better_pass) {
                    best_pass = id;
                    best_pass_eval = eval;
                }
            }
        }

        if (best_pass >= 0) {
            auto it = std::find_if(sketch.base_signatures.begin(), sketch.base_signatures.end(),
                                   [&](const ClusterSignature& s) { return s.id == best_pass; });
            ClusterSignature merged = merge_signatures(*it, chunk_sig);
            merged.covariance =
                regularize(merged.covariance, sketch.config_snapshot.em.epsilon_scale,
                           sketch.config_snapshot.em.cov_floor);
            *it = std::move(merged);

            decision.chosen_base_id = best_pass;
            decision.resulting_base_id = best_pass;
            decision.e1 = best_pass_eval.e1;
            decision.e2 = best_pass_eval.e2;
            decision.e_merged = best_pass_eval.e_merged;
            decision.delta_e1_pct = best_pass_eval.delta_e1_pct;
            decision.delta_e2_pct = best_pass_eval.delta_e2_pct;
        } else {
            ClusterSignature appended = chunk_sig;
            appended.id = sketch.next_cluster_id++;
            decision.resulting_base_id = appended.id;
            sketch.base_signatures.push_back(std::move(appended));
            if (best_seen >= 0) {
                decision.e1 = best_seen_eval.e1;
                decision.e2 = best_seen_eval.e2;
                decision.e_merged = best_seen_eval.e_merged;
                decision.delta_e1_pct = best_seen_eval.delta_e1_pct;
                decision.delta_e2_pct = best_seen_eval.delta_e2_pct;
            }
        }
        decisions.push_back(std::move(decision));
    }

    sketch.chunks_processed += 1;

    // Report decisions in the chunk clustering's original order.
    std::sort(decisions.begin(), decisions.end(),
              [](const MergeDecision& a, const MergeDecision& b) {
                  return a.chunk_cluster_ref < b.chunk_cluster_ref;
              });
    return decisions;
}

std::vector<DriftSeries> drift_report(const SketchState& sketch) {
    std::vector<DriftSeries> report;
    report.reserve(sketch.base_signatures.size());
    for (const auto& sig : sketch.base_signatures) {
        DriftSeries series;
        series.cluster_id = sig.id;
        series.created_at_chunk = sig.created_at_chunk;
        series.cumulative_points.assign(std::max(sketch.chunks_processed, 0), 0);
        std::int64_t running = 0;
        std::size_t g = 0;
        for (int chunk = 0; chunk < sketch.chunks_processed; ++chunk) {
            while (g < sig.growth_log.size() && sig.growth_log[g].chunk_index <= chunk) {
                running += sig.growth_log[g].points_added;
                ++g;
            }
            series.cumulative_points[chunk] = running;
        }
        report.push_back(std::move(series));
    }
    return report;
}

}  // namespace streamgmm
