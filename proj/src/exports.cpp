#include "streamgmm/exports.hpp"

#include "streamgmm/gaussian.hpp"
#include "textio.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace streamgmm {

using textio::fmt;

void write_anomaly_series_csv(const SketchState& sketch, std::ostream& out) {
    out << "anomaly_id,axis_type,axis_value,score,nearest_cluster\n";
    for (std::size_t i = 0; i < sketch.anomalies.size(); ++i) {
        const AnomalyRecord& rec = sketch.anomalies[i];
        for (const auto& t : rec.temporal_scores) {
            out << i << ",temporal," << t.chunk_index << ',' << fmt(t.score) << ','
                << t.nearest_cluster_id << '\n';
        }
        for (const auto& c : rec.compression_scores) {
            out << i << ",compression," << c.cluster_count << ',' << fmt(c.score) << ','
                << c.nearest_cluster_id << '\n';
        }
    }
}

void write_drift_csv(const SketchState& sketch, std::ostream& out) {
    out << "cluster_id,created_at_chunk,chunk_index,cumulative_points\n";
    for (const auto& series : drift_report(sketch)) {
        for (std::size_t chunk = 0; chunk < series.cumulative_points.size(); ++chunk) {
            out << series.cluster_id << ',' << series.created_at_chunk << ',' << chunk << ','
                << series.cumulative_points[chunk] << '\n';
        }
    }
}

void write_merge_decisions_csv(const std::vector<MergeDecision>& decisions, std::ostream& out) {
    out << "chunk_index,chunk_cluster,candidates,chosen_base_id,resulting_base_id,"
           "e1,e2,e_merged,delta_e1_pct,delta_e2_pct,outcome\n";
    for (const auto& d : decisions) {
        out << d.chunk_index << ',' << d.chunk_cluster_ref << ',';
        for (std::size_t i = 0; i < d.candidate_base_ids.size(); ++i) {
            if (i) out << '|';
            out << d.candidate_base_ids[i];
        }
        out << ',';
        if (d.chosen_base_id) out << *d.chosen_base_id;
        out << ',' << d.resulting_base_id << ',' << fmt(d.e1) << ',' << fmt(d.e2) << ','
            << fmt(d.e_merged) << ',' << fmt(d.delta_e1_pct) << ',' << fmt(d.delta_e2_pct) << ','
            << (d.chosen_base_id ? "merged" : "appended") << '\n';
    }
}

void write_validation_csv(const std::vector<ValidationRow>& rows, std::ostream& out) {
    out << "dataset,seed,rand_index,final_k,runtime_seconds\n";
    for (const auto& row : rows) {
        out << row.dataset << ',' << row.seed << ',' << fmt(row.rand_index) << ',' << row.final_k
            << ',' << fmt(row.runtime_seconds) << '\n';
    }
}

void write_compression_trace_csv(const std::vector<CompressionStep>& trace, std::ostream& out) {
    out << "step,surviving_id,absorbed_id,clusters_after,de1_threshold_pct,de2_threshold_pct,"
           "e1,e2,e_merged,delta_e1_pct,delta_e2_pct\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& s = trace[i];
        out << i << ',' << s.surviving_id << ',' << s.absorbed_id << ',' << s.clusters_after
            << ',' << fmt(s.de1_threshold_pct) << ',' << fmt(s.de2_threshold_pct) << ','
            << fmt(s.eval.e1) << ',' << fmt(s.eval.e2) << ',' << fmt(s.eval.e_merged) << ','
            << fmt(s.eval.delta_e1_pct) << ',' << fmt(s.eval.delta_e2_pct) << '\n';
    }
}

void write_cluster_report(const SketchState& sketch, std::ostream& out) {
    out << "clusters " << sketch.base_signatures.size() << " dim " << sketch.dimensionality
        << " chunks " << sketch.chunks_processed << "\n";
    for (const auto& sig : sketch.base_signatures) {
        out << "cluster " << sig.id << " points " << sig.num_points << " created_at "
            << sig.created_at_chunk << " entropy_bits " << fmt(entropy(sig.covariance)) << '\n';
        out << "  mean";
        for (Eigen::Index i = 0; i < sig.mean.size(); ++i) out << ' ' << fmt(sig.mean(i));
        out << '\n';
        for (Eigen::Index i = 0; i < sig.covariance.rows(); ++i) {
            out << "  cov ";
            for (Eigen::Index j = 0; j < sig.covariance.cols(); ++j) {
                if (j) out << ' ';
                out << fmt(sig.covariance(i, j));
            }
            out << '\n';
        }
    }
}

void write_boundary_ellipses_csv(const SketchState& sketch, std::ostream& out, double distance,
                                 int samples) {
    if (sketch.dimensionality != 2) {
        throw StateError("boundary ellipses are only defined for 2-D sketches");
    }
    out << "cluster_id,sample_index,x,y\n";
    for (const auto& sig : sketch.base_signatures) {
        const Matrix L = Eigen::LLT<Matrix>(sig.covariance).matrixL();
        for (int s = 0; s < samples; ++s) {
            const double theta = 2.0 * M_PI * s / samples;
            Vector unit(2);
            unit << std::cos(theta), std::sin(theta);
            const Vector p = sig.mean + distance * (L * unit);
            out << sig.id << ',' << s << ',' << fmt(p(0)) << ',' << fmt(p(1)) << '\n';
        }
    }
}

}  // namespace streamgmm
