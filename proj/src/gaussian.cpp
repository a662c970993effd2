#include "streamgmm/gaussian.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace streamgmm {

namespace {

// Cholesky factor or throw. Non-positive-definite covariances (determinant
// <= 0) have no valid factor.
Eigen::LLT<Matrix> cholesky_or_throw(const CovarianceMatrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw DegenerateCovariance("covariance matrix is not positive definite");
    }
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) {
            throw DegenerateCovariance("covariance factorization has a non-positive pivot");
        }
    }
    return llt;
}

}  // namespace

double entropy(const CovarianceMatrix& cov) {
    const int d = static_cast<int>(cov.rows());
    if (cov.cols() != d || d < 1) {
        throw DimensionError("entropy: covariance must be square and non-empty");
    }
    const auto llt = cholesky_or_throw(cov);
    double log2_det = 0.0;
    for (int i = 0; i < d; ++i) {
        log2_det += 2.0 * std::log2(llt.matrixLLT()(i, i));
    }
    const double log2_2pie = std::log2(2.0 * M_PI * M_E);
    return 0.5 * d * log2_2pie + 0.5 * log2_det;
}

double entropy_or_neg_inf(const CovarianceMatrix& cov) {
    try {
        return entropy(cov);
    } catch (const DegenerateCovariance&) {
        return -std::numeric_limits<double>::infinity();
    }
}

double mahalanobis(const Vector& point, const ClusterSignature& sig) {
    if (point.size() != sig.mean.size()) {
        throw DimensionError("mahalanobis: point and signature dimensions differ");
    }
    const auto llt = cholesky_or_throw(sig.covariance);
    const Vector diff = point - sig.mean;
    // Solve L y = diff; the squared distance is |y|^2.
    const Vector y = llt.matrixL().solve(diff);
    return std::sqrt(y.squaredNorm());
}

ClusterSignature merge_signatures(const ClusterSignature& a,
                                  const ClusterSignature& b) {
    if (a.mean.size() != b.mean.size()) {
        throw DimensionError("merge_signatures: dimensionality mismatch");
    }
    const double na = static_cast<double>(a.num_points);
    const double nb = static_cast<double>(b.num_points);
    const double n = na + nb;

    ClusterSignature merged;
    merged.id = a.id;
    merged.num_points = a.num_points + b.num_points;
    merged.created_at_chunk = std::min(a.created_at_chunk, b.created_at_chunk);
    merged.mean = (na * a.mean + nb * b.mean) / n;

    const Vector da = a.mean - merged.mean;
    const Vector db = b.mean - merged.mean;
    merged.covariance = (na * a.covariance + nb * b.covariance +
                         na * (da * da.transpose()) + nb * (db * db.transpose())) /
                        n;

    // Union of growth logs, summing counts that land on the same chunk.
    std::map<int, std::int64_t> by_chunk;
    for (const auto& g : a.growth_log) by_chunk[g.chunk_index] += g.points_added;
    for (const auto& g : b.growth_log) by_chunk[g.chunk_index] += g.points_added;
    merged.growth_log.reserve(by_chunk.size());
    for (const auto& [chunk, count] : by_chunk) {
        merged.growth_log.push_back({chunk, count});
    }
    return merged;
}

CovarianceMatrix regularize(const CovarianceMatrix& cov, double epsilon_scale,
                            double floor) {
    const int d = static_cast<int>(cov.rows());
    const double eps = std::max(epsilon_scale * cov.trace() / d, floor);
    CovarianceMatrix out = cov;
    out.diagonal().array() += eps;
    return out;
}

bool is_symmetric_exact(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (m(i, j) != m(j, i)) return false;
        }
    }
    return true;
}

}  // namespace streamgmm
