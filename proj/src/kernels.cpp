#include "streamgmm/kernels.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <limits>

namespace streamgmm::kernels {

namespace {

constexpr Eigen::Index kBlock = 512;  // fixed block size; independent of thread count

std::atomic<bool> g_parallel{true};

// Forward substitution L y = b, returning |y|^2.
double solve_sqnorm(const Matrix& L, const Vector& diff, Vector& scratch) {
    const Eigen::Index d = diff.size();
    double sq = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        double s = diff(i);
        for (Eigen::Index j = 0; j < i; ++j) s -= L(i, j) * scratch(j);
        const double y = s / L(i, i);
        scratch(i) = y;
        sq += y * y;
    }
    return sq;
}

Eigen::Index block_count(Eigen::Index n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

bool parallel_enabled() { return g_parallel.load(); }
void set_parallel_enabled(bool enabled) { g_parallel.store(enabled); }

PreparedGaussian prepare_gaussian(const Vector& mean, const CovarianceMatrix& cov,
                                  int id, double log_weight) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw DimensionError("prepare_gaussian: covariance/mean dimensions differ");
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw DegenerateCovariance("prepare_gaussian: covariance not positive definite");
    }
    PreparedGaussian g;
    g.id = id;
    g.mean = mean;
    g.chol_lower = llt.matrixL();
    g.log_weight = log_weight;
    const Eigen::Index d = mean.size();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double lii = g.chol_lower(i, i);
        if (!(lii > 0.0) || !std::isfinite(lii)) {
            throw DegenerateCovariance("prepare_gaussian: non-positive Cholesky pivot");
        }
        log_det_half += std::log(lii);
    }
    g.log_norm = -0.5 * d * std::log(2.0 * M_PI) - log_det_half;
    return g;
}

std::vector<PreparedGaussian> prepare_signatures(const std::vector<ClusterSignature>& sigs) {
    std::vector<PreparedGaussian> out;
    out.reserve(sigs.size());
    for (const auto& s : sigs) {
        out.push_back(prepare_gaussian(s.mean, s.covariance, s.id));
    }
    return out;
}

double estep(const Matrix& points, const std::vector<PreparedGaussian>& comps,
             Matrix& resp) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const Eigen::Index k = static_cast<Eigen::Index>(comps.size());
    resp.resize(n, k);

    const Eigen::Index nblocks = block_count(n);
    std::vector<double> block_loglik(nblocks, 0.0);
    std::atomic<bool> degenerate{false};  // cannot throw from inside the omp region

    const bool par = parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index lo = b * kBlock;
        const Eigen::Index hi = std::min(lo + kBlock, n);
        Vector diff(d), scratch(d), logp(k);
        double acc = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i) {
            double lmax = -std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto& g = comps[c];
                diff = points.row(i).transpose() - g.mean;
                const double sq = solve_sqnorm(g.chol_lower, diff, scratch);
                logp(c) = g.log_weight + g.log_norm - 0.5 * sq;
                if (logp(c) > lmax) lmax = logp(c);
            }
            if (!std::isfinite(lmax)) {
                degenerate.store(true);
                continue;
            }
            double sum = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(logp(c) - lmax);
            const double lse = lmax + std::log(sum);
            for (Eigen::Index c = 0; c < k; ++c) resp(i, c) = std::exp(logp(c) - lse);
            acc += lse;
        }
        block_loglik[b] = acc;
    }
    if (degenerate.load()) {
        throw DegenerateCovariance("estep: all component densities vanished for a point");
    }

    double loglik = 0.0;
    for (Eigen::Index b = 0; b < nblocks; ++b) loglik += block_loglik[b];
    return loglik;
}

WeightedMoments weighted_moments(const Matrix& points, const Matrix& resp) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const Eigen::Index k = resp.cols();
    if (resp.rows() != n) {
        throw DimensionError("weighted_moments: resp rows must match points");
    }
    const Eigen::Index nblocks = block_count(n);
    const bool par = parallel_enabled();

    // Pass 1: responsibility mass and weighted coordinate sums per block.
    const Eigen::Index stride1 = k * (1 + d);
    std::vector<double> part1(nblocks * stride1, 0.0);
#pragma omp parallel for schedule(static) if (par)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index lo = b * kBlock;
        const Eigen::Index hi = std::min(lo + kBlock, n);
        double* slot = part1.data() + b * stride1;
        for (Eigen::Index i = lo; i < hi; ++i) {
            for (Eigen::Index c = 0; c < k; ++c) {
                const double r = resp(i, c);
                if (r == 0.0) continue;
                double* comp = slot + c * (1 + d);
                comp[0] += r;
                for (Eigen::Index j = 0; j < d; ++j) comp[1 + j] += r * points(i, j);
            }
        }
    }

    WeightedMoments out;
    out.weights.assign(k, 0.0);
    out.means.assign(k, Vector::Zero(d));
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const double* slot = part1.data() + b * stride1;
        for (Eigen::Index c = 0; c < k; ++c) {
            const double* comp = slot + c * (1 + d);
            out.weights[c] += comp[0];
            for (Eigen::Index j = 0; j < d; ++j) out.means[c](j) += comp[1 + j];
        }
    }
    constexpr double kTinyMass = 1e-12;
    for (Eigen::Index c = 0; c < k; ++c) {
        if (out.weights[c] > kTinyMass) {
            out.means[c] /= out.weights[c];
        } else {
            out.means[c].setZero();
        }
    }

    // Pass 2: centered scatter, lower triangle only.
    const Eigen::Index tri = d * (d + 1) / 2;
    const Eigen::Index stride2 = k * tri;
    std::vector<double> part2(nblocks * stride2, 0.0);
#pragma omp parallel for schedule(static) if (par)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index lo = b * kBlock;
        const Eigen::Index hi = std::min(lo + kBlock, n);
        double* slot = part2.data() + b * stride2;
        Vector centered(d);
        for (Eigen::Index i = lo; i < hi; ++i) {
            for (Eigen::Index c = 0; c < k; ++c) {
                const double r = resp(i, c);
                if (r == 0.0) continue;
                const Vector& mu = out.means[c];
                for (Eigen::Index j = 0; j < d; ++j) centered(j) = points(i, j) - mu(j);
                double* comp = slot + c * tri;
                Eigen::Index t = 0;
                for (Eigen::Index row = 0; row < d; ++row) {
                    const double rc = r * centered(row);
                    for (Eigen::Index col = 0; col <= row; ++col) {
                        comp[t++] += rc * centered(col);
                    }
                }
            }
        }
    }

    out.covariances.assign(k, Matrix::Zero(d, d));
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const double* slot = part2.data() + b * stride2;
        for (Eigen::Index c = 0; c < k; ++c) {
            const double* comp = slot + c * tri;
            Eigen::Index t = 0;
            for (Eigen::Index row = 0; row < d; ++row) {
                for (Eigen::Index col = 0; col <= row; ++col) {
                    out.covariances[c](row, col) += comp[t++];
                }
            }
        }
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (out.weights[c] > kTinyMass) {
            out.covariances[c] /= out.weights[c];
        } else {
            out.covariances[c].setZero();
        }
        // Mirror the accumulated lower triangle.
        for (Eigen::Index row = 0; row < d; ++row) {
            for (Eigen::Index col = row + 1; col < d; ++col) {
                out.covariances[c](row, col) = out.covariances[c](col, row);
            }
        }
    }
    return out;
}

std::vector<ScoredPoint> min_mahalanobis(const Matrix& points,
                                         const std::vector<PreparedGaussian>& sigs) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    std::vector<ScoredPoint> out(n);
    const Eigen::Index nblocks = block_count(n);
    const bool par = parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index lo = b * kBlock;
        const Eigen::Index hi = std::min(lo + kBlock, n);
        Vector diff(d), scratch(d);
        for (Eigen::Index i = lo; i < hi; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_id = -1;
            for (const auto& g : sigs) {
                diff = points.row(i).transpose() - g.mean;
                const double score = std::sqrt(solve_sqnorm(g.chol_lower, diff, scratch));
                if (score < best || (score == best && g.id < best_id)) {
                    best = score;
                    best_id = g.id;
                }
            }
            out[i] = {best, best_id};
        }
    }
    return out;
}

namespace serial_reference {

double estep(const Matrix& points, const std::vector<PreparedGaussian>& comps,
             Matrix& resp) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const Eigen::Index k = static_cast<Eigen::Index>(comps.size());
    resp.resize(n, k);
    Vector diff(d), scratch(d), logp(k);
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double lmax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto& g = comps[c];
            diff = points.row(i).transpose() - g.mean;
            logp(c) = g.log_weight + g.log_norm - 0.5 * solve_sqnorm(g.chol_lower, diff, scratch);
            if (logp(c) > lmax) lmax = logp(c);
        }
        double sum = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(logp(c) - lmax);
        const double lse = lmax + std::log(sum);
        for (Eigen::Index c = 0; c < k; ++c) resp(i, c) = std::exp(logp(c) - lse);
        loglik += lse;
    }
    return loglik;
}

WeightedMoments weighted_moments(const Matrix& points, const Matrix& resp) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const Eigen::Index k = resp.cols();
    WeightedMoments out;
    out.weights.assign(k, 0.0);
    out.means.assign(k, Vector::Zero(d));
    out.covariances.assign(k, Matrix::Zero(d, d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
            out.weights[c] += resp(i, c);
            out.means[c] += resp(i, c) * points.row(i).transpose();
        }
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (out.weights[c] > 1e-12) out.means[c] /= out.weights[c];
        else out.means[c].setZero();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
            const Vector centered = points.row(i).transpose() - out.means[c];
            out.covariances[c] += resp(i, c) * (centered * centered.transpose());
        }
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (out.weights[c] > 1e-12) out.covariances[c] /= out.weights[c];
        else out.covariances[c].setZero();
    }
    return out;
}

std::vector<ScoredPoint> min_mahalanobis(const Matrix& points,
                                         const std::vector<PreparedGaussian>& sigs) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    Vector diff(d), scratch(d);
    std::vector<ScoredPoint> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_id = -1;
        for (const auto& g : sigs) {
            diff = points.row(i).transpose() - g.mean;
            const double score = std::sqrt(solve_sqnorm(g.chol_lower, diff, scratch));
            if (score < best || (score == best && g.id < best_id)) {
                best = score;
                best_id = g.id;
            }
        }
        out[i] = {best, best_id};
    }
    return out;
}

}  // namespace serial_reference

}  // namespace streamgmm::kernels
