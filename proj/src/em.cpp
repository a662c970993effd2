#include "streamgmm/em.hpp"

#include "streamgmm/gaussian.hpp"
#include "streamgmm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace streamgmm {

namespace {

// Weighted pick from non-negative weights; falls back to uniform over the
// still-unchosen indices when all weights are zero (duplicate points).
std::size_t weighted_pick(const std::vector<double>& weights,
                          const std::vector<bool>& chosen, Rng& rng) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!chosen[i]) total += weights[i];
    }
    if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        std::size_t last = weights.size() - 1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (chosen[i]) continue;
            acc += weights[i];
            last = i;
            if (acc > target) return i;
        }
        return last;
    }
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (!chosen[i]) open.push_back(i);
    }
    return open[uniform_index(rng, open.size())];
}

// Population statistics of the whole chunk; the initial covariance for every
// component.
CovarianceMatrix global_covariance(const Matrix& points) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const Vector mean = points.colwise().mean();
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector c = points.row(i).transpose() - mean;
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index q = 0; q <= r; ++q) cov(r, q) += c(r) * c(q);
        }
    }
    cov /= static_cast<double>(n);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index q = r + 1; q < d; ++q) cov(r, q) = cov(q, r);
    }
    return cov;
}

}  // namespace

std::vector<Vector> seed_components(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(points.rows());
    std::vector<Vector> seeds;
    seeds.reserve(k);
    std::vector<bool> chosen(n, false);
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());

    std::size_t first = uniform_index(rng, n);
    chosen[first] = true;
    seeds.push_back(points.row(static_cast<Eigen::Index>(first)).transpose());

    for (int s = 1; s < k; ++s) {
        const Vector& latest = seeds.back();
        for (std::size_t i = 0; i < n; ++i) {
            const double sq =
                (points.row(static_cast<Eigen::Index>(i)).transpose() - latest).squaredNorm();
            if (sq < min_sq[i]) min_sq[i] = sq;
        }
        const std::size_t pick = weighted_pick(min_sq, chosen, rng);
        chosen[pick] = true;
        seeds.push_back(points.row(static_cast<Eigen::Index>(pick)).transpose());
    }
    return seeds;
}

ChunkClustering fit_chunk(const DataChunk& chunk, int k, const EmConfig& config,
                          std::uint64_t seed) {
    const Eigen::Index n = chunk.points.rows();
    const Eigen::Index d = chunk.points.cols();
    if (n < 1 || d < 1) {
        throw InvalidData("fit_chunk: empty chunk");
    }
    if (!chunk.points.allFinite()) {
        throw InvalidData("fit_chunk: non-finite coordinate in chunk");
    }
    if (k < 1) {
        throw InvalidData("fit_chunk: k must be at least 1");
    }
    k = static_cast<int>(std::min<Eigen::Index>(k, n));

    Rng rng(seed);
    const std::vector<Vector> seeds = seed_components(chunk.points, k, rng);
    const CovarianceMatrix base_cov =
        regularize(global_covariance(chunk.points), config.epsilon_scale, config.cov_floor);

    // Initial moments from a hard nearest-seed partition; seeds whose cell is
    // empty keep the seed mean and the global covariance.
    std::vector<int> init_assign(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
            const double sq = (chunk.points.row(i).transpose() - seeds[c]).squaredNorm();
            if (sq < best) {
                best = sq;
                arg = c;
            }
        }
        init_assign[i] = arg;
    }
    Matrix resp = Matrix::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) resp(i, init_assign[i]) = 1.0;
    auto moments = kernels::weighted_moments(chunk.points, resp);

    std::vector<Vector> means(k);
    std::vector<CovarianceMatrix> covs(k);
    std::vector<double> weights(k);
    double weight_total = 0.0;
    for (int c = 0; c < k; ++c) {
        if (moments.weights[c] > 0.5) {
            means[c] = moments.means[c];
            covs[c] = regularize(moments.covariances[c], config.epsilon_scale, config.cov_floor);
            weights[c] = moments.weights[c];
        } else {
            means[c] = seeds[c];
            covs[c] = base_cov;
            weights[c] = 1.0;
        }
        weight_total += weights[c];
    }
    for (int c = 0; c < k; ++c) weights[c] /= weight_total;

    // EM iterations.
    ChunkClustering out;
    out.chunk_index = chunk.chunk_index;
    double prev_loglik = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iter; ++iter) {
        std::vector<kernels::PreparedGaussian> comps;
        comps.reserve(k);
        for (int c = 0; c < k; ++c) {
            const double lw = weights[c] > 0.0 ? std::log(weights[c])
                                               : -std::numeric_limits<double>::infinity();
            comps.push_back(kernels::prepare_gaussian(means[c], covs[c], c, lw));
        }
        const double loglik = kernels::estep(chunk.points, comps, resp);
        out.loglik_history.push_back(loglik);
        out.iterations_used = iter + 1;

        moments = kernels::weighted_moments(chunk.points, resp);
        for (int c = 0; c < k; ++c) {
            if (moments.weights[c] > 1e-10) {
                means[c] = moments.means[c];
                covs[c] =
                    regularize(moments.covariances[c], config.epsilon_scale, config.cov_floor);
            }
            weights[c] = moments.weights[c] / static_cast<double>(n);
        }

        if (std::isfinite(prev_loglik)) {
            const double denom = std::max(std::abs(prev_loglik), 1.0);
            if (std::abs(loglik - prev_loglik) / denom < config.tol) {
                out.responsibilities_converged = true;
                break;
            }
        }
        prev_loglik = loglik;
    }

    // Hard assignment to the maximum-responsibility component, ties to the
    // lower index.
    std::vector<int> hard(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = -1.0;
        int arg = 0;
        for (int c = 0; c < k; ++c) {
            if (resp(i, c) > best) {
                best = resp(i, c);
                arg = c;
            }
        }
        hard[i] = arg;
    }

    // Drop empty components; reindex densely in original component order.
    std::vector<std::int64_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) counts[hard[i]]++;
    std::vector<int> remap(k, -1);
    int surviving = 0;
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) remap[c] = surviving++;
    }

    out.assignments.resize(n);
    Matrix hard_resp = Matrix::Zero(n, surviving);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.assignments[i] = remap[hard[i]];
        hard_resp(i, out.assignments[i]) = 1.0;
    }

    // Exact empirical statistics of the hard-assigned points.
    const auto empirical = kernels::weighted_moments(chunk.points, hard_resp);
    out.signatures.resize(surviving);
    for (int c = 0; c < k; ++c) {
        const int s = remap[c];
        if (s < 0) continue;
        ClusterSignature& sig = out.signatures[s];
        sig.id = s;
        sig.num_points = counts[c];
        sig.mean = empirical.means[s];
        sig.covariance =
            regularize(empirical.covariances[s], config.epsilon_scale, config.cov_floor);
        sig.created_at_chunk = chunk.chunk_index;
        sig.growth_log = {{chunk.chunk_index, counts[c]}};
    }
    return out;
}

}  // namespace streamgmm
