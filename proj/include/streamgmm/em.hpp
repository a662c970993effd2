#pragma once

#include "streamgmm/rng.hpp"
#include "streamgmm/types.hpp"

#include <vector>

namespace streamgmm {

struct EmConfig {
    int max_iter = 100;
    double tol = 1e-6;            // relative log-likelihood improvement
    double epsilon_scale = 1e-6;  // covariance regularization scale
    double cov_floor = 1e-12;     // absolute minimum regularization

    friend bool operator==(const EmConfig&, const EmConfig&) = default;
};

// One time step of the stream: row i is point i.
struct DataChunk {
    Matrix points;       // n x d
    int chunk_index = 0;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

// Per-chunk GMM output. Signatures carry chunk-local ids 0..K-1 and the exact
// population statistics of their hard-assigned points, so the downstream
// merge algebra is exact.
struct ChunkClustering {
    std::vector<ClusterSignature> signatures;
    std::vector<int> assignments;  // point index -> signature index
    bool responsibilities_converged = false;
    int iterations_used = 0;
    std::vector<double> loglik_history;  // one entry per EM iteration
    int chunk_index = 0;
};

// k-means++-style seeding: first seed uniform, each next drawn with
// probability proportional to squared distance from the chosen set.
std::vector<Vector> seed_components(const Matrix& points, int k, Rng& rng);

// Full-covariance EM on one chunk, then hard assignment, empty-component
// dropping, and empirical recomputation of each surviving signature.
// k greater than the chunk size is reduced to the chunk size.
ChunkClustering fit_chunk(const DataChunk& chunk, int k, const EmConfig& config,
                          std::uint64_t seed);

}  // namespace streamgmm
