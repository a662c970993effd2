#pragma once

#include "streamgmm/types.hpp"

#include <vector>

namespace streamgmm::kernels {

// Global switch for the OpenMP paths. The production kernels use a fixed
// block decomposition with a sequential combine, so results are bitwise
// identical whether this is on or off and for any thread count; only the
// wall time changes.
bool parallel_enabled();
void set_parallel_enabled(bool enabled);

// A signature prepared for repeated density / distance evaluation:
// Cholesky factor, log normalization constant, and log mixing weight.
struct PreparedGaussian {
    int id = -1;
    Vector mean;
    Matrix chol_lower;
    double log_norm = 0.0;    // -d/2 ln(2 pi) - sum_i ln L_ii
    double log_weight = 0.0;  // ln(mixing weight); 0 when only distances are needed
};

PreparedGaussian prepare_gaussian(const Vector& mean, const CovarianceMatrix& cov,
                                  int id = -1, double log_weight = 0.0);
std::vector<PreparedGaussian> prepare_signatures(const std::vector<ClusterSignature>& sigs);

// E-step over `points` (one row per point): fills the n x k responsibility
// matrix and returns the total log-likelihood.
double estep(const Matrix& points, const std::vector<PreparedGaussian>& comps,
             Matrix& resp);

struct WeightedMoments {
    std::vector<double> weights;              // responsibility mass N_k
    std::vector<Vector> means;                // zero vector when N_k ~ 0
    std::vector<CovarianceMatrix> covariances;  // population (divide by N_k), centered two-pass
};

// M-step moments for `resp` (n x k). Covariances come out exactly symmetric
// (lower triangle accumulated, then mirrored).
WeightedMoments weighted_moments(const Matrix& points, const Matrix& resp);

struct ScoredPoint {
    double score = 0.0;
    int nearest_id = -1;
};

// Per-point minimum Mahalanobis distance over the prepared signatures,
// ties broken by lower id.
std::vector<ScoredPoint> min_mahalanobis(const Matrix& points,
                                         const std::vector<PreparedGaussian>& sigs);

// Naive single-loop implementations; the reference the blocked/OpenMP
// kernels are tested and benchmarked against.
namespace serial_reference {
double estep(const Matrix& points, const std::vector<PreparedGaussian>& comps,
             Matrix& resp);
WeightedMoments weighted_moments(const Matrix& points, const Matrix& resp);
std::vector<ScoredPoint> min_mahalanobis(const Matrix& points,
                                         const std::vector<PreparedGaussian>& sigs);
}  // namespace serial_reference

}  // namespace streamgmm::kernels
