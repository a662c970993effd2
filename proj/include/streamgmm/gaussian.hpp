#pragma once

#include "streamgmm/types.hpp"

namespace streamgmm {

constexpr double kCovarianceFloor = 1e-12;

// Differential entropy of a Gaussian with the given covariance, in bits:
//   h = (d/2) * log2(2*pi*e) + (1/2) * log2(det(cov))
// May be negative for small determinants. Throws DegenerateCovariance when
// the matrix is not strictly positive definite.
double entropy(const CovarianceMatrix& cov);

// Same, but returns -infinity instead of throwing. Pooled covariances of
// near-coincident degenerate clusters can be numerically rank-deficient;
// their entropy is -infinity, which merge evaluation treats as an automatic
// pass rather than an error.
double entropy_or_neg_inf(const CovarianceMatrix& cov);

// sqrt((x - mean)^T cov^{-1} (x - mean)), via Cholesky solve.
double mahalanobis(const Vector& point, const ClusterSignature& sig);

// Exact pooled population statistics of the two summarized point sets:
//   n  = n_a + n_b
//   mu = (n_a*mu_a + n_b*mu_b) / n
//   S  = (n_a*S_a + n_b*S_b
//         + n_a*(mu_a-mu)(mu_a-mu)^T + n_b*(mu_b-mu)(mu_b-mu)^T) / n
// The result's id and created_at_chunk come from `a` (callers pass the
// surviving cluster first); growth logs are merged by chunk index.
ClusterSignature merge_signatures(const ClusterSignature& a,
                                  const ClusterSignature& b);

// Adds eps*I with eps = max(epsilon_scale * trace(cov)/d, floor), so even an
// all-zero matrix (single-point cluster) comes out positive definite.
CovarianceMatrix regularize(const CovarianceMatrix& cov, double epsilon_scale,
                            double floor = kCovarianceFloor);

// Exact bitwise symmetry check; producers of covariance matrices must keep
// this true.
bool is_symmetric_exact(const Matrix& m);

}  // namespace streamgmm
