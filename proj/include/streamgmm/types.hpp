#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace streamgmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Covariance is kept as a full d x d matrix whose producers guarantee exact
// symmetry (entry(i,j) == entry(j,i) bit for bit). Serialization stores one
// triangle only.
using CovarianceMatrix = Eigen::MatrixXd;

struct DegenerateCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One (chunk, count) increment of a cluster's population.
struct GrowthEntry {
    int chunk_index = 0;
    std::int64_t points_added = 0;

    friend bool operator==(const GrowthEntry&, const GrowthEntry&) = default;
};

// Summary of one evolving cluster: everything the stream keeps once the raw
// points are gone.
struct ClusterSignature {
    int id = -1;
    std::int64_t num_points = 0;
    Vector mean;
    CovarianceMatrix covariance;
    int created_at_chunk = 0;
    std::vector<GrowthEntry> growth_log;

    int dim() const { return static_cast<int>(mean.size()); }
};

}  // namespace streamgmm
