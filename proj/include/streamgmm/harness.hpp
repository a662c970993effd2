#pragma once

#include "streamgmm/config.hpp"
#include "streamgmm/em.hpp"
#include "streamgmm/rng.hpp"
#include "streamgmm/sketch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace streamgmm {

struct Dataset {
    Matrix points;  // n x d
    std::string name;
    std::string source_path;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

// Whitespace- or comma-delimited numeric rows; '#' starts a comment.
// Dimensionality is inferred from the first data row.
Dataset load_dataset(const std::string& path);

// The dataset followed by `copies` copies of itself.
Dataset augment(const Dataset& ds, int copies);

// A seeded uniform permutation of the dataset cut into consecutive chunks;
// the final partial chunk is included. Every point appears exactly once.
std::vector<DataChunk> make_stream(const Dataset& ds, const StreamSpec& spec);

// Gaussian mixture description for the synthetic generator.
struct MixtureComponent {
    double weight = 1.0;
    Vector mean;
    CovarianceMatrix covariance;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    // Optional defaults carried by the spec file; CLI flags override them.
    std::optional<Eigen::Index> n;
    std::optional<std::uint64_t> seed;

    void validate() const;  // weights sum to 1, covariances positive definite
};

struct LabeledDataset {
    Dataset data;
    std::vector<int> labels;  // generating component per point
};

LabeledDataset generate_synthetic(const MixtureSpec& spec, Eigen::Index n, std::uint64_t seed);

// MixtureSpec JSON file: {"components":[{"weight":..,"mean":[..],"cov":[[..],..]},..]}
MixtureSpec load_mixture_spec(const std::string& path);

// Full-dataset EM (one chunk, no streaming), hard labels.
std::vector<int> batch_baseline(const Dataset& ds, int k, const EmConfig& config,
                                std::uint64_t seed);

// Label each point with the base cluster of minimum Mahalanobis distance.
std::vector<int> label_by_sketch(const Dataset& ds, const SketchState& sketch);

// Fraction of point pairs on which the two labelings agree, computed from the
// contingency table in O(n + cells).
double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

}  // namespace streamgmm
