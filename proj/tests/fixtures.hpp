// Deterministic dataset fixtures for the acceptance suite, mirroring the
// structure of the public S1 (15 moderately separated Gaussians, 5000 points,
// coordinates up to ~1e6) and unbalance (3 dense clusters of 2000 plus 5
// sparse clusters of 100) benchmark sets.
#pragma once

#include "streamgmm/harness.hpp"
#include "streamgmm/rng.hpp"

#include <cmath>

namespace fixtures {

using streamgmm::Dataset;
using streamgmm::Matrix;
using streamgmm::MixtureComponent;
using streamgmm::MixtureSpec;
using streamgmm::Rng;
using streamgmm::Vector;

inline Matrix rotated_cov(double sigma_major, double sigma_minor, double angle) {
    Matrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = sigma_major * sigma_major;
    diag(1, 1) = sigma_minor * sigma_minor;
    Matrix cov = rot * diag * rot.transpose();
    cov(0, 1) = cov(1, 0);
    return cov;
}

// 15 anisotropic Gaussians with centers rejection-sampled at >= 120k mutual
// distance inside [100k, 900k]^2; sigma in the 20k-35k range.
inline MixtureSpec s1_like_mixture() {
    Rng rng(20240815);
    std::vector<Vector> centers;
    while (centers.size() < 15) {
        Vector c(2);
        c << 100000.0 + 800000.0 * streamgmm::uniform01(rng),
            100000.0 + 800000.0 * streamgmm::uniform01(rng);
        bool ok = true;
        for (const auto& other : centers) {
            if ((c - other).norm() < 120000.0) ok = false;
        }
        if (ok) centers.push_back(c);
    }
    MixtureSpec spec;
    for (const auto& center : centers) {
        MixtureComponent comp;
        comp.weight = 1.0 / 15.0;
        comp.mean = center;
        const double major = 20000.0 + 15000.0 * streamgmm::uniform01(rng);
        const double minor = 20000.0 + 10000.0 * streamgmm::uniform01(rng);
        comp.covariance = rotated_cov(major, minor, 3.14159 * streamgmm::uniform01(rng));
        spec.components.push_back(std::move(comp));
    }
    return spec;
}

inline Dataset s1_like_dataset(std::uint64_t seed) {
    auto labeled = streamgmm::generate_synthetic(s1_like_mixture(), 5000, seed);
    labeled.data.name = "s1_like";
    return std::move(labeled.data);
}

// 3 dense clusters of 2000 points on the left, 5 sparse clusters of 100
// points on the right; 6500 points in total, exact per-cluster counts.
inline Dataset unbalance_like_dataset(std::uint64_t seed) {
    struct Blob {
        double x, y, sigma;
        Eigen::Index n;
    };
    const Blob blobs[] = {
        {100000.0, 200000.0, 12000.0, 2000}, {150000.0, 370000.0, 12000.0, 2000},
        {100000.0, 540000.0, 12000.0, 2000}, {420000.0, 180000.0, 20000.0, 100},
        {500000.0, 320000.0, 20000.0, 100},  {420000.0, 460000.0, 20000.0, 100},
        {500000.0, 600000.0, 20000.0, 100},  {440000.0, 740000.0, 20000.0, 100},
    };
    Eigen::Index total = 0;
    for (const auto& b : blobs) total += b.n;

    Dataset ds;
    ds.name = "unbalance_like";
    ds.points.resize(total, 2);
    Rng rng(seed);
    Eigen::Index row = 0;
    for (const auto& b : blobs) {
        for (Eigen::Index i = 0; i < b.n; ++i) {
            ds.points(row, 0) = b.x + b.sigma * streamgmm::standard_normal(rng);
            ds.points(row, 1) = b.y + b.sigma * streamgmm::standard_normal(rng);
            ++row;
        }
    }
    return ds;
}

// Three unit blobs 60 sigma apart with 20 planted outliers 5.5-7.5 sigma from
// their home blob and far from everything else.
struct PlantedStream {
    Dataset data;
    std::vector<Vector> planted;
};

inline PlantedStream planted_anomaly_dataset(std::uint64_t seed) {
    MixtureSpec spec;
    const double centers[3][2] = {{0.0, 0.0}, {60.0, 0.0}, {0.0, 60.0}};
    for (const auto& c : centers) {
        MixtureComponent comp;
        comp.weight = 1.0 / 3.0;
        comp.mean = Vector(2);
        comp.mean << c[0], c[1];
        comp.covariance = Matrix::Identity(2, 2);
        spec.components.push_back(std::move(comp));
    }
    auto labeled = streamgmm::generate_synthetic(spec, 3000, seed);

    PlantedStream out;
    const double golden = 2.399963229728653;
    for (int i = 0; i < 20; ++i) {
        const int home = i % 3;
        const double radius = 5.5 + 0.5 * (i % 5);
        const double angle = golden * i;
        Vector p(2);
        p << centers[home][0] + radius * std::cos(angle),
            centers[home][1] + radius * std::sin(angle);
        out.planted.push_back(p);
    }

    out.data.name = "planted";
    out.data.points.resize(3020, 2);
    out.data.points.topRows(3000) = labeled.data.points;
    for (int i = 0; i < 20; ++i) {
        out.data.points.row(3000 + i) = out.planted[i].transpose();
    }
    return out;
}

}  // namespace fixtures
