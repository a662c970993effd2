// Times the blocked/OpenMP kernels against the naive serial reference on
// EM-shaped workloads and reports speedups plus worst deviation.

#include "streamgmm/kernels.hpp"
#include "streamgmm/rng.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace streamgmm;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (s < best) best = s;
    }
    return best;
}

Matrix random_points(Eigen::Index n, Eigen::Index d, Rng& rng) {
    Matrix pts(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = 20.0 * standard_normal(rng);
    }
    return pts;
}

std::vector<kernels::PreparedGaussian> random_components(int k, Eigen::Index d, Rng& rng) {
    std::vector<kernels::PreparedGaussian> comps;
    for (int c = 0; c < k; ++c) {
        Vector mean(d);
        for (Eigen::Index j = 0; j < d; ++j) mean(j) = 20.0 * standard_normal(rng);
        Matrix a(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = standard_normal(rng);
        }
        Matrix cov = a * a.transpose();
        cov.diagonal().array() += 0.5;
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) cov(i, j) = cov(j, i);
        }
        comps.push_back(
            kernels::prepare_gaussian(mean, cov, c, -std::log(static_cast<double>(k))));
    }
    return comps;
}

void bench_case(Eigen::Index n, Eigen::Index d, int k) {
    Rng rng(1234);
    const Matrix pts = random_points(n, d, rng);
    const auto comps = random_components(k, d, rng);

    Matrix resp_serial, resp_parallel;
    const double serial_estep = time_best_of(3, [&] {
        kernels::serial_reference::estep(pts, comps, resp_serial);
    });
    kernels::set_parallel_enabled(true);
    const double parallel_estep = time_best_of(3, [&] {
        kernels::estep(pts, comps, resp_parallel);
    });

    double worst = 0.0;
    for (Eigen::Index i = 0; i < resp_serial.rows(); ++i) {
        for (Eigen::Index c = 0; c < resp_serial.cols(); ++c) {
            worst = std::max(worst, std::abs(resp_serial(i, c) - resp_parallel(i, c)));
        }
    }

    const double serial_moments = time_best_of(3, [&] {
        kernels::serial_reference::weighted_moments(pts, resp_parallel);
    });
    const double parallel_moments = time_best_of(3, [&] {
        kernels::weighted_moments(pts, resp_parallel);
    });

    const double serial_score = time_best_of(3, [&] {
        kernels::serial_reference::min_mahalanobis(pts, comps);
    });
    const double parallel_score = time_best_of(3, [&] {
        kernels::min_mahalanobis(pts, comps);
    });

    std::printf("n=%-7ld d=%ld k=%-3d | estep %8.2f ms -> %8.2f ms (%.2fx) | "
                "moments %7.2f ms -> %7.2f ms (%.2fx) | score %7.2f ms -> %7.2f ms (%.2fx) | "
                "max resp dev %.2e\n",
                static_cast<long>(n), static_cast<long>(d), k, serial_estep * 1e3,
                parallel_estep * 1e3, serial_estep / parallel_estep, serial_moments * 1e3,
                parallel_moments * 1e3, serial_moments / parallel_moments, serial_score * 1e3,
                parallel_score * 1e3, serial_score / parallel_score, worst);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run their serial path\n");
#endif
    bench_case(200000, 2, 30);
    bench_case(200000, 2, 8);
    bench_case(50000, 8, 20);
    bench_case(20000, 16, 15);
    return 0;
}
