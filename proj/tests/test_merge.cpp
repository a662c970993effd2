#include "streamgmm/merge.hpp"

#include "streamgmm/gaussian.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

using namespace streamgmm;

namespace {

ClusterSignature make_sig(std::int64_t n, double x, double y, Matrix cov, int chunk = 0) {
    ClusterSignature sig;
    sig.num_points = n;
    sig.mean = Vector(2);
    sig.mean << x, y;
    sig.covariance = std::move(cov);
    sig.created_at_chunk = chunk;
    sig.growth_log = {{chunk, n}};
    return sig;
}

SketchState sketch_of(std::vector<ClusterSignature> sigs) {
    SketchState sketch;
    sketch.dimensionality = 2;
    sketch.chunks_processed = 1;
    for (auto& sig : sigs) {
        sig.id = sketch.next_cluster_id++;
        sketch.base_signatures.push_back(std::move(sig));
    }
    return sketch;
}

ChunkClustering clustering_of(std::vector<ClusterSignature> sigs, int chunk_index) {
    ChunkClustering clustering;
    clustering.chunk_index = chunk_index;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        sigs[i].id = static_cast<int>(i);
        sigs[i].created_at_chunk = chunk_index;
        sigs[i].growth_log = {{chunk_index, sigs[i].num_points}};
    }
    clustering.signatures = std::move(sigs);
    return clustering;
}

}  // namespace

TEST_CASE("nearest_candidates returns everything when fewer than m") {
    auto sketch = sketch_of({make_sig(10, 0, 0, Matrix::Identity(2, 2)),
                             make_sig(10, 5, 0, Matrix::Identity(2, 2))});
    const auto chunk_sig = make_sig(8, 1, 0, Matrix::Identity(2, 2));
    const auto ids = nearest_candidates(chunk_sig, sketch, 4);
    REQUIRE(ids.size() == 2);
    CHECK(ids[0] == 0);
    CHECK(ids[1] == 1);
}

TEST_CASE("a coincident centroid ranks first") {
    auto sketch = sketch_of({make_sig(10, 9, 9, Matrix::Identity(2, 2)),
                             make_sig(10, 2, 2, Matrix::Identity(2, 2)),
                             make_sig(10, -4, 0, Matrix::Identity(2, 2))});
    const auto chunk_sig = make_sig(8, 2, 2, Matrix::Identity(2, 2));
    const auto ids = nearest_candidates(chunk_sig, sketch, 2);
    REQUIRE(ids.size() == 2);
    CHECK(ids[0] == 1);
}

TEST_CASE("five bases at distances 1..5 yield the four nearest in order") {
    auto sketch = sketch_of({make_sig(10, 5, 0, Matrix::Identity(2, 2)),
                             make_sig(10, 1, 0, Matrix::Identity(2, 2)),
                             make_sig(10, 4, 0, Matrix::Identity(2, 2)),
                             make_sig(10, 2, 0, Matrix::Identity(2, 2)),
                             make_sig(10, 3, 0, Matrix::Identity(2, 2))});
    const auto chunk_sig = make_sig(8, 0, 0, Matrix::Identity(2, 2));
    const auto ids = nearest_candidates(chunk_sig, sketch, 4);
    REQUIRE(ids.size() == 4);
    CHECK(ids == std::vector<int>{1, 3, 4, 2});
}

TEST_CASE("distance ties break toward the lower id") {
    auto sketch = sketch_of({make_sig(10, 2, 0, Matrix::Identity(2, 2)),
                             make_sig(10, -2, 0, Matrix::Identity(2, 2))});
    const auto chunk_sig = make_sig(8, 0, 0, Matrix::Identity(2, 2));
    const auto ids = nearest_candidates(chunk_sig, sketch, 1);
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == 0);
}

TEST_CASE("merging a signature with itself leaves the entropies unchanged") {
    Rng rng(401);
    const auto sig = oracle::signature_from_points(oracle::random_points(30, 2, rng));
    const auto eval = evaluate_merge(sig, sig);
    CHECK(std::abs(eval.e_merged - eval.e1) < 1e-9);
    CHECK(std::abs(eval.delta_e1_pct) < 1e-7);
    CHECK(std::abs(eval.delta_e2_pct) < 1e-7);
}

TEST_CASE("two unit clusters 10 apart inflate one eigendirection to 26") {
    const auto base = make_sig(100, 0, 0, Matrix::Identity(2, 2));
    const auto chunk = make_sig(100, 10, 0, Matrix::Identity(2, 2));
    const auto eval = evaluate_merge(base, chunk);
    CHECK(eval.e_merged - eval.e1 == doctest::Approx(0.5 * std::log2(26.0)).epsilon(1e-12));
    CHECK(eval.delta_e1_pct > 0.0);
}

TEST_CASE("a chunk buried inside a large base merges with near-zero delta") {
    const auto base = make_sig(1000, 0, 0, Matrix::Identity(2, 2));
    const auto chunk = make_sig(5, 0, 0, 0.01 * Matrix::Identity(2, 2));
    const auto eval = evaluate_merge(base, chunk);
    CHECK(std::abs(eval.delta_e1_pct) < 1.0);
    MergeThresholds thresholds;
    CHECK(passes_thresholds(eval, chunk.num_points, thresholds));
}

TEST_CASE("large chunks must pass both limits, small chunks only de1") {
    MergeThresholds thresholds;  // 5 / 10 / 10, cutoff 10
    MergeEvaluation eval;
    eval.delta_e1_pct = 4.0;
    eval.delta_e2_pct = 50.0;
    CHECK_FALSE(passes_thresholds(eval, 10, thresholds));
    CHECK(passes_thresholds(eval, 9, thresholds));
    eval.delta_e1_pct = 9.0;
    CHECK(passes_thresholds(eval, 9, thresholds));
    eval.delta_e1_pct = 11.0;
    CHECK_FALSE(passes_thresholds(eval, 9, thresholds));
    eval.delta_e1_pct = 4.0;
    eval.delta_e2_pct = 9.0;
    CHECK(passes_thresholds(eval, 500, thresholds));
}

TEST_CASE("an empty base set absorbs every chunk cluster as new") {
    SketchState sketch;
    sketch.dimensionality = 2;
    sketch.chunks_processed = 0;
    auto clustering = clustering_of({make_sig(20, 0, 0, regularize(Matrix::Identity(2, 2), 1e-6)),
                                     make_sig(30, 9, 9, regularize(Matrix::Identity(2, 2), 1e-6))},
                                    0);
    const auto decisions = apply_chunk(sketch, clustering, MergeThresholds{});
    CHECK(sketch.base_signatures.size() == 2);
    CHECK(sketch.chunks_processed == 1);
    for (const auto& d : decisions) {
        CHECK_FALSE(d.chosen_base_id.has_value());
        CHECK(d.candidate_base_ids.size() <= 1);  // first appended becomes second's candidate
    }
    CHECK(sketch.total_points() == 50);
}

TEST_CASE("an identical chunk cluster merges into its base: count doubles, moments hold") {
    Rng rng(409);
    auto base_sig = oracle::signature_from_points(oracle::random_points(40, 2, rng), 0, 0);
    base_sig.covariance = regularize(base_sig.covariance, 1e-6);
    const Vector mean_before = base_sig.mean;
    const Matrix cov_before = base_sig.covariance;

    auto far_sig = make_sig(15, 500, 500, regularize(Matrix::Identity(2, 2), 1e-6));
    auto sketch = sketch_of({base_sig, far_sig});

    auto chunk_copy = base_sig;
    const auto decisions = apply_chunk(sketch, clustering_of({chunk_copy}, 1), MergeThresholds{});
    REQUIRE(decisions.size() == 1);
    REQUIRE(decisions[0].chosen_base_id.has_value());
    CHECK(*decisions[0].chosen_base_id == 0);
    CHECK(std::abs(decisions[0].delta_e1_pct) < 1e-7);

    const ClusterSignature* merged = sketch.find_cluster(0);
    CHECK(merged->num_points == 80);
    CHECK(oracle::max_rel_diff(merged->mean, mean_before) < 1e-12);
    // Re-regularization nudges the diagonal by ~1e-6 relative.
    CHECK(oracle::max_rel_diff(merged->covariance, cov_before) < 1e-5);
    CHECK(sketch.base_signatures.size() == 2);
}

TEST_CASE("a far-off blob becomes a new base signature") {
    Rng rng(419);
    auto b0 = oracle::signature_from_points(oracle::random_points(60, 2, rng, 0.0), 0, 0);
    auto b1 = oracle::signature_from_points(oracle::random_points(60, 2, rng, 20.0), 0, 0);
    b0.covariance = regularize(b0.covariance, 1e-6);
    b1.covariance = regularize(b1.covariance, 1e-6);
    auto sketch = sketch_of({b0, b1});
    const int base_before = static_cast<int>(sketch.base_signatures.size());

    auto blob =
        oracle::signature_from_points(oracle::random_points(50, 2, rng, 1000.0), 0, 3);
    blob.covariance = regularize(blob.covariance, 1e-6);
    const auto decisions = apply_chunk(sketch, clustering_of({blob}, 3), MergeThresholds{});
    CHECK(static_cast<int>(sketch.base_signatures.size()) == base_before + 1);
    REQUIRE(decisions.size() == 1);
    CHECK_FALSE(decisions[0].chosen_base_id.has_value());
    CHECK(decisions[0].resulting_base_id == 2);
    CHECK(sketch.find_cluster(2)->created_at_chunk == 3);
}

TEST_CASE("apply_chunk conserves points and honors its own audit log") {
    Rng rng(421);
    auto sketch = sketch_of({
        oracle::signature_from_points(oracle::random_points(50, 2, rng, 0.0), 0, 0),
        oracle::signature_from_points(oracle::random_points(50, 2, rng, 12.0), 0, 0),
        oracle::signature_from_points(oracle::random_points(50, 2, rng, 25.0), 0, 0),
    });
    for (auto& sig : sketch.base_signatures) {
        sig.covariance = regularize(sig.covariance, 1e-6);
    }
    MergeThresholds thresholds;

    for (int chunk = 1; chunk <= 4; ++chunk) {
        std::vector<ClusterSignature> chunk_sigs;
        std::int64_t chunk_total = 0;
        for (int c = 0; c < 3; ++c) {
            const double center = 12.0 * static_cast<double>(uniform_index(rng, 4));
            const auto n = static_cast<Eigen::Index>(5 + uniform_index(rng, 60));
            auto sig =
                oracle::signature_from_points(oracle::random_points(n, 2, rng, center), c, chunk);
            sig.covariance = regularize(sig.covariance, 1e-6);
            chunk_total += sig.num_points;
            chunk_sigs.push_back(std::move(sig));
        }
        const std::int64_t before = sketch.total_points();
        const int base_before = static_cast<int>(sketch.base_signatures.size());
        const auto decisions =
            apply_chunk(sketch, clustering_of(chunk_sigs, chunk), thresholds);

        CHECK(sketch.total_points() == before + chunk_total);

        int appended = 0;
        for (const auto& d : decisions) {
            if (d.chosen_base_id) {
                // Candidate confinement and threshold soundness.
                const auto& ids = d.candidate_base_ids;
                CHECK(std::find(ids.begin(), ids.end(), *d.chosen_base_id) != ids.end());
                MergeEvaluation eval;
                eval.delta_e1_pct = d.delta_e1_pct;
                eval.delta_e2_pct = d.delta_e2_pct;
                CHECK(passes_thresholds(
                    eval, clustering_of(chunk_sigs, chunk).signatures[d.chunk_cluster_ref].num_points,
                    thresholds));
            } else {
                ++appended;
            }
        }
        CHECK(static_cast<int>(sketch.base_signatures.size()) == base_before + appended);
    }
}

TEST_CASE("apply_chunk rejects mismatched dimensionality") {
    Rng rng(431);
    auto sketch = sketch_of({oracle::signature_from_points(oracle::random_points(30, 2, rng))});
    ChunkClustering clustering;
    clustering.chunk_index = 1;
    ClusterSignature sig3;
    sig3.id = 0;
    sig3.num_points = 5;
    sig3.mean = Vector::Zero(3);
    sig3.covariance = Matrix::Identity(3, 3);
    sig3.growth_log = {{1, 5}};
    clustering.signatures.push_back(sig3);
    CHECK_THROWS_AS(apply_chunk(sketch, clustering, MergeThresholds{}), DimensionError);
}

TEST_CASE("drift report follows the growth log") {
    auto sketch = sketch_of({make_sig(100, 0, 0, regularize(Matrix::Identity(2, 2), 1e-6))});
    auto& sig = sketch.base_signatures[0];
    sig.growth_log = {{0, 100}, {1, 20}, {2, 30}};
    sig.num_points = 150;
    sketch.chunks_processed = 6;

    // A cluster born at chunk 2 that stays silent during chunks 3..5.
    auto late = make_sig(40, 50, 50, regularize(Matrix::Identity(2, 2), 1e-6), 2);
    late.id = sketch.next_cluster_id++;
    sketch.base_signatures.push_back(late);

    const auto report = drift_report(sketch);
    REQUIRE(report.size() == 2);

    CHECK(report[0].cumulative_points == std::vector<std::int64_t>{100, 120, 150, 150, 150, 150});
    for (std::size_t i = 1; i <= 2; ++i) {
        CHECK(report[0].cumulative_points[i] > report[0].cumulative_points[i - 1]);
    }

    CHECK(report[1].created_at_chunk == 2);
    CHECK(report[1].cumulative_points == std::vector<std::int64_t>{0, 0, 40, 40, 40, 40});
}

TEST_CASE("apply_chunk is deterministic") {
    Rng rng(443);
    const Matrix pts = oracle::random_points(80, 2, rng, 0.0, 10.0);
    auto build = [&]() {
        auto sketch = sketch_of({
            oracle::signature_from_points(pts.topRows(40), 0, 0),
            oracle::signature_from_points(pts.bottomRows(40), 0, 0),
        });
        for (auto& sig : sketch.base_signatures) {
            sig.covariance = regularize(sig.covariance, 1e-6);
        }
        auto chunk_sig = oracle::signature_from_points(pts.middleRows(20, 30), 0, 1);
        chunk_sig.covariance = regularize(chunk_sig.covariance, 1e-6);
        apply_chunk(sketch, clustering_of({chunk_sig}, 1), MergeThresholds{});
        return sketch;
    };
    const auto a = build();
    const auto b = build();
    REQUIRE(a.base_signatures.size() == b.base_signatures.size());
    for (std::size_t i = 0; i < a.base_signatures.size(); ++i) {
        CHECK(a.base_signatures[i].mean == b.base_signatures[i].mean);
        CHECK(a.base_signatures[i].covariance == b.base_signatures[i].covariance);
    }
}
