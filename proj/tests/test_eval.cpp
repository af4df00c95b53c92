// Ranking, top-K selection, the benchmark evaluator, curve assembly,
// artifact round-trips (weights CSV, PGM tiers), and rank correlation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "afs/bytes.hpp"
#include "afs/error.hpp"
#include "afs/eval.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using afs::Matrix;

TEST_CASE("ranking is descending with ties broken by index") {
    const afs::FeatureRanking r = afs::rank_features({0.3, 0.9, 0.3, 0.1});
    CHECK(r.order == std::vector<std::size_t>{1, 0, 2, 3});
    CHECK(r.weights == std::vector<double>{0.3, 0.9, 0.3, 0.1});
}

TEST_CASE("top-K selection keeps ranked columns in rank order") {
    afs::Dataset ds = testutil::tiny_dataset(4, 5, 2, 7);
    const afs::FeatureRanking r = afs::rank_features({0.1, 0.5, 0.2, 0.9, 0.3});
    const afs::Dataset top2 = afs::select_top_k(ds, r, 2);
    CHECK(top2.feature_count() == 2);
    CHECK(top2.name == "tiny-top2");
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(top2.features(i, 0) == ds.features(i, 3));  // best feature
        CHECK(top2.features(i, 1) == ds.features(i, 1));  // runner-up
    }
    CHECK(top2.labels == ds.labels);
    CHECK_THROWS_AS(afs::select_top_k(ds, r, 0), std::invalid_argument);
    CHECK_THROWS_AS(afs::select_top_k(ds, r, 6), std::invalid_argument);
}

TEST_CASE("K grid enumeration") {
    const afs::KGrid grid{15, 65, 10};
    CHECK(grid.values() == std::vector<std::size_t>{15, 25, 35, 45, 55, 65});
    const afs::KGrid tight{8, 8, 10};
    CHECK(tight.values() == std::vector<std::size_t>{8});
    CHECK_THROWS_AS((afs::KGrid{10, 5, 5}.values()), std::invalid_argument);
    CHECK_THROWS_AS((afs::KGrid{5, 10, 0}.values()), std::invalid_argument);
    CHECK_THROWS_AS((afs::KGrid{0, 10, 5}.values()), std::invalid_argument);
}

TEST_CASE("the benchmark evaluator learns separable data and is deterministic") {
    const afs::Dataset train = testutil::separable_dataset(80, 6, 3, 21);
    const afs::Dataset test = testutil::separable_dataset(30, 6, 3, 22);
    afs::EvalConfig cfg;
    cfg.hidden = 16;
    cfg.steps = 600;
    cfg.batch_size = 16;
    cfg.seed = 5;
    const double acc = afs::benchmark_nn_eval(train, test, cfg);
    CHECK(acc >= 0.9);
    CHECK(afs::benchmark_nn_eval(train, test, cfg) == acc);
}

TEST_CASE("curve points are independent of the grid they sit on") {
    const afs::Dataset train = testutil::separable_dataset(60, 8, 2, 31);
    const afs::Dataset test = testutil::separable_dataset(24, 8, 2, 32);
    const afs::FeatureRanking rank =
        afs::rank_features({0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1});
    afs::EvalConfig cfg;
    cfg.hidden = 8;
    cfg.steps = 60;
    cfg.batch_size = 10;
    cfg.seed = 13;

    const afs::AccuracyCurve both = afs::accuracy_curve(train, test, rank, {2, 6, 4}, cfg);
    REQUIRE(both.points.size() == 2);
    const afs::AccuracyCurve first = afs::accuracy_curve(train, test, rank, {2, 2, 1}, cfg);
    const afs::AccuracyCurve second = afs::accuracy_curve(train, test, rank, {6, 6, 1}, cfg);
    CHECK(both.points[0].k == 2);
    CHECK(both.points[0].accuracy == first.points[0].accuracy);
    CHECK(both.points[1].accuracy == second.points[0].accuracy);
}

TEST_CASE("curve rejects a grid wider than the feature count") {
    const afs::Dataset train = testutil::tiny_dataset(20, 4, 2, 41);
    const afs::Dataset test = testutil::tiny_dataset(8, 4, 2, 42);
    const afs::FeatureRanking rank = afs::rank_features({0.4, 0.3, 0.2, 0.1});
    afs::EvalConfig cfg;
    cfg.steps = 5;
    cfg.batch_size = 5;
    CHECK_THROWS_AS(afs::accuracy_curve(train, test, rank, {2, 8, 2}, cfg),
                    std::invalid_argument);
}

TEST_CASE("average accuracy restricts to the requested K band") {
    afs::AccuracyCurve curve;
    curve.points = {{10, 0.5}, {20, 0.6}, {30, 0.9}, {40, 0.8}};
    CHECK(afs::average_accuracy(curve, 20, 40) == doctest::Approx((0.6 + 0.9 + 0.8) / 3.0));
    CHECK(afs::average_accuracy(curve, 10, 40) == doctest::Approx(0.7));
    CHECK_THROWS_AS(afs::average_accuracy(curve, 50, 60), std::invalid_argument);
}

TEST_CASE("cross-validated curve averages the split cells deterministically") {
    const afs::Dataset ds = testutil::separable_dataset(36, 6, 2, 51);
    const afs::SplitPlan plan = afs::kfold_splits(36, 3, 1, 9, &ds.labels);
    afs::EvalConfig cfg;
    cfg.hidden = 8;
    cfg.steps = 40;
    cfg.batch_size = 8;
    cfg.seed = 3;
    auto constant_weights = [](const afs::Dataset& split) {
        std::vector<double> w(split.feature_count());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<double>(w.size() - i);
        return w;
    };
    const afs::AccuracyCurve a =
        afs::cross_validated_curve(ds, plan, constant_weights, {2, 4, 2}, cfg);
    REQUIRE(a.points.size() == 2);
    for (const afs::CurvePoint& p : a.points) {
        CHECK(p.accuracy >= 0.0);
        CHECK(p.accuracy <= 1.0);
    }
    const afs::AccuracyCurve b =
        afs::cross_validated_curve(ds, plan, constant_weights, {2, 4, 2}, cfg);
    CHECK(a.points[0].accuracy == b.points[0].accuracy);
    CHECK(a.points[1].accuracy == b.points[1].accuracy);
}

TEST_CASE("curve CSV serialization") {
    afs::AccuracyCurve curve;
    curve.points = {{15, 0.5}, {25, 0.625}};
    CHECK(afs::curve_csv(curve) == "K,accuracy\n15,0.5\n25,0.625\n");
}

TEST_CASE("heatmap bytes: darkest tier first, background white") {
    const afs::FeatureRanking rank = afs::rank_features({4.0, 3.0, 2.0, 1.0});
    const std::string path = testutil::temp_path("tiers.pgm");
    afs::export_heatmap(rank, {1, 2, 4}, 1, 4, path);
    const std::vector<unsigned char> bytes = afs::read_binary_file(path);
    const std::string header = "P5\n4 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(std::equal(header.begin(), header.end(), bytes.begin()));
    CHECK(bytes[header.size() + 0] == 0);    // tier 0 of 3
    CHECK(bytes[header.size() + 1] == 67);   // lround(200/3)
    CHECK(bytes[header.size() + 2] == 133);  // lround(400/3)
    CHECK(bytes[header.size() + 3] == 133);
    std::filesystem::remove(path);

    // a feature outside every tier stays background
    const std::string path2 = testutil::temp_path("tiers2.pgm");
    afs::export_heatmap(rank, {2}, 2, 2, path2);
    const std::vector<unsigned char> b2 = afs::read_binary_file(path2);
    CHECK(b2[b2.size() - 2] == 255);
    CHECK(b2[b2.size() - 1] == 255);
    std::filesystem::remove(path2);

    CHECK_THROWS_AS(afs::export_heatmap(rank, {1}, 3, 3, testutil::temp_path("x")),
                    std::invalid_argument);
    CHECK_THROWS_AS(afs::export_heatmap(rank, {9}, 1, 4, testutil::temp_path("y")),
                    std::invalid_argument);
}

TEST_CASE("weights CSV round-trips exactly") {
    const std::vector<double> w = {0.123456789012345678, 1.0 / 3.0, 0.0, 1e-17};
    const std::string path = testutil::temp_path("w.csv");
    afs::export_weights(w, "afs", path);
    const afs::ImportedWeights back = afs::import_weights(path);
    CHECK(back.method == "afs");
    REQUIRE(back.weights.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back.weights[i] == w[i]);
    std::filesystem::remove(path);

    // the method label must stay CSV-safe
    CHECK_THROWS_AS(afs::export_weights(w, "a,b", path), std::invalid_argument);
    CHECK_THROWS_AS(afs::export_weights(w, "a\nb", path), std::invalid_argument);
    CHECK_THROWS_AS(afs::export_weights(w, "", path), std::invalid_argument);
}

TEST_CASE("weights import validates header and row order") {
    const std::string bad_header = testutil::temp_path("bh.csv");
    afs::write_text_file_atomic(bad_header, "index,afs\n0,0.5\n");
    CHECK_THROWS_AS(afs::import_weights(bad_header), afs::DataError);
    std::filesystem::remove(bad_header);

    const std::string bad_order = testutil::temp_path("bo.csv");
    afs::write_text_file_atomic(bad_order, "feature_index,afs\n0,0.5\n2,0.25\n");
    CHECK_THROWS_AS(afs::import_weights(bad_order), afs::DataError);
    std::filesystem::remove(bad_order);

    CHECK_THROWS_AS(afs::import_weights(testutil::temp_path("missing.csv")), afs::DataError);
}

TEST_CASE("rank correlation: monotone, reversed, tied, and degenerate inputs") {
    CHECK(afs::spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
          doctest::Approx(1.0));
    CHECK(afs::spearman_rank_correlation({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    // any strictly increasing transform keeps rho = 1
    CHECK(afs::spearman_rank_correlation({0.1, 0.5, 0.2}, {1.0, 100.0, 2.5}) ==
          doctest::Approx(1.0));
    CHECK(afs::spearman_rank_correlation({1, 1, 1}, {1, 2, 3}) == 0.0);

    // ties get average ranks: compare against a direct Pearson on them
    const std::vector<double> a = {1.0, 2.0, 2.0, 3.0};  // ranks 1, 2.5, 2.5, 4
    const std::vector<double> b = {1.0, 2.0, 3.0, 4.0};
    const double ra[4] = {1.0, 2.5, 2.5, 4.0}, rb[4] = {1.0, 2.0, 3.0, 4.0};
    double ma = 0, mb = 0;
    for (int i = 0; i < 4; ++i) {
        ma += ra[i] / 4.0;
        mb += rb[i] / 4.0;
    }
    double num = 0, va = 0, vb = 0;
    for (int i = 0; i < 4; ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    CHECK(afs::spearman_rank_correlation(a, b) ==
          doctest::Approx(num / std::sqrt(va * vb)).epsilon(1e-12));

    CHECK_THROWS_AS(afs::spearman_rank_correlation({1, 2}, {1, 2, 3}),
                    std::invalid_argument);
}
