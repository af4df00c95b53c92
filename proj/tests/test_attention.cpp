// Attention subnetwork invariants: output range, weight aggregation,
// batch-partition invariance, deterministic parallel backward.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "afs/attention.hpp"
#include "afs/error.hpp"
#include "helpers.hpp"

#include <omp.h>

#include <utility>
#include <vector>

using afs::Matrix;

namespace {

afs::AttentionParams make_params(std::size_t d, std::size_t extract, std::size_t depth,
                                 std::size_t width, std::uint64_t seed) {
    afs::AttentionConfig cfg;
    cfg.input_dim = d;
    cfg.extract_dim = extract;
    cfg.hidden_layers = depth;
    cfg.hidden_width = width;
    afs::AttentionParams params(cfg);
    params.init(seed);
    return params;
}

} // namespace

TEST_CASE("attention values are strictly inside (0,1)") {
    for (std::size_t depth : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
        CAPTURE(depth);
        afs::AttentionParams params = make_params(6, 5, depth, 3, 11 + depth);
        const Matrix x = testutil::random_matrix(9, 6, 21);
        const Matrix a = afs::attention_forward(params, x, nullptr);
        REQUIRE(a.rows() == 9);
        REQUIRE(a.cols() == 6);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.data()[i] > 0.0);
            CHECK(a.data()[i] < 1.0);
        }
    }
}

TEST_CASE("feature_weights are the column means, in [0,1]") {
    const Matrix a = Matrix::from_rows({{0.2, 0.8}, {0.4, 0.6}, {0.9, 0.1}});
    const std::vector<double> s = afs::feature_weights(a);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == doctest::Approx((0.2 + 0.4 + 0.9) / 3.0).epsilon(1e-15));
    CHECK(s[1] == doctest::Approx((0.8 + 0.6 + 0.1) / 3.0).epsilon(1e-15));
}

TEST_CASE("dataset weights do not depend on the batch partition") {
    afs::AttentionParams params = make_params(7, 6, 1, 4, 31);
    const Matrix x = testutil::random_matrix(23, 7, 32);
    const std::vector<double> whole = afs::compute_dataset_weights(params, x, 23);
    const std::vector<double> chunked = afs::compute_dataset_weights(params, x, 5);
    const std::vector<double> single = afs::compute_dataset_weights(params, x, 1);
    REQUIRE(whole.size() == 7);
    for (std::size_t j = 0; j < 7; ++j) {
        CHECK(whole[j] == chunked[j]);
        CHECK(whole[j] == single[j]);
        CHECK(whole[j] > 0.0);
        CHECK(whole[j] < 1.0);
    }
}

TEST_CASE("forward and backward are bit-identical across thread counts") {
    afs::AttentionParams reference = make_params(8, 6, 1, 4, 41);
    const Matrix x = testutil::random_matrix(12, 8, 42);
    afs::AttentionCache cache;
    const Matrix a_ref = afs::attention_forward(reference, x, &cache);
    const Matrix grad = testutil::random_matrix(12, 8, 43, -1.0, 1.0);
    afs::attention_backward(reference, x, cache, grad);

    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 4}) {
        CAPTURE(threads);
        omp_set_num_threads(threads);
        afs::AttentionParams params = make_params(8, 6, 1, 4, 41);
        afs::AttentionCache c2;
        const Matrix a = afs::attention_forward(params, x, &c2);
        CHECK(a == a_ref);
        afs::attention_backward(params, x, c2, grad);
        std::vector<const afs::ParamTensor*> got = std::as_const(params).tensors();
        std::vector<const afs::ParamTensor*> want = std::as_const(reference).tensors();
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CAPTURE(got[i]->name);
            CHECK(got[i]->grad == want[i]->grad);
        }
    }
    omp_set_num_threads(saved);
}

TEST_CASE("input width must match the configuration") {
    afs::AttentionParams params = make_params(5, 4, 1, 3, 51);
    const Matrix wrong = testutil::random_matrix(3, 4, 52);
    CHECK_THROWS_AS(afs::attention_forward(params, wrong, nullptr), std::invalid_argument);
}

TEST_CASE("configuration validation") {
    afs::AttentionConfig cfg;
    cfg.input_dim = 0;
    CHECK_THROWS_AS(cfg.validate(), afs::ConfigError);
    cfg.input_dim = 4;
    cfg.extract_dim = 0;
    CHECK_THROWS_AS(cfg.validate(), afs::ConfigError);
    cfg.extract_dim = 8;
    cfg.hidden_layers = 1;
    cfg.hidden_width = 0;
    CHECK_THROWS_AS(cfg.validate(), afs::ConfigError);
}

TEST_CASE("parameter_count matches the tensor table") {
    afs::AttentionParams params = make_params(4, 3, 2, 2, 61);
    std::size_t total = 0;
    for (const afs::ParamTensor* t : std::as_const(params).tensors()) total += t->value.size();
    CHECK(params.parameter_count() == total);
    // extraction layer + per feature: 2 hidden layers and 2 heads
    // e: 4*3+3; per net: (3*2+2) + (2*2+2) + 2*(2*1+1)
    CHECK(total == (4 * 3 + 3) + 4 * ((3 * 2 + 2) + (2 * 2 + 2) + 2 * (2 * 1 + 1)));
}
