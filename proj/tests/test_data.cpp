// Data layer: IDX parsing against hand-built bytes, CSV loading and label
// remapping, noise synthesis (SNR accounting, blur taps, contrast), k-fold
// partition properties, and the minibatch stream.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "afs/bytes.hpp"
#include "afs/data.hpp"
#include "afs/error.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <set>

using afs::Matrix;

namespace {

void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

std::string write_images(const std::vector<unsigned char>& pixels, std::uint32_t n,
                         std::uint32_t rows, std::uint32_t cols, const std::string& stem) {
    std::vector<unsigned char> bytes;
    put_u32_be(bytes, 0x00000803u);
    put_u32_be(bytes, n);
    put_u32_be(bytes, rows);
    put_u32_be(bytes, cols);
    bytes.insert(bytes.end(), pixels.begin(), pixels.end());
    const std::string path = testutil::temp_path(stem);
    afs::write_binary_file_atomic(path, bytes);
    return path;
}

std::string write_labels(const std::vector<unsigned char>& labels, const std::string& stem) {
    std::vector<unsigned char> bytes;
    put_u32_be(bytes, 0x00000801u);
    put_u32_be(bytes, static_cast<std::uint32_t>(labels.size()));
    bytes.insert(bytes.end(), labels.begin(), labels.end());
    const std::string path = testutil::temp_path(stem);
    afs::write_binary_file_atomic(path, bytes);
    return path;
}

std::string write_text(const std::string& text, const std::string& stem) {
    const std::string path = testutil::temp_path(stem);
    afs::write_text_file_atomic(path, text);
    return path;
}

} // namespace

TEST_CASE("IDX loading from hand-built bytes") {
    const std::string images = write_images({0, 255, 128, 64}, 1, 2, 2, "img");
    const std::string labels = write_labels({3}, "lbl");
    const afs::Dataset ds = afs::load_idx(images, labels);
    CHECK(ds.sample_count() == 1);
    CHECK(ds.feature_count() == 4);
    CHECK(ds.image_rows == 2);
    CHECK(ds.image_cols == 2);
    CHECK(ds.features(0, 0) == 0.0);
    CHECK(ds.features(0, 1) == 1.0);
    CHECK(ds.features(0, 2) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(ds.features(0, 3) == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
    CHECK(ds.labels == std::vector<int>{3});
    CHECK(ds.class_count == 4);  // labels run 0..max
    std::filesystem::remove(images);
    std::filesystem::remove(labels);
}

TEST_CASE("IDX rejects corrupted headers and mismatched counts") {
    const std::string ok_images = write_images({0, 0, 0, 0}, 1, 2, 2, "img_ok");
    const std::string ok_labels = write_labels({0}, "lbl_ok");

    std::vector<unsigned char> bad;
    put_u32_be(bad, 0x00000777u);
    const std::string bad_magic = testutil::temp_path("bad_magic");
    afs::write_binary_file_atomic(bad_magic, bad);
    CHECK_THROWS_AS(afs::load_idx(bad_magic, ok_labels), afs::DataError);

    // header claims 2 images but pixels for 1
    const std::string short_file = write_images({0, 0, 0, 0}, 2, 2, 2, "img_short");
    CHECK_THROWS_AS(afs::load_idx(short_file, ok_labels), afs::DataError);

    // image/label count mismatch
    const std::string two_labels = write_labels({0, 1}, "lbl_two");
    CHECK_THROWS_AS(afs::load_idx(ok_images, two_labels), afs::DataError);

    CHECK_THROWS_AS(afs::load_idx(testutil::temp_path("absent"), ok_labels), afs::DataError);

    for (const std::string& p : {ok_images, ok_labels, bad_magic, short_file, two_labels})
        std::filesystem::remove(p);
}

TEST_CASE("IDX save/load round-trips through 8-bit quantization") {
    afs::Dataset ds = testutil::tiny_dataset(5, 6, 3, 71);
    ds.image_rows = 2;
    ds.image_cols = 3;
    const std::string images = testutil::temp_path("rt_img");
    const std::string labels = testutil::temp_path("rt_lbl");
    afs::save_idx(ds, images, labels);
    const afs::Dataset back = afs::load_idx(images, labels);
    CHECK(back.labels == ds.labels);
    CHECK(back.image_rows == 2);
    CHECK(back.image_cols == 3);
    for (std::size_t i = 0; i < ds.features.size(); ++i) {
        const double q = std::lround(ds.features.data()[i] * 255.0) / 255.0;
        CHECK(back.features.data()[i] == doctest::Approx(q).epsilon(1e-15));
    }
    // saving the loaded copy reproduces the files byte for byte
    const std::string images2 = testutil::temp_path("rt_img2");
    const std::string labels2 = testutil::temp_path("rt_lbl2");
    afs::save_idx(back, images2, labels2);
    CHECK(afs::read_binary_file(images) == afs::read_binary_file(images2));
    CHECK(afs::read_binary_file(labels) == afs::read_binary_file(labels2));
    for (const std::string& p : {images, labels, images2, labels2}) std::filesystem::remove(p);
}

TEST_CASE("CSV loading remaps labels by first appearance") {
    const std::string path = write_text(
        "f1,label,f2\n"
        "0.5,7,1.0\n"
        "0.25,7,0.75\n"
        "1.0,9,0.0\n",
        "table.csv");
    const afs::Dataset ds = afs::load_csv(path, "label");
    CHECK(ds.sample_count() == 3);
    CHECK(ds.feature_count() == 2);
    CHECK(ds.labels == std::vector<int>{0, 0, 1});
    CHECK(ds.class_count == 2);
    CHECK(ds.features(0, 0) == 0.5);
    CHECK(ds.features(0, 1) == 1.0);  // label column removed from the middle
    CHECK(ds.features(2, 1) == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("CSV errors carry the file position") {
    const std::string missing_col = write_text("a,b\n1,2\n", "m.csv");
    CHECK_THROWS_AS(afs::load_csv(missing_col, "label"), afs::DataError);

    const std::string ragged = write_text("a,label\n1,0\n1,0,9\n", "r.csv");
    CHECK_THROWS_AS(afs::load_csv(ragged, "label"), afs::DataError);
    try {
        afs::load_csv(ragged, "label");
    } catch (const afs::DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }

    const std::string bad_cell = write_text("a,label\nx.y,0\n", "b.csv");
    try {
        afs::load_csv(bad_cell, "label");
        FAIL("expected DataError");
    } catch (const afs::DataError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
        CHECK(std::string(e.what()).find("x.y") != std::string::npos);
    }

    for (const std::string& p : {missing_col, ragged, bad_cell}) std::filesystem::remove(p);
}

TEST_CASE("CSV accepts CRLF line endings") {
    const std::string path = write_text("a,label\r\n0.5,1\r\n0.25,0\r\n", "crlf.csv");
    const afs::Dataset ds = afs::load_csv(path, "label");
    CHECK(ds.sample_count() == 2);
    CHECK(ds.features(1, 0) == 0.25);
    std::filesystem::remove(path);
}

TEST_CASE("additive noise hits the requested SNR before clamping") {
    const afs::Dataset ds = testutil::tiny_dataset(400, 30, 2, 81);
    afs::NoiseInfo info;
    const afs::Dataset noisy = afs::synthesize_awgn(ds, 10.0, 5, &info);
    CHECK(info.target_snr_db == 10.0);
    CHECK(std::abs(info.achieved_snr_db - 10.0) < 0.5);
    CHECK(noisy.name == "tiny-awgn");
    CHECK(noisy.labels == ds.labels);
    double lo = 1e300, hi = -1e300;
    bool changed = false;
    for (std::size_t i = 0; i < noisy.features.size(); ++i) {
        lo = std::min(lo, noisy.features.data()[i]);
        hi = std::max(hi, noisy.features.data()[i]);
        changed = changed || noisy.features.data()[i] != ds.features.data()[i];
    }
    CHECK(changed);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);

    // same seed, same noise; different seed, different noise
    const afs::Dataset again = afs::synthesize_awgn(ds, 10.0, 5, nullptr);
    CHECK(again.features == noisy.features);
    const afs::Dataset other = afs::synthesize_awgn(ds, 10.0, 6, nullptr);
    CHECK_FALSE(other.features == noisy.features);

    // infinite SNR is the identity
    const double inf = std::numeric_limits<double>::infinity();
    const afs::Dataset clean = afs::synthesize_awgn(ds, inf, 5, &info);
    CHECK(clean.features == ds.features);
}

TEST_CASE("motion blur averages along the kernel with zero padding") {
    afs::Dataset ds;
    ds.name = "img";
    ds.features = Matrix::from_rows({{0.0, 0.6, 0.0, 0.9, 0.0, 0.0, 0.0, 0.3, 0.0}});
    ds.labels = {0};
    ds.class_count = 1;
    ds.image_rows = 3;
    ds.image_cols = 3;

    // length 1: single centered tap, identity
    const afs::Dataset same = afs::synthesize_motion_blur(ds, 1, 30.0);
    CHECK(same.features == ds.features);

    // length 3 at angle 0: horizontal mean of left/center/right, zero-padded
    const afs::Dataset blurred = afs::synthesize_motion_blur(ds, 3, 0.0);
    const Matrix& in = ds.features;
    auto at = [&](std::size_t r, std::size_t c) { return in(0, r * 3 + c); };
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) {
            const double left = c > 0 ? at(r, c - 1) : 0.0;
            const double right = c < 2 ? at(r, c + 1) : 0.0;
            const double want = (left + at(r, c) + right) / 3.0;
            CHECK(blurred.features(0, r * 3 + c) == doctest::Approx(want).epsilon(1e-15));
        }
    CHECK(blurred.name == "img-mb");

    afs::Dataset flat = ds;
    flat.image_rows = flat.image_cols = 0;  // not an image any more
    CHECK_THROWS_AS(afs::synthesize_motion_blur(flat, 3, 0.0), afs::DataError);
    CHECK_THROWS_AS(afs::synthesize_motion_blur(ds, 0, 0.0), afs::ConfigError);
}

TEST_CASE("contrast reduction squeezes toward mid-gray before adding noise") {
    const afs::Dataset ds = testutil::tiny_dataset(50, 8, 2, 91);
    const double inf = std::numeric_limits<double>::infinity();
    const afs::Dataset squeezed = afs::synthesize_rc_awgn(ds, 0.5, inf, 3, nullptr);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        CHECK(squeezed.features.data()[i] ==
              doctest::Approx(0.5 + 0.5 * (ds.features.data()[i] - 0.5)).epsilon(1e-15));
    CHECK(squeezed.name == "tiny-rcawgn");

    CHECK_THROWS_AS(afs::synthesize_rc_awgn(ds, 0.0, 10.0, 3, nullptr), afs::ConfigError);
    CHECK_THROWS_AS(afs::synthesize_rc_awgn(ds, 1.5, 10.0, 3, nullptr), afs::ConfigError);
}

TEST_CASE("k-fold splits partition every repeat") {
    const afs::SplitPlan plan = afs::kfold_splits(23, 4, 3, 17);
    CHECK(plan.repeats == 3);
    CHECK(plan.folds == 4);
    CHECK_FALSE(plan.stratified);
    for (std::size_t r = 0; r < 3; ++r) {
        std::vector<std::size_t> all;
        for (std::size_t f = 0; f < 4; ++f) {
            const auto& test = plan.test_indices[r][f];
            CHECK(std::is_sorted(test.begin(), test.end()));
            // folds differ in size by at most one
            CHECK(test.size() >= 23 / 4);
            CHECK(test.size() <= 23 / 4 + 1);
            all.insert(all.end(), test.begin(), test.end());

            const std::vector<std::size_t> train = plan.train_indices(r, f);
            CHECK(train.size() + test.size() == 23);
            std::set<std::size_t> overlap;
            std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                                  std::inserter(overlap, overlap.begin()));
            CHECK(overlap.empty());
        }
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> want(23);
        std::iota(want.begin(), want.end(), 0);
        CHECK(all == want);
    }
    // repeats shuffle differently
    CHECK(plan.test_indices[0][0] != plan.test_indices[1][0]);
}

TEST_CASE("stratified splits balance classes and fall back when impossible") {
    std::vector<int> labels(30);
    for (std::size_t i = 0; i < 30; ++i) labels[i] = static_cast<int>(i % 3);
    const afs::SplitPlan plan = afs::kfold_splits(30, 5, 2, 19, &labels);
    CHECK(plan.stratified);
    CHECK_FALSE(plan.fallback_warning);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t f = 0; f < 5; ++f) {
            int per_class[3] = {0, 0, 0};
            for (std::size_t idx : plan.test_indices[r][f]) ++per_class[labels[idx]];
            CHECK(per_class[0] == 2);
            CHECK(per_class[1] == 2);
            CHECK(per_class[2] == 2);
        }

    // a class smaller than the fold count forces the unstratified fallback
    std::vector<int> rare(10, 0);
    rare[0] = 1;
    const afs::SplitPlan fallback = afs::kfold_splits(10, 3, 1, 19, &rare);
    CHECK_FALSE(fallback.stratified);
    CHECK(fallback.fallback_warning);

    CHECK_THROWS_AS(afs::kfold_splits(3, 5, 1, 19), afs::ConfigError);
    CHECK_THROWS_AS(afs::kfold_splits(10, 1, 1, 19), afs::ConfigError);
    CHECK_THROWS_AS(afs::kfold_splits(10, 3, 0, 19), afs::ConfigError);
}

TEST_CASE("batch iterator walks a fresh permutation each epoch") {
    afs::BatchIterator it(10, 4, 23);
    std::vector<std::size_t> epoch;
    std::vector<std::size_t> sizes;
    for (int b = 0; b < 3; ++b) {
        const std::vector<std::size_t>& batch = it.next();
        sizes.push_back(batch.size());
        epoch.insert(epoch.end(), batch.begin(), batch.end());
    }
    CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
    std::vector<std::size_t> sorted = epoch;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> want(10);
    std::iota(want.begin(), want.end(), 0);
    CHECK(sorted == want);

    // second epoch: a different permutation (hugely likely), same multiset
    std::vector<std::size_t> epoch2;
    for (int b = 0; b < 3; ++b) {
        const std::vector<std::size_t>& batch = it.next();
        epoch2.insert(epoch2.end(), batch.begin(), batch.end());
    }
    std::vector<std::size_t> sorted2 = epoch2;
    std::sort(sorted2.begin(), sorted2.end());
    CHECK(sorted2 == want);
    CHECK(epoch2 != epoch);

    // seeded reproducibility
    afs::BatchIterator again(10, 4, 23);
    const std::vector<std::size_t> first(epoch.begin(), epoch.begin() + 4);
    CHECK(again.next() == first);
}

TEST_CASE("gather utilities slice by row index with bounds checks") {
    const afs::Dataset ds = testutil::tiny_dataset(6, 3, 2, 99);
    const afs::Dataset sub = afs::gather_samples(ds, {4, 1});
    CHECK(sub.sample_count() == 2);
    CHECK(sub.class_count == ds.class_count);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(sub.features(0, j) == ds.features(4, j));
        CHECK(sub.features(1, j) == ds.features(1, j));
    }
    CHECK(sub.labels[0] == ds.labels[4]);
    CHECK_THROWS_AS(afs::gather_rows(ds.features, {6}), std::invalid_argument);
}

TEST_CASE("dataset validation catches shape and label problems") {
    afs::Dataset ds = testutil::tiny_dataset(4, 3, 2, 101);
    CHECK_NOTHROW(ds.validate());
    afs::Dataset bad = ds;
    bad.labels.pop_back();
    CHECK_THROWS_AS(bad.validate(), afs::DataError);
    bad = ds;
    bad.labels[0] = 5;
    CHECK_THROWS_AS(bad.validate(), afs::DataError);
    bad = ds;
    bad.features(0, 0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), afs::DataError);
    bad = ds;
    bad.image_rows = 2;
    bad.image_cols = 2;  // 4 != 3 features
    CHECK_THROWS_AS(bad.validate(), afs::DataError);
}
