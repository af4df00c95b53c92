// Checkpoint container: round-trip fidelity, corruption detection, part
// selection, and optimizer-state hygiene after loading.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "afs/bytes.hpp"
#include "afs/checkpoint.hpp"
#include "afs/error.hpp"
#include "afs/trainer.hpp"
#include "helpers.hpp"

#include <filesystem>
#include <utility>

namespace {

afs::AfsModel trained_model(std::uint64_t seed) {
    const afs::Dataset ds = testutil::tiny_dataset(24, 5, 3, seed);
    afs::TrainConfig cfg;
    cfg.steps = 12;
    cfg.batch_size = 6;
    cfg.seed = seed;
    cfg.attention.extract_dim = 4;
    cfg.attention.hidden_width = 3;
    cfg.learner.hidden = {7};
    return afs::train_afs(ds, cfg).model;
}

} // namespace

TEST_CASE("save, load, save again: the two files are byte-identical") {
    const afs::AfsModel model = trained_model(3);
    const std::string p1 = testutil::temp_path("ck1");
    const std::string p2 = testutil::temp_path("ck2");
    afs::save_checkpoint(model, p1);

    afs::AfsModel other = trained_model(4);  // same shapes, different values
    const afs::CheckpointInfo info = afs::load_checkpoint(other, p1);
    CHECK(info.has_attention);
    CHECK(info.has_learner);
    afs::save_checkpoint(other, p2);

    CHECK(afs::read_binary_file(p1) == afs::read_binary_file(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("loading restores float32-rounded values and clears optimizer state") {
    afs::AfsModel model = trained_model(5);
    const std::string path = testutil::temp_path("ck3");
    afs::save_checkpoint(model, path);

    afs::AfsModel loaded = trained_model(6);
    afs::load_checkpoint(loaded, path);
    const auto want = std::as_const(model).tensors();
    const auto got = std::as_const(loaded).tensors();
    REQUIRE(want.size() == got.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CAPTURE(want[i]->name);
        REQUIRE(got[i]->value.same_shape(want[i]->value));
        for (std::size_t j = 0; j < want[i]->value.size(); ++j) {
            const double rounded =
                static_cast<double>(static_cast<float>(want[i]->value.data()[j]));
            CHECK(got[i]->value.data()[j] == rounded);
        }
        for (std::size_t j = 0; j < got[i]->adam_m.size(); ++j) {
            CHECK(got[i]->adam_m.data()[j] == 0.0);
            CHECK(got[i]->adam_v.data()[j] == 0.0);
            CHECK(got[i]->grad.data()[j] == 0.0);
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("info reports parts and architecture without loading tensors") {
    const afs::AfsModel model = trained_model(7);
    const std::string path = testutil::temp_path("ck4");
    afs::save_checkpoint(model, path, afs::CheckpointPart::Learner);
    const afs::CheckpointInfo info = afs::read_checkpoint_info(path);
    CHECK_FALSE(info.has_attention);
    CHECK(info.has_learner);
    CHECK(info.learner.input_dim == 5);
    CHECK(info.learner.class_count == 3);
    REQUIRE(info.learner.hidden.size() == 1);
    CHECK(info.learner.hidden[0] == 7);
    std::filesystem::remove(path);
}

TEST_CASE("a attention-only checkpoint cannot feed a learner load") {
    const afs::AfsModel model = trained_model(8);
    const std::string path = testutil::temp_path("ck5");
    afs::save_checkpoint(model, path, afs::CheckpointPart::Attention);
    afs::AfsModel target = trained_model(8);
    CHECK_THROWS_AS(afs::load_checkpoint(target, path, afs::CheckpointPart::Learner),
                    afs::DataError);
    CHECK_NOTHROW(afs::load_checkpoint(target, path, afs::CheckpointPart::Attention));
    std::filesystem::remove(path);
}

TEST_CASE("shape mismatches name the offending tensor") {
    const afs::AfsModel model = trained_model(9);
    const std::string path = testutil::temp_path("ck6");
    afs::save_checkpoint(model, path);

    afs::AttentionConfig acfg;
    acfg.input_dim = 5;
    acfg.extract_dim = 9;  // different extraction width
    acfg.hidden_width = 3;
    afs::LearnerConfig lcfg;
    lcfg.input_dim = 5;
    lcfg.class_count = 3;
    lcfg.hidden = {7};
    afs::AfsModel wrong(acfg, lcfg);
    wrong.init(1);
    CHECK_THROWS_AS(afs::load_checkpoint(wrong, path), afs::DataError);
    try {
        afs::load_checkpoint(wrong, path);
    } catch (const afs::DataError& e) {
        CHECK(std::string(e.what()).find("attention.e") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corruption is caught: bad magic, truncation, flipped payload byte") {
    const afs::AfsModel model = trained_model(10);
    const std::string path = testutil::temp_path("ck7");
    afs::save_checkpoint(model, path);
    const std::vector<unsigned char> good = afs::read_binary_file(path);

    afs::AfsModel target = trained_model(10);

    std::vector<unsigned char> bad_magic = good;
    bad_magic[0] ^= 0xFF;
    afs::write_binary_file_atomic(path, bad_magic);
    CHECK_THROWS_AS(afs::load_checkpoint(target, path), afs::DataError);

    std::vector<unsigned char> truncated(good.begin(), good.begin() + good.size() / 2);
    afs::write_binary_file_atomic(path, truncated);
    CHECK_THROWS_AS(afs::load_checkpoint(target, path), afs::DataError);

    std::vector<unsigned char> flipped = good;
    flipped[good.size() - 16] ^= 0x01;  // inside the float payload
    afs::write_binary_file_atomic(path, flipped);
    CHECK_THROWS_AS(afs::load_checkpoint(target, path), afs::DataError);

    // the pristine bytes still load
    afs::write_binary_file_atomic(path, good);
    CHECK_NOTHROW(afs::load_checkpoint(target, path));
    std::filesystem::remove(path);
}

TEST_CASE("missing checkpoint file is a data error") {
    afs::AfsModel model = trained_model(11);
    CHECK_THROWS_AS(afs::load_checkpoint(model, testutil::temp_path("nope")), afs::DataError);
    CHECK_THROWS_AS(afs::read_checkpoint_info(testutil::temp_path("nope2")), afs::DataError);
}
