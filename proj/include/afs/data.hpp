#pragma once

#include "afs/matrix.hpp"
#include "afs/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afs {

// A classification dataset: m samples by d features plus integer labels.
struct Dataset {
    std::string name;
    Matrix features;         // m x d, finite values
    std::vector<int> labels; // in [0, class_count)
    std::size_t class_count = 0;
    std::size_t image_rows = 0; // set when samples are row-major images
    std::size_t image_cols = 0;

    std::size_t sample_count() const { return features.rows(); }
    std::size_t feature_count() const { return features.cols(); }

    // Throws DataError when any invariant fails (label range, finiteness,
    // label/sample count agreement, emptiness).
    void validate() const;
};

// IDX image/label pair (big-endian header, u8 payload). Pixels are scaled
// to [0,1] by dividing by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Persists a dataset in the same IDX layout; pixel values are clamped to
// [0,1] and quantized to the nearest u8.
void save_idx(const Dataset& dataset, const std::string& images_path,
              const std::string& labels_path);

// Comma-separated numeric table with a header row. The named column becomes
// the label; distinct label values are re-indexed to 0..c-1 in order of
// first appearance. Remaining columns become features in header order.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Details of one noise synthesis, for manifests and tests.
struct NoiseInfo {
    double target_snr_db = 0.0;
    double achieved_snr_db = 0.0; // measured on the generated noise, pre-clamping
    std::uint64_t seed = 0;
};

// Adds zero-mean Gaussian noise with variance signal_power / 10^(snr_db/10),
// then clamps to [0,1]. snr_db = +infinity leaves the data untouched.
Dataset synthesize_awgn(const Dataset& dataset, double snr_db, std::uint64_t seed,
                        NoiseInfo* info = nullptr);

// Convolves each image with a normalized linear-motion kernel (length taps
// along the given angle, entries summing to 1), zero-padded at borders.
Dataset synthesize_motion_blur(const Dataset& dataset, std::size_t kernel_length,
                               double angle_deg);

// Pulls pixels toward 0.5 by the contrast factor, then applies AWGN.
Dataset synthesize_rc_awgn(const Dataset& dataset, double contrast_factor, double snr_db,
                           std::uint64_t seed, NoiseInfo* info = nullptr);

// Repeated k-fold cross-validation plan. Folds within a repeat are disjoint,
// cover every index, and differ in size by at most one.
struct SplitPlan {
    std::size_t sample_count = 0;
    std::size_t repeats = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    bool stratified = false;        // folds balanced per class
    bool fallback_warning = false;  // stratification requested but impossible
    // test_indices[repeat][fold], ascending within each fold
    std::vector<std::vector<std::vector<std::size_t>>> test_indices;

    // All indices outside the given test fold, ascending.
    std::vector<std::size_t> train_indices(std::size_t repeat, std::size_t fold) const;
};

// Stratifies by label when labels are given and every class has at least
// `folds` members; otherwise falls back to plain shuffling and sets the
// warning flag.
SplitPlan kfold_splits(std::size_t m, std::size_t folds, std::size_t repeats,
                       std::uint64_t seed, const std::vector<int>* labels = nullptr);

// Deterministic minibatch index stream: shuffles 0..m-1 once per epoch and
// hands out consecutive slices; the last slice of an epoch may be short.
class BatchIterator {
  public:
    BatchIterator(std::size_t m, std::size_t batch_size, std::uint64_t seed);

    // Indices of the next batch; valid until the following call.
    const std::vector<std::size_t>& next();

  private:
    std::vector<std::size_t> order_;
    std::vector<std::size_t> batch_;
    std::size_t batch_size_;
    std::size_t pos_;
    Rng rng_;
};

// Row/label gathers used by batching and cross-validation.
Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& indices);
std::vector<int> gather_labels(const std::vector<int>& labels,
                               const std::vector<std::size_t>& indices);
Dataset gather_samples(const Dataset& dataset, const std::vector<std::size_t>& indices);

} // namespace afs
