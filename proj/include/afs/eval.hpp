#pragma once

#include "afs/data.hpp"
#include "afs/matrix.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace afs {

// Features ordered by descending weight; equal weights keep ascending
// feature-index order.
struct FeatureRanking {
    std::vector<std::size_t> order;
    std::vector<double> weights; // input echoed for export/inspection
};

FeatureRanking rank_features(const std::vector<double>& weights);

// Keeps the K best-ranked feature columns, in ranking order. Labels are
// untouched; image geometry no longer applies and is cleared.
Dataset select_top_k(const Dataset& dataset, const FeatureRanking& ranking, std::size_t k);

// Benchmark classifier: one rectifier hidden layer, Adam, cross-entropy.
// Every method's ranking is scored by retraining this same model.
struct EvalConfig {
    std::size_t hidden = 500;
    std::size_t steps = 3000;
    std::size_t batch_size = 100;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

// Trains a fresh classifier on train and returns accuracy on test.
double benchmark_nn_eval(const Dataset& train, const Dataset& test, const EvalConfig& config);

struct CurvePoint {
    std::size_t k = 0;
    double accuracy = 0.0;
};

struct AccuracyCurve {
    std::vector<CurvePoint> points; // ascending K
    std::string dataset;
    std::string method;
    std::uint64_t seed = 0;
};

struct KGrid {
    std::size_t k_min = 15;
    std::size_t k_max = 295;
    std::size_t k_step = 10;

    std::vector<std::size_t> values() const; // k_min, k_min+k_step, ..., <= k_max
};

// One benchmark run per K on the top-K columns; each point uses a seed
// derived from (config.seed, K), so the curve does not depend on evaluation
// order.
AccuracyCurve accuracy_curve(const Dataset& train, const Dataset& test,
                             const FeatureRanking& ranking, const KGrid& grid,
                             const EvalConfig& config);

// Mean accuracy over points with k_lo <= K <= k_hi.
double average_accuracy(const AccuracyCurve& curve, std::size_t k_lo = 15,
                        std::size_t k_hi = 85);

// Produces feature weights from a training split only.
using WeightSelector = std::function<std::vector<double>(const Dataset& train_split)>;

// Per (repeat, fold): selector weights on the training split, then a curve
// scored on the held-out fold; accuracies averaged per K across all cells.
AccuracyCurve cross_validated_curve(const Dataset& dataset, const SplitPlan& plan,
                                    const WeightSelector& selector, const KGrid& grid,
                                    const EvalConfig& config);

// CSV with header "K,accuracy".
std::string curve_csv(const AccuracyCurve& curve);

// Grayscale PGM (P5, maxval 255): each pixel's gray level encodes the
// smallest tier in k_tiers whose top-K set contains that feature (darker =
// ranked earlier); features outside every tier stay white.
void export_heatmap(const FeatureRanking& ranking, const std::vector<std::size_t>& k_tiers,
                    std::size_t image_rows, std::size_t image_cols, const std::string& path);

// CSV "feature_index,<method>", one row per feature in index order.
void export_weights(const std::vector<double>& weights, const std::string& method,
                    const std::string& path);

struct ImportedWeights {
    std::vector<double> weights;
    std::string method;
};

ImportedWeights import_weights(const std::string& path);

// Spearman rank correlation with average ranks for ties; 0 when either
// input has no rank variation.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace afs
