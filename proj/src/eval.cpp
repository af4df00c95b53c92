#include "afs/eval.hpp"

#include "afs/bytes.hpp"
#include "afs/error.hpp"
#include "afs/learner.hpp"
#include "afs/ops.hpp"
#include "afs/rng.hpp"
#include "afs/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace afs {

FeatureRanking rank_features(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("rank_features: empty weights");
    for (double w : weights)
        if (!std::isfinite(w)) throw std::invalid_argument("rank_features: non-finite weight");
    FeatureRanking ranking;
    ranking.weights = weights;
    ranking.order.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) ranking.order[i] = i;
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    return ranking;
}

Dataset select_top_k(const Dataset& dataset, const FeatureRanking& ranking, std::size_t k) {
    dataset.validate();
    if (ranking.order.size() != dataset.feature_count())
        throw std::invalid_argument("select_top_k: ranking covers " +
                                    std::to_string(ranking.order.size()) +
                                    " features, dataset has " +
                                    std::to_string(dataset.feature_count()));
    if (k == 0 || k > dataset.feature_count())
        throw std::invalid_argument("select_top_k: K=" + std::to_string(k) + " outside [1, " +
                                    std::to_string(dataset.feature_count()) + "]");
    Dataset out;
    out.name = dataset.name + "-top" + std::to_string(k);
    out.labels = dataset.labels;
    out.class_count = dataset.class_count;
    out.features = Matrix(dataset.sample_count(), k);
    for (std::size_t i = 0; i < dataset.sample_count(); ++i) {
        const double* src = dataset.features.row(i);
        double* dst = out.features.row(i);
        for (std::size_t j = 0; j < k; ++j) dst[j] = src[ranking.order[j]];
    }
    return out;
}

void EvalConfig::validate() const {
    if (hidden == 0) throw ConfigError("eval: hidden width must be positive");
    if (steps == 0) throw ConfigError("eval: steps must be positive");
    if (batch_size == 0) throw ConfigError("eval: batch_size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("eval: learning_rate must be positive");
}

double benchmark_nn_eval(const Dataset& train, const Dataset& test, const EvalConfig& config) {
    config.validate();
    train.validate();
    test.validate();
    if (train.feature_count() != test.feature_count())
        throw std::invalid_argument("benchmark: train has " +
                                    std::to_string(train.feature_count()) +
                                    " features, test has " +
                                    std::to_string(test.feature_count()));
    if (train.class_count != test.class_count)
        throw std::invalid_argument("benchmark: train has " +
                                    std::to_string(train.class_count) + " classes, test has " +
                                    std::to_string(test.class_count));

    LearnerConfig net_cfg;
    net_cfg.input_dim = train.feature_count();
    net_cfg.class_count = train.class_count;
    net_cfg.hidden = {config.hidden};
    LearnerParams net(net_cfg);
    net.init(config.seed);

    AdamConfig adam;
    adam.learning_rate = config.learning_rate;
    std::vector<ParamTensor*> params = net.tensors();
    BatchIterator batches(train.sample_count(), config.batch_size,
                          derive_seed(config.seed, "bench"));
    for (std::size_t step = 1; step <= config.steps; ++step) {
        const std::vector<std::size_t>& idx = batches.next();
        Matrix bx = gather_rows(train.features, idx);
        std::vector<int> by = gather_labels(train.labels, idx);
        StackCache cache;
        Matrix logits = stack_forward(net.layers, bx, &cache);
        Matrix dlogits = cross_entropy_grad(logits, by);
        stack_backward(net.layers, bx, cache, dlogits);
        adam_step(params, adam, static_cast<std::int64_t>(step));
    }
    Matrix logits = stack_forward(net.layers, test.features, nullptr);
    return classification_accuracy(logits, test.labels);
}

std::vector<std::size_t> KGrid::values() const {
    if (k_min == 0) throw std::invalid_argument("K grid: k_min must be positive");
    if (k_step == 0) throw std::invalid_argument("K grid: k_step must be positive");
    if (k_max < k_min) throw std::invalid_argument("K grid: k_max below k_min");
    std::vector<std::size_t> out;
    for (std::size_t k = k_min; k <= k_max; k += k_step) out.push_back(k);
    return out;
}

AccuracyCurve accuracy_curve(const Dataset& train, const Dataset& test,
                             const FeatureRanking& ranking, const KGrid& grid,
                             const EvalConfig& config) {
    const std::vector<std::size_t> ks = grid.values();
    if (grid.k_max > train.feature_count())
        throw std::invalid_argument("K grid: k_max " + std::to_string(grid.k_max) +
                                    " exceeds " + std::to_string(train.feature_count()) +
                                    " features");
    AccuracyCurve curve;
    curve.dataset = train.name;
    curve.seed = config.seed;
    curve.points.resize(ks.size());
    const std::int64_t n = static_cast<std::int64_t>(ks.size());
    // Points are independent: each gets a seed derived from (seed, K), so
    // parallel evaluation cannot change any value.
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t k = ks[static_cast<std::size_t>(i)];
        EvalConfig point_cfg = config;
        point_cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
        const Dataset rtrain = select_top_k(train, ranking, k);
        const Dataset rtest = select_top_k(test, ranking, k);
        curve.points[static_cast<std::size_t>(i)] = {k,
                                                     benchmark_nn_eval(rtrain, rtest, point_cfg)};
    }
    return curve;
}

double average_accuracy(const AccuracyCurve& curve, std::size_t k_lo, std::size_t k_hi) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const CurvePoint& p : curve.points)
        if (p.k >= k_lo && p.k <= k_hi) {
            acc += p.accuracy;
            ++n;
        }
    if (n == 0)
        throw std::invalid_argument("average_accuracy: no curve points in [" +
                                    std::to_string(k_lo) + ", " + std::to_string(k_hi) + "]");
    return acc / static_cast<double>(n);
}

AccuracyCurve cross_validated_curve(const Dataset& dataset, const SplitPlan& plan,
                                    const WeightSelector& selector, const KGrid& grid,
                                    const EvalConfig& config) {
    dataset.validate();
    if (plan.sample_count != dataset.sample_count())
        throw std::invalid_argument("cross_validated_curve: plan built for " +
                                    std::to_string(plan.sample_count) + " samples, dataset has " +
                                    std::to_string(dataset.sample_count()));
    const std::vector<std::size_t> ks = grid.values();
    std::vector<double> sums(ks.size(), 0.0);
    std::size_t cells = 0;
    for (std::size_t rep = 0; rep < plan.repeats; ++rep) {
        for (std::size_t fold = 0; fold < plan.folds; ++fold) {
            const Dataset train_split = gather_samples(dataset, plan.train_indices(rep, fold));
            const Dataset test_split =
                gather_samples(dataset, plan.test_indices.at(rep).at(fold));
            const FeatureRanking ranking = rank_features(selector(train_split));
            EvalConfig cell_cfg = config;
            cell_cfg.seed = derive_seed(config.seed, "cv" + std::to_string(rep) + "." +
                                                         std::to_string(fold));
            const AccuracyCurve cell =
                accuracy_curve(train_split, test_split, ranking, grid, cell_cfg);
            for (std::size_t i = 0; i < ks.size(); ++i) sums[i] += cell.points[i].accuracy;
            ++cells;
        }
    }
    AccuracyCurve mean;
    mean.dataset = dataset.name;
    mean.seed = config.seed;
    for (std::size_t i = 0; i < ks.size(); ++i)
        mean.points.push_back({ks[i], sums[i] / static_cast<double>(cells)});
    return mean;
}

std::string curve_csv(const AccuracyCurve& curve) {
    std::string out = "K,accuracy\n";
    char buf[64];
    for (const CurvePoint& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", p.k, p.accuracy);
        out += buf;
    }
    return out;
}

void export_heatmap(const FeatureRanking& ranking, const std::vector<std::size_t>& k_tiers,
                    std::size_t image_rows, std::size_t image_cols, const std::string& path) {
    const std::size_t d = ranking.order.size();
    if (image_rows * image_cols != d)
        throw std::invalid_argument("heatmap: image shape " + std::to_string(image_rows) + "x" +
                                    std::to_string(image_cols) + " does not match " +
                                    std::to_string(d) + " features");
    std::vector<std::size_t> tiers = k_tiers;
    std::sort(tiers.begin(), tiers.end());
    for (std::size_t k : tiers)
        if (k == 0 || k > d)
            throw std::invalid_argument("heatmap: tier K=" + std::to_string(k) +
                                        " outside [1, " + std::to_string(d) + "]");

    // rank_of[f] = position of feature f in the ranking.
    std::vector<std::size_t> rank_of(d);
    for (std::size_t pos = 0; pos < d; ++pos) rank_of[ranking.order[pos]] = pos;

    std::string header = "P5\n" + std::to_string(image_cols) + " " +
                         std::to_string(image_rows) + "\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (std::size_t f = 0; f < d; ++f) {
        unsigned char gray = 255;
        for (std::size_t t = 0; t < tiers.size(); ++t)
            if (rank_of[f] < tiers[t]) {
                gray = static_cast<unsigned char>(
                    std::lround(200.0 * static_cast<double>(t) /
                                static_cast<double>(tiers.size())));
                break;
            }
        bytes.push_back(gray);
    }
    write_binary_file_atomic(path, bytes);
}

void export_weights(const std::vector<double>& weights, const std::string& method,
                    const std::string& path) {
    if (method.empty() || method.find(',') != std::string::npos ||
        method.find('\n') != std::string::npos)
        throw std::invalid_argument("export_weights: method name must be a plain identifier");
    std::string out = "feature_index," + method + "\n";
    char buf[64];
    for (std::size_t i = 0; i < weights.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, weights[i]);
        out += buf;
    }
    write_text_file_atomic(path, out);
}

ImportedWeights import_weights(const std::string& path) {
    const std::vector<unsigned char> raw = read_binary_file(path);
    ImportedWeights result;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin < raw.size()) {
        std::size_t end = begin;
        while (end < raw.size() && raw[end] != '\n') ++end;
        std::string line(raw.begin() + static_cast<std::ptrdiff_t>(begin),
                         raw.begin() + static_cast<std::ptrdiff_t>(end));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        if (line_no == 1) {
            const std::size_t comma = line.find(',');
            if (line.substr(0, comma) != "feature_index" || comma == std::string::npos)
                throw DataError(path + ":1: expected header 'feature_index,<method>'");
            result.method = line.substr(comma + 1);
        } else if (!line.empty()) {
            const std::size_t comma = line.find(',');
            if (comma == std::string::npos)
                throw DataError(path + ":" + std::to_string(line_no) + ": expected 2 cells");
            std::size_t index = 0;
            const std::string index_cell = line.substr(0, comma);
            auto [p1, e1] = std::from_chars(index_cell.data(),
                                            index_cell.data() + index_cell.size(), index);
            if (e1 != std::errc() || p1 != index_cell.data() + index_cell.size() ||
                index != result.weights.size())
                throw DataError(path + ":" + std::to_string(line_no) + ": bad feature index '" +
                                index_cell + "'");
            double w = 0.0;
            const std::string w_cell = line.substr(comma + 1);
            auto [p2, e2] = std::from_chars(w_cell.data(), w_cell.data() + w_cell.size(), w);
            if (e2 != std::errc() || p2 != w_cell.data() + w_cell.size())
                throw DataError(path + ":" + std::to_string(line_no) + ": weight '" + w_cell +
                                "' is not numeric");
            result.weights.push_back(w);
        }
        begin = end + 1;
    }
    if (result.weights.empty()) throw DataError(path + ": no weight rows");
    return result;
}

namespace {

// Ranks with ties sharing their average position.
std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length vectors of size >= 2");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

} // namespace afs
