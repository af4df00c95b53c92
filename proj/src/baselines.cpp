#include "afs/baselines.hpp"

#include "afs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace afs {

namespace {

constexpr double kVarianceGuard = 1e-12;

std::size_t checked_class_count(const Matrix& x, const std::vector<int>& labels,
                                const char* op) {
    if (labels.size() != x.rows())
        throw std::invalid_argument(std::string(op) + ": " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(x.rows()) + " samples");
    if (x.rows() == 0) throw std::invalid_argument(std::string(op) + ": empty dataset");
    int max_label = 0;
    for (int label : labels) {
        if (label < 0) throw std::invalid_argument(std::string(op) + ": negative label");
        max_label = std::max(max_label, label);
    }
    return static_cast<std::size_t>(max_label) + 1;
}

} // namespace

std::vector<double> fisher_score(const Matrix& x, const std::vector<int>& labels) {
    const std::size_t c = checked_class_count(x, labels, "fisher score");
    const std::size_t m = x.rows(), d = x.cols();

    std::vector<std::size_t> counts(c, 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    std::size_t present = 0;
    for (std::size_t n : counts) present += n > 0 ? 1 : 0;
    if (present < 2) throw std::invalid_argument("fisher score: need at least 2 classes");

    // Class means and grand mean.
    std::vector<double> class_means(c * d, 0.0);
    std::vector<double> grand_mean(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = x.row(i);
        double* cm = class_means.data() + static_cast<std::size_t>(labels[i]) * d;
        for (std::size_t k = 0; k < d; ++k) {
            cm[k] += r[k];
            grand_mean[k] += r[k];
        }
    }
    for (std::size_t j = 0; j < c; ++j)
        if (counts[j] > 0)
            for (std::size_t k = 0; k < d; ++k)
                class_means[j * d + k] /= static_cast<double>(counts[j]);
    for (std::size_t k = 0; k < d; ++k) grand_mean[k] /= static_cast<double>(m);

    // Pooled within-class spread (population form: n_j * sigma^2_jk reduces
    // to the plain sum of squared deviations from the class mean).
    std::vector<double> within(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = x.row(i);
        const double* cm = class_means.data() + static_cast<std::size_t>(labels[i]) * d;
        for (std::size_t k = 0; k < d; ++k) {
            const double dev = r[k] - cm[k];
            within[k] += dev * dev;
        }
    }

    // A feature with zero range carries no class information; give it an
    // exact 0 instead of the rounding dust the mean arithmetic would leave.
    std::vector<bool> constant(d, true);
    for (std::size_t i = 1; i < m; ++i) {
        const double* r = x.row(i);
        const double* first = x.row(0);
        for (std::size_t k = 0; k < d; ++k)
            if (r[k] != first[k]) constant[k] = false;
    }

    std::vector<double> score(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        if (constant[k]) continue;
        double between = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (counts[j] == 0) continue;
            const double dev = class_means[j * d + k] - grand_mean[k];
            between += static_cast<double>(counts[j]) * dev * dev;
        }
        score[k] = between / (within[k] + kVarianceGuard);
    }
    return score;
}

std::vector<double> relieff(const Matrix& x, const std::vector<int>& labels,
                            std::size_t k_neighbors, std::size_t sample_count,
                            std::uint64_t seed) {
    const std::size_t c = checked_class_count(x, labels, "relieff");
    const std::size_t m = x.rows(), d = x.cols();
    if (k_neighbors == 0) throw std::invalid_argument("relieff: k_neighbors must be positive");
    if (sample_count > m)
        throw std::invalid_argument("relieff: sample_count " + std::to_string(sample_count) +
                                    " exceeds " + std::to_string(m) + " samples");

    std::vector<std::size_t> counts(c, 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    std::size_t present = 0;
    for (std::size_t n : counts) present += n > 0 ? 1 : 0;
    if (present < 2) throw std::invalid_argument("relieff: need at least 2 classes");

    // Feature ranges for per-feature diff normalization.
    std::vector<double> range(d, 0.0);
    {
        std::vector<double> lo(x.row(0), x.row(0) + d);
        std::vector<double> hi(lo);
        for (std::size_t i = 1; i < m; ++i) {
            const double* r = x.row(i);
            for (std::size_t k = 0; k < d; ++k) {
                lo[k] = std::min(lo[k], r[k]);
                hi[k] = std::max(hi[k], r[k]);
            }
        }
        for (std::size_t k = 0; k < d; ++k) range[k] = hi[k] - lo[k];
    }
    std::vector<double> inv_range(d, 0.0);
    bool any_range = false;
    for (std::size_t k = 0; k < d; ++k)
        if (range[k] > 0.0) {
            inv_range[k] = 1.0 / range[k];
            any_range = true;
        }
    std::vector<double> w(d, 0.0);
    if (!any_range) return w; // constant dataset: nothing to separate

    // Instances to visit: all in index order, or a seeded sample without
    // replacement.
    std::vector<std::size_t> visits(m);
    for (std::size_t i = 0; i < m; ++i) visits[i] = i;
    if (sample_count != 0 && sample_count < m) {
        Rng rng(seed);
        rng.shuffle(visits);
        visits.resize(sample_count);
    }
    const double s = static_cast<double>(visits.size());

    std::vector<double> prior(c, 0.0);
    for (std::size_t j = 0; j < c; ++j) prior[j] = static_cast<double>(counts[j]) / static_cast<double>(m);

    std::vector<double> dist(m, 0.0);
    std::vector<std::size_t> by_dist(m);
    for (std::size_t vi = 0; vi < visits.size(); ++vi) {
        const std::size_t i = visits[vi];
        const std::size_t own = static_cast<std::size_t>(labels[i]);
        if (counts[own] < k_neighbors + 1)
            throw std::invalid_argument("relieff: class " + std::to_string(own) + " has " +
                                        std::to_string(counts[own]) + " samples, needs at least " +
                                        std::to_string(k_neighbors + 1));
        for (std::size_t j = 0; j < c; ++j)
            if (j != own && counts[j] > 0 && counts[j] < k_neighbors)
                throw std::invalid_argument("relieff: class " + std::to_string(j) + " has " +
                                            std::to_string(counts[j]) +
                                            " samples, needs at least " +
                                            std::to_string(k_neighbors));

        const double* ri = x.row(i);
        const std::int64_t mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
        for (std::int64_t t = 0; t < mm; ++t) {
            const double* rt = x.row(static_cast<std::size_t>(t));
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += std::abs(ri[k] - rt[k]) * inv_range[k];
            dist[static_cast<std::size_t>(t)] = acc;
        }
        for (std::size_t t = 0; t < m; ++t) by_dist[t] = t;
        std::stable_sort(by_dist.begin(), by_dist.end(), [&](std::size_t a, std::size_t b) {
            return dist[a] < dist[b];
        });

        // Nearest k hits and, per other class, nearest k misses, in distance
        // order with ties broken by index (stable sort over index order).
        std::vector<std::size_t> taken(c, 0);
        for (std::size_t t : by_dist) {
            if (t == i) continue;
            const std::size_t cls = static_cast<std::size_t>(labels[t]);
            if (taken[cls] >= k_neighbors) continue;
            ++taken[cls];
            const double* rt = x.row(t);
            if (cls == own) {
                for (std::size_t k = 0; k < d; ++k)
                    w[k] -= std::abs(ri[k] - rt[k]) * inv_range[k] /
                            (s * static_cast<double>(k_neighbors));
            } else {
                const double factor = prior[cls] / (1.0 - prior[own]);
                for (std::size_t k = 0; k < d; ++k)
                    w[k] += factor * std::abs(ri[k] - rt[k]) * inv_range[k] /
                            (s * static_cast<double>(k_neighbors));
            }
        }
    }
    return w;
}

std::vector<double> min_max_normalize(const std::vector<double>& w) {
    if (w.empty()) throw std::invalid_argument("min_max_normalize: empty input");
    for (double v : w)
        if (!std::isfinite(v))
            throw std::invalid_argument("min_max_normalize: non-finite entry");
    const double lo = *std::min_element(w.begin(), w.end());
    const double hi = *std::max_element(w.begin(), w.end());
    std::vector<double> out(w.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = (w[i] - lo) * inv;
    return out;
}

} // namespace afs
