// Shared fixtures for the test binaries: deterministic random inputs, tiny
// datasets, temp-file paths, and a central-difference gradient checker.
#pragma once

#include "afs/data.hpp"
#include "afs/matrix.hpp"
#include "afs/rng.hpp"
#include "afs/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

namespace testutil {

inline afs::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 double lo = 0.0, double hi = 1.0) {
    afs::Matrix m(rows, cols);
    afs::Rng rng(seed);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * rng.uniform();
    return m;
}

// Random features in [0,1] with labels cycling through the classes.
inline afs::Dataset tiny_dataset(std::size_t m, std::size_t d, int classes, std::uint64_t seed) {
    afs::Dataset ds;
    ds.name = "tiny";
    ds.features = random_matrix(m, d, seed);
    ds.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) ds.labels[i] = static_cast<int>(i) % classes;
    ds.class_count = classes;
    return ds;
}

// Two well-separated Gaussian-ish blobs: class c lives near c/(classes-1) in
// every informative feature, so even a few training steps separate them.
inline afs::Dataset separable_dataset(std::size_t m, std::size_t d, int classes,
                                      std::uint64_t seed) {
    afs::Dataset ds;
    ds.name = "separable";
    ds.features = afs::Matrix(m, d);
    ds.labels.resize(m);
    afs::Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        const int c = static_cast<int>(i) % classes;
        ds.labels[i] = c;
        const double center = classes == 1 ? 0.5 : static_cast<double>(c) / (classes - 1);
        for (std::size_t j = 0; j < d; ++j) {
            const double v = center + 0.08 * (rng.uniform() - 0.5);
            ds.features(i, j) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    }
    ds.class_count = classes;
    return ds;
}

// Unique path under the system temp dir; files are small and the OS cleans up.
inline std::string temp_path(const std::string& stem) {
    static int counter = 0;
    const std::string name = stem + "." + std::to_string(getpid()) + "." +
                             std::to_string(counter++);
    return (std::filesystem::temp_directory_path() / name).string();
}

// Central-difference gradient check. `objective` evaluates the loss at the
// current parameter values; `compute_grads` zeroes and fills tensor grads.
// Returns the maximum relative error over every parameter entry, with the
// relative scale floored at 1 so near-zero gradients compare absolutely.
inline double max_grad_rel_error(const std::vector<afs::ParamTensor*>& params,
                                 const std::function<double()>& objective,
                                 const std::function<void()>& compute_grads,
                                 double h = 1e-5) {
    for (afs::ParamTensor* t : params) t->zero_grad();
    compute_grads();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const afs::ParamTensor* t : params)
        analytic.emplace_back(t->grad.data(), t->grad.data() + t->grad.size());

    double worst = 0.0;
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        afs::ParamTensor& t = *params[ti];
        for (std::size_t i = 0; i < t.value.size(); ++i) {
            const double saved = t.value.data()[i];
            t.value.data()[i] = saved + h;
            const double up = objective();
            t.value.data()[i] = saved - h;
            const double down = objective();
            t.value.data()[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double g = analytic[ti][i];
            double scale = 1.0;
            if (std::abs(fd) > scale) scale = std::abs(fd);
            if (std::abs(g) > scale) scale = std::abs(g);
            const double err = std::abs(fd - g) / scale;
            if (err > worst) worst = err;
        }
    }
    return worst;
}

} // namespace testutil
