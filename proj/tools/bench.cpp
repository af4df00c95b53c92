// Timing harness: OpenMP kernels against their serial reference
// implementations, plus one full training step at a realistic shape.
// Also checks that both variants produce bit-identical results.

#include "afs/data.hpp"
#include "afs/kernels.hpp"
#include "afs/learner.hpp"
#include "afs/matrix.hpp"
#include "afs/rng.hpp"
#include "afs/tensor.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

afs::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    afs::Matrix m(rows, cols);
    afs::Rng rng(seed);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * rng.uniform() - 1.0;
    return m;
}

template <typename F>
double time_best_of(std::size_t repeats, F&& fn) {
    double best = 1e300;
    for (std::size_t i = 0; i < repeats; ++i) {
        const Clock::time_point t0 = Clock::now();
        fn();
        const double s = std::chrono::duration<double>(Clock::now() - t0).count();
        if (s < best) best = s;
    }
    return best;
}

void bench_matmul(std::size_t m, std::size_t k, std::size_t n) {
    const afs::Matrix a = random_matrix(m, k, 11);
    const afs::Matrix b = random_matrix(k, n, 13);
    afs::Matrix serial_out(m, n), parallel_out(m, n);

    const double serial = time_best_of(5, [&] { afs::kernels::serial::matmul_nn(a, b, serial_out); });
    const double parallel = time_best_of(5, [&] { afs::kernels::matmul_nn(a, b, parallel_out); });
    const bool match = serial_out == parallel_out;
    const double flops = 2.0 * static_cast<double>(m) * static_cast<double>(k) *
                         static_cast<double>(n);
    std::printf("matmul %4zux%4zux%4zu  serial %8.3f ms (%6.2f GF/s)  parallel %8.3f ms "
                "(%6.2f GF/s)  speedup %.2fx  bitwise match: %s\n",
                m, k, n, serial * 1e3, flops / serial * 1e-9, parallel * 1e3,
                flops / parallel * 1e-9, serial / parallel, match ? "yes" : "NO");
}

afs::Dataset synthetic_dataset(std::size_t samples, std::size_t features,
                               std::size_t classes) {
    afs::Dataset ds;
    ds.name = "bench";
    ds.features = afs::Matrix(samples, features);
    afs::Rng rng(29);
    for (std::size_t i = 0; i < ds.features.size(); ++i) ds.features.data()[i] = rng.uniform();
    ds.labels.resize(samples);
    for (std::size_t i = 0; i < samples; ++i)
        ds.labels[i] = static_cast<int>(i % classes);
    ds.class_count = static_cast<int>(classes);
    return ds;
}

void bench_train_step(std::size_t batch, std::size_t features, std::size_t classes) {
    const afs::Dataset ds = synthetic_dataset(batch, features, classes);
    afs::AttentionConfig acfg;
    acfg.input_dim = features;
    afs::LearnerConfig lcfg;
    lcfg.input_dim = features;
    lcfg.class_count = static_cast<int>(classes);
    afs::AfsModel model(acfg, lcfg);
    model.init(7);
    std::vector<afs::ParamTensor*> params = model.tensors();
    const afs::AdamConfig adam;

    std::size_t step = 0;
    const double per_step = time_best_of(3, [&] {
        afs::afs_loss_and_grad(model, ds.features, ds.labels, 1e-4);
        afs::adam_step(params, adam, ++step);
    });
    std::printf("train step %zux%zu -> %zu classes: %.1f ms (%d thread%s)\n", batch, features,
                classes, per_step * 1e3, omp_get_max_threads(),
                omp_get_max_threads() == 1 ? "" : "s");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        const int jobs = std::atoi(argv[1]);
        if (jobs > 0) omp_set_num_threads(jobs);
    }
    std::printf("threads: %d\n", omp_get_max_threads());

    bench_matmul(100, 784, 128);
    bench_matmul(100, 784, 500);
    bench_matmul(784, 100, 500);
    bench_matmul(100, 128, 8);
    bench_train_step(100, 784, 10);
    return 0;
}
