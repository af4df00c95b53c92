#pragma once

#include "afs/matrix.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace afs {

/// FNV-1a over a string, used to derive per-tensor RNG streams from names.
std::uint64_t fnv1a64(std::string_view s);

/// Mixes (master, stream) into an independent seed. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

/// Deterministic RNG. mt19937_64 is bit-specified by the standard; the value
/// mappings below are hand-rolled so sequences are reproducible across
/// toolchains (the std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform();

    /// Uniform integer in [0, n). Rejection sampling, unbiased.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller (pairs cached).
    double normal();

    /// N(mean, stddev^2) with draws outside mean +/- 2*stddev resampled.
    double truncated_normal(double mean, double stddev);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Matrix of i.i.d. truncated-normal draws (mean 0, given stddev, +/- 2 sigma),
/// bit-reproducible for equal seeds.
Matrix truncated_normal_init(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed);

} // namespace afs
