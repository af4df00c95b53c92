#include "afs/rng.hpp"

#include <cmath>

namespace afs {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ stream);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    return derive_seed(master, fnv1a64(stream));
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller; u1 in (0,1] to keep the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double Rng::truncated_normal(double mean, double stddev) {
    for (;;) {
        const double z = normal();
        if (z >= -2.0 && z <= 2.0) return mean + stddev * z;
    }
}

Matrix truncated_normal_init(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.truncated_normal(0.0, stddev);
    return m;
}

} // namespace afs
