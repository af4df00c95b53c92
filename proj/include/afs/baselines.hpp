#pragma once

#include "afs/matrix.hpp"

#include <cstdint>
#include <vector>

namespace afs {

// Fisher score per feature: sum over classes of n_c (class mean - grand
// mean)^2, divided by the pooled population class variance plus a tiny
// guard. Needs at least two distinct classes.
std::vector<double> fisher_score(const Matrix& x, const std::vector<int>& labels);

// ReliefF. Visits sample_count seeded instances (0 = every instance, in
// index order), finds the k nearest same-class hits and, per other class,
// the k nearest misses under L1 distance on range-normalized features, and
// scores each feature by miss-vs-hit separation. A feature constant across
// the dataset scores exactly 0; a dataset constant everywhere scores all 0.
std::vector<double> relieff(const Matrix& x, const std::vector<int>& labels,
                            std::size_t k_neighbors = 5, std::size_t sample_count = 0,
                            std::uint64_t seed = 0);

// (w - min) / (max - min) elementwise; a constant vector maps to all 0.5.
std::vector<double> min_max_normalize(const std::vector<double>& w);

} // namespace afs
