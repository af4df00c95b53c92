#pragma once

#include "afs/matrix.hpp"
#include "afs/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace afs {

enum class TensorKind { Weight, Bias };

/// A named trainable tensor with its gradient and Adam moment buffers.
struct ParamTensor {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;
    TensorKind kind = TensorKind::Weight;
    bool trainable = true;

    ParamTensor() = default;
    ParamTensor(std::string name_, std::size_t rows, std::size_t cols,
                TensorKind kind_ = TensorKind::Weight)
        : name(std::move(name_)),
          value(rows, cols),
          grad(rows, cols),
          adam_m(rows, cols),
          adam_v(rows, cols),
          kind(kind_) {}

    /// Truncated-normal init with a stream derived from (master_seed, name).
    void init_truncated_normal(std::uint64_t master_seed, double stddev) {
        value = truncated_normal_init(value.rows(), value.cols(), stddev,
                                      derive_seed(master_seed, name));
    }

    void zero_grad() { grad.fill(0.0); }
    void zero_adam_state() {
        adam_m.fill(0.0);
        adam_v.fill(0.0);
    }
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// One bias-corrected Adam update over every trainable tensor; grads are
/// cleared afterwards. step_index is 1-based and must increase by 1 per call.
void adam_step(std::span<ParamTensor* const> params, const AdamConfig& config,
               std::int64_t step_index);

/// lambda * sum of squared entries over trainable Weight tensors (biases excluded).
double l2_penalty(std::span<const ParamTensor* const> params, double lambda);
double l2_penalty(std::span<ParamTensor* const> params, double lambda);

inline double l2_penalty(const std::vector<ParamTensor*>& params, double lambda) {
    return l2_penalty(std::span<ParamTensor* const>(params.data(), params.size()), lambda);
}
inline double l2_penalty(const std::vector<const ParamTensor*>& params, double lambda) {
    return l2_penalty(std::span<const ParamTensor* const>(params.data(), params.size()), lambda);
}

/// Adds the d/dW of l2_penalty (2*lambda*W) into the grads of trainable weights.
void accumulate_l2_grads(std::span<ParamTensor* const> params, double lambda);

void zero_grads(std::span<ParamTensor* const> params);

} // namespace afs
