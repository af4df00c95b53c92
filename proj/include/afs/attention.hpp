#pragma once

#include "afs/matrix.hpp"
#include "afs/ops.hpp"
#include "afs/tensor.hpp"

#include <cstdint>
#include <vector>

namespace afs {

// Attention subnetwork: a shared extraction layer feeds one small scoring net
// per input feature. Each scoring net emits two logits ("keep" and "drop");
// their softmax gives that feature's attention value in (0, 1).
struct AttentionConfig {
    std::size_t input_dim = 0;    // number of input features (d)
    std::size_t extract_dim = 128; // width of the shared extraction layer
    std::size_t hidden_layers = 1; // tanh layers in each per-feature net
    std::size_t hidden_width = 8;  // width of those layers

    void validate() const;
};

// One per-feature scoring net: tanh hidden stack plus two linear heads.
struct FeatureNet {
    std::vector<DenseLayer> hidden;
    DenseLayer keep_head;
    DenseLayer drop_head;

    FeatureNet(std::size_t index, const AttentionConfig& cfg);
};

struct AttentionParams {
    AttentionConfig config;
    DenseLayer extract; // shared tanh layer, input_dim -> extract_dim
    std::vector<FeatureNet> nets;

    explicit AttentionParams(const AttentionConfig& cfg);

    // Draws every tensor from a truncated normal; each tensor's stream is
    // derived from (seed, tensor name), so results do not depend on the
    // order tensors are constructed or initialized.
    void init(std::uint64_t seed, double stddev = 0.1);

    std::vector<ParamTensor*> tensors();
    std::vector<const ParamTensor*> tensors() const;
    std::size_t parameter_count() const;
};

// Intermediate values saved by the forward pass for use in the backward pass.
struct AttentionCache {
    Matrix extracted;                // m x extract_dim, post-tanh
    std::vector<StackCache> hidden;  // per-feature hidden activations
    Matrix attention;                // m x d attention values
};

// Computes per-sample attention values A (m x d) for inputs x (m x d).
// Pass a cache to enable a subsequent backward pass.
Matrix attention_forward(const AttentionParams& params, const Matrix& x, AttentionCache* cache);

// Accumulates parameter gradients given dL/dA. Results are bit-identical
// for any OpenMP thread count.
void attention_backward(AttentionParams& params, const Matrix& x, const AttentionCache& cache,
                        const Matrix& grad_attention);

// Per-feature selection weights: the column means of A.
std::vector<double> feature_weights(const Matrix& attention);

// Selection weights over a full dataset, computed in batches so that large
// inputs never need an m x d attention matrix in memory at once. Equivalent
// to feature_weights(attention_forward(params, x, nullptr)).
std::vector<double> compute_dataset_weights(const AttentionParams& params, const Matrix& x,
                                            std::size_t batch_size = 1000);

} // namespace afs
