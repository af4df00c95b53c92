#pragma once

#include "afs/matrix.hpp"
#include "afs/tensor.hpp"

#include <vector>

namespace afs {

enum class Activation { Identity, Tanh, Rectifier };

/// out[i][j] = sum_t input[i][t] * weights[t][j] + bias[j]. bias is 1 x b.
Matrix dense_forward(const Matrix& input, const Matrix& weights, const Matrix& bias);

/// Elementwise tanh; outputs strictly in (-1, 1).
Matrix tanh_forward(const Matrix& x);

void apply_activation(Matrix& x, Activation act);

/// exp(p) / (exp(p) + exp(n)), max-subtracted so large logits cannot overflow.
double two_logit_softmax(double p, double n);

/// Mean over samples of -log softmax(logits)[label], log-sum-exp stabilized.
double cross_entropy_loss(const Matrix& logits, const std::vector<int>& labels);

/// d(cross_entropy_loss)/d(logits) = (softmax - onehot) / m.
Matrix cross_entropy_grad(const Matrix& logits, const std::vector<int>& labels);

/// Row-wise argmax vs labels.
double classification_accuracy(const Matrix& logits, const std::vector<int>& labels);

/// Mean of squared elementwise differences over all entries.
double mse_loss(const Matrix& pred, const Matrix& target);

/// d(mse_loss)/d(pred) = 2 (pred - target) / (rows*cols).
Matrix mse_grad(const Matrix& pred, const Matrix& target);

/// One dense layer: y = act(x W + b). W is in x out, b is 1 x out.
struct DenseLayer {
    ParamTensor W;
    ParamTensor b;
    Activation act = Activation::Identity;

    DenseLayer() = default;
    DenseLayer(const std::string& name, std::size_t in, std::size_t out, Activation a)
        : W(name + ".w", in, out, TensorKind::Weight),
          b(name + ".b", 1, out, TensorKind::Bias),
          act(a) {}
};

/// Per-layer activations cached by stack_forward for the backward pass.
struct StackCache {
    std::vector<Matrix> post; // post[l] = output of layer l
};

/// Feeds x through the layers; fills cache when given.
Matrix stack_forward(const std::vector<DenseLayer>& layers, const Matrix& x,
                     StackCache* cache = nullptr);

/// Reverse pass. Accumulates parameter grads, returns dL/dx.
/// `x` must be the same input that produced `cache`.
Matrix stack_backward(std::vector<DenseLayer>& layers, const Matrix& x, const StackCache& cache,
                      const Matrix& grad_out);

} // namespace afs
