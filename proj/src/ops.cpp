#include "afs/ops.hpp"

#include "afs/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace afs {

Matrix dense_forward(const Matrix& input, const Matrix& weights, const Matrix& bias) {
    if (input.cols() != weights.rows())
        throw std::invalid_argument("dense_forward: input " + shape_str(input) +
                                    " incompatible with weights " + shape_str(weights));
    if (bias.rows() != 1 || bias.cols() != weights.cols())
        throw std::invalid_argument("dense_forward: bias " + shape_str(bias) +
                                    " incompatible with weights " + shape_str(weights));
    Matrix out(input.rows(), weights.cols());
    kernels::matmul_nn(input, weights, out);
    const double* bv = bias.data();
    const std::int64_t m = static_cast<std::int64_t>(out.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        double* r = out.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < out.cols(); ++j) r[j] += bv[j];
    }
    return out;
}

Matrix tanh_forward(const Matrix& x) {
    Matrix out = x;
    apply_activation(out, Activation::Tanh);
    return out;
}

void apply_activation(Matrix& x, Activation act) {
    if (act == Activation::Identity) return;
    double* p = x.data();
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    if (act == Activation::Tanh) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
    }
}

double two_logit_softmax(double p, double n) {
    const double m = p > n ? p : n;
    const double ep = std::exp(p - m);
    const double en = std::exp(n - m);
    return ep / (ep + en);
}

namespace {

void check_labels(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows())
        throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(logits.rows()) + " rows");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols())
            throw std::out_of_range("cross_entropy: label " + std::to_string(labels[i]) +
                                    " at row " + std::to_string(i) + " outside [0, " +
                                    std::to_string(logits.cols()) + ")");
}

double row_logsumexp(const double* z, std::size_t c) {
    double mx = z[0];
    for (std::size_t j = 1; j < c; ++j) mx = z[j] > mx ? z[j] : mx;
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += std::exp(z[j] - mx);
    return mx + std::log(acc);
}

} // namespace

double cross_entropy_loss(const Matrix& logits, const std::vector<int>& labels) {
    check_labels(logits, labels);
    const std::size_t m = logits.rows(), c = logits.cols();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* z = logits.row(i);
        acc += row_logsumexp(z, c) - z[labels[i]];
    }
    return acc / static_cast<double>(m);
}

Matrix cross_entropy_grad(const Matrix& logits, const std::vector<int>& labels) {
    check_labels(logits, labels);
    const std::size_t m = logits.rows(), c = logits.cols();
    Matrix g(m, c);
    const double inv_m = 1.0 / static_cast<double>(m);
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* z = logits.row(static_cast<std::size_t>(i));
        double* gi = g.row(static_cast<std::size_t>(i));
        const double lse = row_logsumexp(z, c);
        for (std::size_t j = 0; j < c; ++j) gi[j] = std::exp(z[j] - lse) * inv_m;
        gi[labels[static_cast<std::size_t>(i)]] -= inv_m;
    }
    return g;
}

double classification_accuracy(const Matrix& logits, const std::vector<int>& labels) {
    check_labels(logits, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* z = logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (z[j] > z[best]) best = j;
        if (static_cast<int>(best) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    require_same_shape(pred, target, "mse_loss");
    const double* p = pred.data();
    const double* t = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

Matrix mse_grad(const Matrix& pred, const Matrix& target) {
    require_same_shape(pred, target, "mse_grad");
    Matrix g(pred.rows(), pred.cols());
    const double scale = 2.0 / static_cast<double>(pred.size());
    const double* p = pred.data();
    const double* t = target.data();
    double* gp = g.data();
    for (std::size_t i = 0; i < pred.size(); ++i) gp[i] = scale * (p[i] - t[i]);
    return g;
}

Matrix stack_forward(const std::vector<DenseLayer>& layers, const Matrix& x, StackCache* cache) {
    if (cache) {
        cache->post.clear();
        cache->post.reserve(layers.size());
    }
    Matrix cur = x;
    for (const DenseLayer& layer : layers) {
        cur = dense_forward(cur, layer.W.value, layer.b.value);
        apply_activation(cur, layer.act);
        if (cache) cache->post.push_back(cur);
    }
    return cur;
}

namespace {

// dPre = dPost applied through the activation derivative, using post values.
void activation_backward_inplace(Matrix& d, const Matrix& post, Activation act) {
    if (act == Activation::Identity) return;
    double* dp = d.data();
    const double* pp = post.data();
    const std::int64_t n = static_cast<std::int64_t>(d.size());
    if (act == Activation::Tanh) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) dp[i] *= 1.0 - pp[i] * pp[i];
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) dp[i] = pp[i] > 0.0 ? dp[i] : 0.0;
    }
}

void add_into(Matrix& dst, const Matrix& src) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

void colsum_into(Matrix& dst, const Matrix& src) {
    double* d = dst.data();
    for (std::size_t i = 0; i < src.rows(); ++i) {
        const double* r = src.row(i);
        for (std::size_t j = 0; j < src.cols(); ++j) d[j] += r[j];
    }
}

} // namespace

Matrix stack_backward(std::vector<DenseLayer>& layers, const Matrix& x, const StackCache& cache,
                      const Matrix& grad_out) {
    if (cache.post.size() != layers.size())
        throw std::invalid_argument("stack_backward: cache does not match layer count");
    Matrix d = grad_out;
    for (std::size_t li = layers.size(); li-- > 0;) {
        DenseLayer& layer = layers[li];
        activation_backward_inplace(d, cache.post[li], layer.act);
        const Matrix& input = li == 0 ? x : cache.post[li - 1];
        Matrix dw(layer.W.value.rows(), layer.W.value.cols());
        kernels::matmul_tn(input, d, dw);
        add_into(layer.W.grad, dw);
        colsum_into(layer.b.grad, d);
        Matrix dx(input.rows(), input.cols());
        kernels::matmul_nt(d, layer.W.value, dx);
        d = std::move(dx);
    }
    return d;
}

} // namespace afs
