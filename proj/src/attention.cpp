#include "afs/attention.hpp"

#include "afs/error.hpp"
#include "afs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace afs {

void AttentionConfig::validate() const {
    if (input_dim == 0) throw ConfigError("attention: input_dim must be positive");
    if (extract_dim == 0) throw ConfigError("attention: extract_dim must be positive");
    if (hidden_layers > 0 && hidden_width == 0)
        throw ConfigError("attention: hidden_width must be positive");
}

namespace {

std::string feature_prefix(std::size_t index) {
    return "attention.f" + std::to_string(index);
}

std::size_t head_input_width(const AttentionConfig& cfg) {
    return cfg.hidden_layers > 0 ? cfg.hidden_width : cfg.extract_dim;
}

} // namespace

FeatureNet::FeatureNet(std::size_t index, const AttentionConfig& cfg)
    : keep_head(feature_prefix(index) + ".p", head_input_width(cfg), 1, Activation::Identity),
      drop_head(feature_prefix(index) + ".n", head_input_width(cfg), 1, Activation::Identity) {
    hidden.reserve(cfg.hidden_layers);
    for (std::size_t i = 0; i < cfg.hidden_layers; ++i) {
        const std::size_t in = i == 0 ? cfg.extract_dim : cfg.hidden_width;
        hidden.emplace_back(feature_prefix(index) + ".h" + std::to_string(i), in,
                            cfg.hidden_width, Activation::Tanh);
    }
}

AttentionParams::AttentionParams(const AttentionConfig& cfg)
    : config(cfg), extract("attention.e", cfg.input_dim, cfg.extract_dim, Activation::Tanh) {
    config.validate();
    nets.reserve(config.input_dim);
    for (std::size_t k = 0; k < config.input_dim; ++k) nets.emplace_back(k, config);
}

void AttentionParams::init(std::uint64_t seed, double stddev) {
    for (ParamTensor* t : tensors()) t->init_truncated_normal(seed, stddev);
}

std::vector<ParamTensor*> AttentionParams::tensors() {
    std::vector<ParamTensor*> out;
    out.reserve(2 + nets.size() * (2 * config.hidden_layers + 4));
    out.push_back(&extract.W);
    out.push_back(&extract.b);
    for (FeatureNet& net : nets) {
        for (DenseLayer& layer : net.hidden) {
            out.push_back(&layer.W);
            out.push_back(&layer.b);
        }
        out.push_back(&net.keep_head.W);
        out.push_back(&net.keep_head.b);
        out.push_back(&net.drop_head.W);
        out.push_back(&net.drop_head.b);
    }
    return out;
}

std::vector<const ParamTensor*> AttentionParams::tensors() const {
    std::vector<const ParamTensor*> out;
    for (ParamTensor* t : const_cast<AttentionParams*>(this)->tensors()) out.push_back(t);
    return out;
}

std::size_t AttentionParams::parameter_count() const {
    std::size_t n = 0;
    for (const ParamTensor* t : tensors()) n += t->value.size();
    return n;
}

Matrix attention_forward(const AttentionParams& params, const Matrix& x, AttentionCache* cache) {
    const std::size_t d = params.config.input_dim;
    if (x.cols() != d)
        throw std::invalid_argument("attention_forward: input " + shape_str(x) + " expects " +
                                    std::to_string(d) + " columns");
    const std::size_t m = x.rows();
    Matrix extracted = dense_forward(x, params.extract.W.value, params.extract.b.value);
    apply_activation(extracted, Activation::Tanh);

    Matrix attention(m, d);
    if (cache) {
        cache->hidden.clear();
        cache->hidden.resize(d);
    }
    const std::int64_t dn = static_cast<std::int64_t>(d);
#pragma omp parallel for schedule(static)
    for (std::int64_t kk = 0; kk < dn; ++kk) {
        const std::size_t k = static_cast<std::size_t>(kk);
        const FeatureNet& net = params.nets[k];
        StackCache* sc = cache ? &cache->hidden[k] : nullptr;
        Matrix h = stack_forward(net.hidden, extracted, sc);
        Matrix keep = dense_forward(h, net.keep_head.W.value, net.keep_head.b.value);
        Matrix drop = dense_forward(h, net.drop_head.W.value, net.drop_head.b.value);
        for (std::size_t i = 0; i < m; ++i)
            attention(i, k) = two_logit_softmax(keep(i, 0), drop(i, 0));
    }
    if (cache) {
        cache->extracted = std::move(extracted);
        cache->attention = attention;
    }
    return attention;
}

namespace {

// Fixed chunk count for the shared-gradient reduction. Chunks are reduced in
// index order after the parallel region, so the floating-point summation
// order never depends on the number of threads.
constexpr std::size_t kReduceChunks = 16;

void add_into(Matrix& dst, const Matrix& src) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

// Backward through one linear scoring head: accumulates the head's weight
// and bias gradients and adds the input gradient into dh.
void head_backward(DenseLayer& head, const Matrix& input, const Matrix& grad_out, Matrix& dh) {
    Matrix dw(head.W.value.rows(), head.W.value.cols());
    kernels::matmul_tn(input, grad_out, dw);
    add_into(head.W.grad, dw);
    double acc = 0.0;
    for (std::size_t i = 0; i < grad_out.rows(); ++i) acc += grad_out(i, 0);
    head.b.grad(0, 0) += acc;
    Matrix dx(input.rows(), input.cols());
    kernels::matmul_nt(grad_out, head.W.value, dx);
    add_into(dh, dx);
}

} // namespace

void attention_backward(AttentionParams& params, const Matrix& x, const AttentionCache& cache,
                        const Matrix& grad_attention) {
    const std::size_t d = params.config.input_dim;
    const std::size_t m = x.rows();
    require_same_shape(grad_attention, cache.attention, "attention_backward");
    if (grad_attention.rows() != m || grad_attention.cols() != d)
        throw std::invalid_argument("attention_backward: gradient " + shape_str(grad_attention) +
                                    " does not match input " + shape_str(x));
    if (cache.hidden.size() != d)
        throw std::invalid_argument("attention_backward: cache built for a different input");

    const std::size_t chunks = d < kReduceChunks ? d : kReduceChunks;
    std::vector<Matrix> de_parts(chunks, Matrix(m, params.config.extract_dim));
    const std::size_t base = d / chunks;
    const std::size_t rem = d % chunks;

    const std::int64_t cn = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static)
    for (std::int64_t cc = 0; cc < cn; ++cc) {
        const std::size_t c = static_cast<std::size_t>(cc);
        const std::size_t begin = c * base + (c < rem ? c : rem);
        const std::size_t end = begin + base + (c < rem ? 1 : 0);
        for (std::size_t k = begin; k < end; ++k) {
            FeatureNet& net = params.nets[k];
            // d(attention)/d(keep logit) = a(1-a); the drop logit gets the
            // opposite sign.
            Matrix ds(m, 1);
            for (std::size_t i = 0; i < m; ++i) {
                const double a = cache.attention(i, k);
                ds(i, 0) = grad_attention(i, k) * a * (1.0 - a);
            }
            Matrix ds_neg(m, 1);
            for (std::size_t i = 0; i < m; ++i) ds_neg(i, 0) = -ds(i, 0);

            const Matrix& h =
                net.hidden.empty() ? cache.extracted : cache.hidden[k].post.back();
            Matrix dh(h.rows(), h.cols());
            head_backward(net.keep_head, h, ds, dh);
            head_backward(net.drop_head, h, ds_neg, dh);

            Matrix de_k = stack_backward(net.hidden, cache.extracted, cache.hidden[k], dh);
            add_into(de_parts[c], de_k);
        }
    }

    Matrix de(m, params.config.extract_dim);
    for (std::size_t c = 0; c < chunks; ++c) add_into(de, de_parts[c]);

    // Through the shared tanh extraction layer.
    {
        double* dp = de.data();
        const double* ep = cache.extracted.data();
        for (std::size_t i = 0; i < de.size(); ++i) dp[i] *= 1.0 - ep[i] * ep[i];
    }
    Matrix dw(params.extract.W.value.rows(), params.extract.W.value.cols());
    kernels::matmul_tn(x, de, dw);
    add_into(params.extract.W.grad, dw);
    double* db = params.extract.b.grad.data();
    for (std::size_t i = 0; i < de.rows(); ++i) {
        const double* r = de.row(i);
        for (std::size_t j = 0; j < de.cols(); ++j) db[j] += r[j];
    }
}

std::vector<double> feature_weights(const Matrix& attention) {
    if (attention.rows() == 0)
        throw std::invalid_argument("feature_weights: attention matrix has no rows");
    std::vector<double> w(attention.cols(), 0.0);
    for (std::size_t i = 0; i < attention.rows(); ++i) {
        const double* r = attention.row(i);
        for (std::size_t j = 0; j < attention.cols(); ++j) w[j] += r[j];
    }
    const double inv_m = 1.0 / static_cast<double>(attention.rows());
    for (double& v : w) v *= inv_m;
    return w;
}

std::vector<double> compute_dataset_weights(const AttentionParams& params, const Matrix& x,
                                            std::size_t batch_size) {
    if (x.rows() == 0) throw std::invalid_argument("compute_dataset_weights: input has no rows");
    if (batch_size == 0) batch_size = x.rows();
    std::vector<double> sums(x.cols(), 0.0);
    for (std::size_t begin = 0; begin < x.rows(); begin += batch_size) {
        const std::size_t end = std::min(begin + batch_size, x.rows());
        Matrix slice(end - begin, x.cols());
        std::memcpy(slice.data(), x.row(begin), slice.size() * sizeof(double));
        Matrix a = attention_forward(params, slice, nullptr);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double* r = a.row(i);
            for (std::size_t j = 0; j < a.cols(); ++j) sums[j] += r[j];
        }
    }
    const double inv_m = 1.0 / static_cast<double>(x.rows());
    for (double& v : sums) v *= inv_m;
    return sums;
}

} // namespace afs
