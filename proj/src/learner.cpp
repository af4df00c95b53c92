#include "afs/learner.hpp"

#include "afs/error.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace afs {

void LearnerConfig::validate() const {
    if (input_dim == 0) throw ConfigError("learner: input_dim must be positive");
    if (class_count < 2) throw ConfigError("learner: class_count must be at least 2");
    for (std::size_t w : hidden)
        if (w == 0) throw ConfigError("learner: hidden layer widths must be positive");
}

LearnerParams::LearnerParams(const LearnerConfig& cfg) : config(cfg) {
    config.validate();
    layers.reserve(config.hidden.size() + 1);
    std::size_t in = config.input_dim;
    for (std::size_t i = 0; i < config.hidden.size(); ++i) {
        layers.emplace_back("learner.h" + std::to_string(i), in, config.hidden[i],
                            Activation::Rectifier);
        in = config.hidden[i];
    }
    layers.emplace_back("learner.out", in, config.class_count, Activation::Identity);
}

void LearnerParams::init(std::uint64_t seed, double stddev) {
    for (ParamTensor* t : tensors()) t->init_truncated_normal(seed, stddev);
}

std::vector<ParamTensor*> LearnerParams::tensors() {
    std::vector<ParamTensor*> out;
    out.reserve(layers.size() * 2);
    for (DenseLayer& layer : layers) {
        out.push_back(&layer.W);
        out.push_back(&layer.b);
    }
    return out;
}

std::vector<const ParamTensor*> LearnerParams::tensors() const {
    std::vector<const ParamTensor*> out;
    out.reserve(layers.size() * 2);
    for (const DenseLayer& layer : layers) {
        out.push_back(&layer.W);
        out.push_back(&layer.b);
    }
    return out;
}

std::size_t LearnerParams::parameter_count() const {
    std::size_t n = 0;
    for (const ParamTensor* t : tensors()) n += t->value.size();
    return n;
}

void set_frozen(LearnerParams& params, bool frozen) {
    for (ParamTensor* t : params.tensors()) t->trainable = !frozen;
}

Matrix weight_features(const Matrix& x, const Matrix& attention) {
    require_same_shape(x, attention, "weight_features");
    Matrix out(x.rows(), x.cols());
    const double* xp = x.data();
    const double* ap = attention.data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) op[i] = xp[i] * ap[i];
    return out;
}

Matrix learner_forward(const LearnerParams& params, const Matrix& weighted, StackCache* cache) {
    if (weighted.cols() != params.config.input_dim)
        throw std::invalid_argument("learner_forward: input " + shape_str(weighted) +
                                    " expects " + std::to_string(params.config.input_dim) +
                                    " columns");
    return stack_forward(params.layers, weighted, cache);
}

AfsModel::AfsModel(const AttentionConfig& attention_cfg, const LearnerConfig& learner_cfg)
    : attention(attention_cfg), learner(learner_cfg) {
    if (attention_cfg.input_dim != learner_cfg.input_dim)
        throw ConfigError("model: attention input_dim " +
                          std::to_string(attention_cfg.input_dim) +
                          " differs from learner input_dim " +
                          std::to_string(learner_cfg.input_dim));
}

void AfsModel::init(std::uint64_t seed, double stddev) {
    attention.init(seed, stddev);
    learner.init(seed, stddev);
}

std::vector<ParamTensor*> AfsModel::tensors() {
    std::vector<ParamTensor*> out = attention.tensors();
    for (ParamTensor* t : learner.tensors()) out.push_back(t);
    return out;
}

std::vector<const ParamTensor*> AfsModel::tensors() const {
    std::vector<const ParamTensor*> out = attention.tensors();
    for (const ParamTensor* t : learner.tensors()) out.push_back(t);
    return out;
}

std::vector<ParamTensor*> AfsModel::trainable_tensors() {
    std::vector<ParamTensor*> out;
    for (ParamTensor* t : tensors())
        if (t->trainable) out.push_back(t);
    return out;
}

Matrix afs_predict(const AfsModel& model, const Matrix& x) {
    Matrix a = attention_forward(model.attention, x, nullptr);
    Matrix g = weight_features(x, a);
    return learner_forward(model.learner, g, nullptr);
}

namespace {

std::vector<const ParamTensor*> const_tensors(const AfsModel& model) {
    std::vector<const ParamTensor*> out = model.attention.tensors();
    for (const ParamTensor* t : model.learner.tensors()) out.push_back(t);
    return out;
}

} // namespace

double afs_objective(const AfsModel& model, const Matrix& x, const std::vector<int>& labels,
                     double lambda) {
    Matrix logits = afs_predict(model, x);
    return cross_entropy_loss(logits, labels) + l2_penalty(const_tensors(model), lambda);
}

double afs_loss_and_grad(AfsModel& model, const Matrix& x, const std::vector<int>& labels,
                         double lambda) {
    AttentionCache acache;
    Matrix a = attention_forward(model.attention, x, &acache);
    Matrix g = weight_features(x, a);
    StackCache lcache;
    Matrix logits = learner_forward(model.learner, g, &lcache);

    std::vector<ParamTensor*> all = model.tensors();
    const double objective = cross_entropy_loss(logits, labels) + l2_penalty(all, lambda);

    Matrix dlogits = cross_entropy_grad(logits, labels);
    Matrix dg = stack_backward(model.learner.layers, g, lcache, dlogits);
    // The learner sees x ⊙ a, so dL/da = dL/dg ⊙ x.
    Matrix da = weight_features(x, dg);
    attention_backward(model.attention, x, acache, da);
    accumulate_l2_grads(all, lambda);
    return objective;
}

namespace {

void check_pretrain_targets(const Matrix& x, const std::vector<double>& targets) {
    if (targets.size() != x.cols())
        throw std::invalid_argument("pretrain: " + std::to_string(targets.size()) +
                                    " targets for " + std::to_string(x.cols()) + " features");
    for (std::size_t k = 0; k < targets.size(); ++k)
        if (!(targets[k] >= 0.0 && targets[k] <= 1.0))
            throw std::invalid_argument("pretrain: target " + std::to_string(targets[k]) +
                                        " for feature " + std::to_string(k) +
                                        " outside [0, 1]");
}

// Mean over samples of the squared distance between the attention row and
// the target vector.
double target_match_loss(const Matrix& attention, const std::vector<double>& targets) {
    double acc = 0.0;
    for (std::size_t i = 0; i < attention.rows(); ++i) {
        const double* r = attention.row(i);
        for (std::size_t k = 0; k < attention.cols(); ++k) {
            const double diff = r[k] - targets[k];
            acc += diff * diff;
        }
    }
    return acc / static_cast<double>(attention.rows());
}

} // namespace

double pretrain_objective(const AfsModel& model, const Matrix& x,
                          const std::vector<double>& targets, double lambda,
                          double* match_mse) {
    check_pretrain_targets(x, targets);
    Matrix a = attention_forward(model.attention, x, nullptr);
    const double match = target_match_loss(a, targets);
    if (match_mse) *match_mse = match / static_cast<double>(x.cols());
    return match + l2_penalty(model.attention.tensors(), lambda);
}

double pretrain_loss_and_grad(AfsModel& model, const Matrix& x,
                              const std::vector<double>& targets, double lambda,
                              double* match_mse) {
    check_pretrain_targets(x, targets);
    AttentionCache acache;
    Matrix a = attention_forward(model.attention, x, &acache);
    std::vector<ParamTensor*> attn = model.attention.tensors();
    const double match = target_match_loss(a, targets);
    if (match_mse) *match_mse = match / static_cast<double>(x.cols());
    const double objective = match + l2_penalty(attn, lambda);

    Matrix da(a.rows(), a.cols());
    const double scale = 2.0 / static_cast<double>(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* r = a.row(i);
        double* d = da.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) d[k] = scale * (r[k] - targets[k]);
    }
    attention_backward(model.attention, x, acache, da);
    accumulate_l2_grads(attn, lambda);
    return objective;
}

} // namespace afs
