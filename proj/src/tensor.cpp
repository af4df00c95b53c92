#include "afs/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace afs {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("AdamConfig: learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("AdamConfig: beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("AdamConfig: beta2 must be in (0,1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("AdamConfig: epsilon must be > 0");
}

void adam_step(std::span<ParamTensor* const> params, const AdamConfig& config,
               std::int64_t step_index) {
    config.validate();
    if (step_index < 1)
        throw std::invalid_argument("adam_step: step_index must be >= 1, got " +
                                    std::to_string(step_index));
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_index));
    for (ParamTensor* t : params) {
        if (!t->trainable) {
            t->zero_grad();
            continue;
        }
        double* v = t->value.data();
        double* g = t->grad.data();
        double* m = t->adam_m.data();
        double* s = t->adam_v.data();
        const std::size_t n = t->value.size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            s[i] = config.beta2 * s[i] + (1.0 - config.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double shat = s[i] / bc2;
            v[i] -= config.learning_rate * mhat / (std::sqrt(shat) + config.epsilon);
            g[i] = 0.0;
        }
    }
}

namespace {
double l2_sum(const ParamTensor& t) {
    const double* v = t.value.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < t.value.size(); ++i) acc += v[i] * v[i];
    return acc;
}
} // namespace

double l2_penalty(std::span<const ParamTensor* const> params, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("l2_penalty: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    double acc = 0.0;
    for (const ParamTensor* t : params)
        if (t->trainable && t->kind == TensorKind::Weight) acc += l2_sum(*t);
    return lambda * acc;
}

double l2_penalty(std::span<ParamTensor* const> params, double lambda) {
    std::vector<const ParamTensor*> view(params.begin(), params.end());
    return l2_penalty(std::span<const ParamTensor* const>(view), lambda);
}

void accumulate_l2_grads(std::span<ParamTensor* const> params, double lambda) {
    if (lambda == 0.0) return;
    for (ParamTensor* t : params) {
        if (!t->trainable || t->kind != TensorKind::Weight) continue;
        const double* v = t->value.data();
        double* g = t->grad.data();
        for (std::size_t i = 0; i < t->value.size(); ++i) g[i] += 2.0 * lambda * v[i];
    }
}

void zero_grads(std::span<ParamTensor* const> params) {
    for (ParamTensor* t : params) t->zero_grad();
}

} // namespace afs
