#pragma once

#include "afs/attention.hpp"
#include "afs/matrix.hpp"
#include "afs/ops.hpp"
#include "afs/tensor.hpp"

#include <cstdint>
#include <vector>

namespace afs {

// The task network trained jointly with the attention subnetwork. It sees
// the attention-weighted inputs and produces class logits.
struct LearnerConfig {
    std::size_t input_dim = 0;
    std::size_t class_count = 0;
    std::vector<std::size_t> hidden = {500}; // rectifier layer widths

    void validate() const;
};

struct LearnerParams {
    LearnerConfig config;
    std::vector<DenseLayer> layers; // hidden layers plus a linear output layer

    explicit LearnerParams(const LearnerConfig& cfg);

    void init(std::uint64_t seed, double stddev = 0.1);
    std::vector<ParamTensor*> tensors();
    std::vector<const ParamTensor*> tensors() const;
    std::size_t parameter_count() const;
};

// Marks every learner tensor (non-)trainable. Frozen tensors keep their
// values through optimizer steps and drop out of the weight penalty.
void set_frozen(LearnerParams& params, bool frozen);

// Elementwise product of inputs and attention values: the learner's input.
Matrix weight_features(const Matrix& x, const Matrix& attention);

Matrix learner_forward(const LearnerParams& params, const Matrix& weighted, StackCache* cache);

// The full selection model: attention subnetwork plus task learner.
struct AfsModel {
    AttentionParams attention;
    LearnerParams learner;

    AfsModel(const AttentionConfig& attention_cfg, const LearnerConfig& learner_cfg);

    void init(std::uint64_t seed, double stddev = 0.1);
    std::vector<ParamTensor*> tensors(); // attention first, then learner
    std::vector<const ParamTensor*> tensors() const;
    std::vector<ParamTensor*> trainable_tensors();
};

// Class logits for inputs x (forward through attention, weighting, learner).
Matrix afs_predict(const AfsModel& model, const Matrix& x);

// Training objective: cross-entropy on the batch plus lambda times the
// squared-magnitude penalty over trainable weight tensors.
double afs_objective(const AfsModel& model, const Matrix& x, const std::vector<int>& labels,
                     double lambda);

// Same value as afs_objective, and accumulates parameter gradients.
double afs_loss_and_grad(AfsModel& model, const Matrix& x, const std::vector<int>& labels,
                         double lambda);

// Pretraining objective for warm-starting the attention subnetwork from
// precomputed per-feature targets in [0, 1]: mean over samples of the squared
// distance between the attention row and the target vector, plus lambda times
// the penalty over attention weight tensors. Learner tensors are untouched.
// When given, match_mse receives the per-entry mean squared error between
// attention values and targets (the convergence metric).
double pretrain_objective(const AfsModel& model, const Matrix& x,
                          const std::vector<double>& targets, double lambda,
                          double* match_mse = nullptr);
double pretrain_loss_and_grad(AfsModel& model, const Matrix& x,
                              const std::vector<double>& targets, double lambda,
                              double* match_mse = nullptr);

} // namespace afs
