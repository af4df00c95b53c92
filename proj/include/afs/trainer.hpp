#pragma once

#include "afs/data.hpp"
#include "afs/learner.hpp"
#include "afs/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afs {

struct TrainConfig {
    std::size_t steps = 3000;
    std::size_t batch_size = 100;
    double lambda = 1e-4;
    std::uint64_t seed = 0;
    AdamConfig adam;
    AttentionConfig attention; // input_dim 0 = take from the dataset
    LearnerConfig learner;     // input_dim/class_count 0 = take from the dataset
    std::size_t log_every = 50;

    void validate() const;
};

struct PretrainConfig {
    std::size_t max_steps = 1000;
    std::size_t batch_size = 100;
    double lambda = 1e-4;
    std::uint64_t seed = 0;
    AdamConfig adam;
    double mse_tolerance = 1e-4; // stop early below this per-entry MSE
    std::size_t log_every = 50;

    void validate() const;
};

struct TraceEntry {
    std::size_t step = 0;
    double objective = 0.0;
};

struct TrainReport {
    std::vector<TraceEntry> trace; // step 1, every log_every, and the last step
    std::vector<double> weights;   // selection weights over the full training inputs
    std::size_t steps_run = 0;
    double wall_seconds = 0.0;
    // Pretraining only: last batch per-entry MSE between attention and targets.
    double final_match_mse = 0.0;
};

// CSV rendering of the trace: header "step,objective", one row per entry.
std::string trace_csv(const TrainReport& report);

struct TrainResult {
    AfsModel model;
    TrainReport report;
};

// Builds a fresh truncated-normal-initialized model from the config (filling
// unset dimensions from the dataset) and trains it jointly for config.steps
// minibatch Adam steps. Deterministic given (dataset, config, seed).
TrainResult train_afs(const Dataset& train, const TrainConfig& config);

// Same training loop, but continues from the model's current parameter
// values. Gradients and Adam state are reset at entry; frozen tensors are
// never updated. The trailing selection weights always come from the full
// training inputs.
TrainReport train_afs_warm(AfsModel& model, const Dataset& train, const TrainConfig& config);

// Trains only the attention parameters so that each sample's attention row
// approaches the target weights (which must lie in [0, 1]). Stops after
// max_steps or once the batch per-entry MSE drops below mse_tolerance.
// The trace records that MSE; the learner is untouched.
TrainReport pretrain_attention(AfsModel& model, const Dataset& train,
                               const std::vector<double>& targets,
                               const PretrainConfig& config);

// Filter method feeding hybrid initialization.
enum class BaseMethod { Fisher, ReliefF };

struct BaseMethodConfig {
    BaseMethod method = BaseMethod::Fisher;
    std::size_t relieff_neighbors = 5;
    std::size_t relieff_samples = 0; // 0 = visit every instance
};

struct HybridResult {
    AfsModel model;
    std::vector<double> base_weights; // raw filter-method weights
    std::vector<double> targets;      // after min-max normalization
    TrainReport pretrain_report;
    TrainReport report;
};

// Three stages: run the base filter method and min-max normalize its weights,
// pretrain the attention subnetwork toward them, then joint training
// continuing from the pretrained attention parameters. With
// pretrain.max_steps = 0 this matches train_afs with the same seed exactly.
HybridResult hybrid_init_train(const Dataset& train, const BaseMethodConfig& base,
                               const PretrainConfig& pretrain_config,
                               const TrainConfig& train_config);

enum class ReuseMode { GlobalTune, LocalTune };

// Starts from a saved learner: attention parameters are freshly initialized,
// the learner comes from the checkpoint (its architecture echo overrides
// config.learner). GlobalTune fine-tunes both parts; LocalTune freezes the
// learner so its tensors stay bit-identical to the checkpoint.
TrainResult finetune_reused(const Dataset& train, const std::string& learner_checkpoint,
                            ReuseMode mode, const TrainConfig& config);

} // namespace afs
