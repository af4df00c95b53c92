#include "afs/trainer.hpp"

#include "afs/baselines.hpp"
#include "afs/checkpoint.hpp"
#include "afs/error.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace afs {

namespace {

void validate_common(std::size_t batch_size, double lambda, std::size_t log_every,
                     const AdamConfig& adam) {
    if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (lambda < 0.0) throw ConfigError("train: lambda must be nonnegative");
    if (log_every == 0) throw ConfigError("train: log_every must be positive");
    try {
        adam.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

void TrainConfig::validate() const { validate_common(batch_size, lambda, log_every, adam); }

void PretrainConfig::validate() const {
    validate_common(batch_size, lambda, log_every, adam);
    if (mse_tolerance < 0.0) throw ConfigError("pretrain: mse_tolerance must be nonnegative");
}

std::string trace_csv(const TrainReport& report) {
    std::string out = "step,objective\n";
    char buf[64];
    for (const TraceEntry& e : report.trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e.step, e.objective);
        out += buf;
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

AttentionConfig fill_attention(AttentionConfig cfg, const Dataset& train) {
    if (cfg.input_dim == 0) cfg.input_dim = train.feature_count();
    return cfg;
}

LearnerConfig fill_learner(LearnerConfig cfg, const Dataset& train) {
    if (cfg.input_dim == 0) cfg.input_dim = train.feature_count();
    if (cfg.class_count == 0) cfg.class_count = train.class_count;
    return cfg;
}

void check_model_fits(const AfsModel& model, const Dataset& train) {
    if (model.attention.config.input_dim != train.feature_count())
        throw ConfigError("train: model expects " +
                          std::to_string(model.attention.config.input_dim) +
                          " features, dataset " + train.name + " has " +
                          std::to_string(train.feature_count()));
    if (model.learner.config.class_count < train.class_count)
        throw ConfigError("train: learner outputs " +
                          std::to_string(model.learner.config.class_count) +
                          " classes, dataset " + train.name + " has " +
                          std::to_string(train.class_count));
}

void log_point(TrainReport& report, std::size_t step, std::size_t log_every, double value) {
    if (step == 1 || step % log_every == 0) report.trace.push_back({step, value});
}

void log_final(TrainReport& report, double value) {
    if (report.steps_run > 0 &&
        (report.trace.empty() || report.trace.back().step != report.steps_run))
        report.trace.push_back({report.steps_run, value});
}

} // namespace

TrainReport train_afs_warm(AfsModel& model, const Dataset& train, const TrainConfig& config) {
    config.validate();
    train.validate();
    check_model_fits(model, train);

    const Clock::time_point t0 = Clock::now();
    std::vector<ParamTensor*> all = model.tensors();
    for (ParamTensor* t : all) {
        t->zero_grad();
        t->zero_adam_state();
    }

    TrainReport report;
    BatchIterator batches(train.sample_count(), config.batch_size,
                          derive_seed(config.seed, "batches"));
    double last_objective = 0.0;
    for (std::size_t step = 1; step <= config.steps; ++step) {
        const std::vector<std::size_t>& idx = batches.next();
        Matrix bx = gather_rows(train.features, idx);
        std::vector<int> by = gather_labels(train.labels, idx);
        last_objective = afs_loss_and_grad(model, bx, by, config.lambda);
        adam_step(all, config.adam, static_cast<std::int64_t>(step));
        log_point(report, step, config.log_every, last_objective);
    }
    report.steps_run = config.steps;
    log_final(report, last_objective);
    report.weights = compute_dataset_weights(model.attention, train.features);
    report.wall_seconds = seconds_since(t0);
    return report;
}

TrainResult train_afs(const Dataset& train, const TrainConfig& config) {
    train.validate();
    TrainConfig cfg = config;
    cfg.attention = fill_attention(cfg.attention, train);
    cfg.learner = fill_learner(cfg.learner, train);
    cfg.validate();

    TrainResult result{AfsModel(cfg.attention, cfg.learner), TrainReport{}};
    result.model.init(cfg.seed);
    result.report = train_afs_warm(result.model, train, cfg);
    return result;
}

TrainReport pretrain_attention(AfsModel& model, const Dataset& train,
                               const std::vector<double>& targets,
                               const PretrainConfig& config) {
    config.validate();
    train.validate();
    if (model.attention.config.input_dim != train.feature_count())
        throw ConfigError("pretrain: model expects " +
                          std::to_string(model.attention.config.input_dim) +
                          " features, dataset " + train.name + " has " +
                          std::to_string(train.feature_count()));

    const Clock::time_point t0 = Clock::now();
    std::vector<ParamTensor*> attn = model.attention.tensors();
    for (ParamTensor* t : attn) {
        t->zero_grad();
        t->zero_adam_state();
    }

    TrainReport report;
    BatchIterator batches(train.sample_count(), config.batch_size,
                          derive_seed(config.seed, "pretrain"));
    double last_mse = 0.0;
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
        const std::vector<std::size_t>& idx = batches.next();
        Matrix bx = gather_rows(train.features, idx);
        pretrain_loss_and_grad(model, bx, targets, config.lambda, &last_mse);
        adam_step(attn, config.adam, static_cast<std::int64_t>(step));
        log_point(report, step, config.log_every, last_mse);
        report.steps_run = step;
        if (last_mse < config.mse_tolerance) break;
    }
    report.final_match_mse = last_mse;
    log_final(report, last_mse);
    report.weights = compute_dataset_weights(model.attention, train.features);
    report.wall_seconds = seconds_since(t0);
    return report;
}

HybridResult hybrid_init_train(const Dataset& train, const BaseMethodConfig& base,
                               const PretrainConfig& pretrain_config,
                               const TrainConfig& train_config) {
    train.validate();
    TrainConfig cfg = train_config;
    cfg.attention = fill_attention(cfg.attention, train);
    cfg.learner = fill_learner(cfg.learner, train);
    cfg.validate();
    pretrain_config.validate();

    std::vector<double> base_weights;
    switch (base.method) {
        case BaseMethod::Fisher:
            base_weights = fisher_score(train.features, train.labels);
            break;
        case BaseMethod::ReliefF:
            base_weights = relieff(train.features, train.labels, base.relieff_neighbors,
                                   base.relieff_samples, derive_seed(cfg.seed, "relieff"));
            break;
    }
    std::vector<double> targets = min_max_normalize(base_weights);

    HybridResult result{AfsModel(cfg.attention, cfg.learner),
                        std::move(base_weights),
                        std::move(targets),
                        TrainReport{},
                        TrainReport{}};
    result.model.init(cfg.seed);
    result.pretrain_report = pretrain_attention(result.model, train, result.targets,
                                                pretrain_config);
    result.report = train_afs_warm(result.model, train, cfg);
    return result;
}

TrainResult finetune_reused(const Dataset& train, const std::string& learner_checkpoint,
                            ReuseMode mode, const TrainConfig& config) {
    train.validate();
    const CheckpointInfo info = read_checkpoint_info(learner_checkpoint);
    if (!info.has_learner)
        throw DataError(learner_checkpoint + ": checkpoint has no learner parameters");
    if (info.learner.input_dim != train.feature_count())
        throw DataError(learner_checkpoint + ": checkpoint learner expects " +
                        std::to_string(info.learner.input_dim) + " features, dataset " +
                        train.name + " has " + std::to_string(train.feature_count()));
    if (info.learner.class_count < train.class_count)
        throw DataError(learner_checkpoint + ": checkpoint learner outputs " +
                        std::to_string(info.learner.class_count) + " classes, dataset " +
                        train.name + " has " + std::to_string(train.class_count));

    TrainConfig cfg = config;
    cfg.attention = fill_attention(cfg.attention, train);
    cfg.learner = info.learner;
    cfg.validate();

    TrainResult result{AfsModel(cfg.attention, cfg.learner), TrainReport{}};
    result.model.init(cfg.seed);
    load_checkpoint(result.model, learner_checkpoint, CheckpointPart::Learner);
    if (mode == ReuseMode::LocalTune) set_frozen(result.model.learner, true);
    result.report = train_afs_warm(result.model, train, cfg);
    return result;
}

} // namespace afs
