// Command-line front end: train / hybrid / reuse / eval / synth / heatmap.
// Every run writes its artifacts plus a manifest.json recording the resolved
// configuration, seeds, input fingerprints, and wall time, so any artifact
// can be reproduced bit-exactly from its manifest.

#include "afs/baselines.hpp"
#include "afs/bytes.hpp"
#include "afs/checkpoint.hpp"
#include "afs/data.hpp"
#include "afs/error.hpp"
#include "afs/eval.hpp"
#include "afs/rng.hpp"
#include "afs/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"
#include <omp.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

std::string default_out_dir() {
    const char* env = std::getenv("AFS_OUT_DIR");
    return env && *env ? env : "afs-out";
}

std::string fingerprint_hex(const std::string& path, json& fingerprints) {
    const std::vector<unsigned char> bytes = afs::read_binary_file(path);
    const std::uint64_t h = afs::fnv1a64(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    fingerprints[path] = buf;
    return buf;
}

struct DataOpts {
    std::string images;
    std::string labels;
    std::string csv;
    std::string label_column = "label";
};

void add_data_options(CLI::App* cmd, DataOpts& o, const std::string& prefix,
                      const std::string& what) {
    const std::string p = prefix.empty() ? "--" : "--" + prefix + "-";
    cmd->add_option(p + "images", o.images, "IDX image file (" + what + ")");
    cmd->add_option(p + "labels", o.labels, "IDX label file (" + what + ")");
    cmd->add_option(p + "csv", o.csv, "CSV table with header row (" + what + ")");
    cmd->add_option(p + "label-column", o.label_column, "Label column name for CSV input")
        ->capture_default_str();
}

afs::Dataset load_data(const DataOpts& o, const std::string& prefix, json& fingerprints) {
    const std::string p = prefix.empty() ? "--" : "--" + prefix + "-";
    const bool idx = !o.images.empty() || !o.labels.empty();
    const bool csv = !o.csv.empty();
    if (idx == csv || (idx && (o.images.empty() || o.labels.empty())))
        throw afs::ConfigError("provide either " + p + "csv or both " + p + "images and " + p +
                               "labels");
    if (csv) {
        fingerprint_hex(o.csv, fingerprints);
        return afs::load_csv(o.csv, o.label_column);
    }
    fingerprint_hex(o.images, fingerprints);
    fingerprint_hex(o.labels, fingerprints);
    return afs::load_idx(o.images, o.labels);
}

json dataset_json(const afs::Dataset& ds) {
    return {{"name", ds.name},
            {"samples", ds.sample_count()},
            {"features", ds.feature_count()},
            {"classes", ds.class_count}};
}

struct TrainOpts {
    std::size_t steps = 3000;
    std::size_t batch = 100;
    double lambda = 1e-4;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::size_t extract_dim = 128;
    std::size_t attn_width = 8;
    std::size_t attn_depth = 1;
    std::vector<std::size_t> hidden = {500};
    std::size_t log_every = 50;
};

void add_train_options(CLI::App* cmd, TrainOpts& o) {
    cmd->add_option("--steps", o.steps, "Training steps")->capture_default_str();
    cmd->add_option("--batch", o.batch, "Minibatch size")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "Weight penalty coefficient")->capture_default_str();
    cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    cmd->add_option("--extract-dim", o.extract_dim, "Shared extraction layer width")
        ->capture_default_str();
    cmd->add_option("--attn-width", o.attn_width, "Per-feature net hidden width")
        ->capture_default_str();
    cmd->add_option("--attn-depth", o.attn_depth, "Per-feature net hidden layers")
        ->capture_default_str();
    cmd->add_option("--hidden", o.hidden, "Learner hidden layer widths")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--log-every", o.log_every, "Trace logging cadence")->capture_default_str();
}

afs::TrainConfig to_train_config(const TrainOpts& o, const afs::Dataset& ds) {
    afs::TrainConfig cfg;
    cfg.steps = o.steps;
    cfg.batch_size = o.batch;
    cfg.lambda = o.lambda;
    cfg.seed = o.seed;
    cfg.adam.learning_rate = o.lr;
    cfg.attention.input_dim = ds.feature_count();
    cfg.attention.extract_dim = o.extract_dim;
    cfg.attention.hidden_width = o.attn_width;
    cfg.attention.hidden_layers = o.attn_depth;
    cfg.learner.input_dim = ds.feature_count();
    cfg.learner.class_count = ds.class_count;
    cfg.learner.hidden = o.hidden;
    cfg.log_every = o.log_every;
    return cfg;
}

json train_config_json(const afs::TrainConfig& cfg) {
    return {{"steps", cfg.steps},
            {"batch_size", cfg.batch_size},
            {"lambda", cfg.lambda},
            {"seed", cfg.seed},
            {"adam",
             {{"learning_rate", cfg.adam.learning_rate},
              {"beta1", cfg.adam.beta1},
              {"beta2", cfg.adam.beta2},
              {"epsilon", cfg.adam.epsilon}}},
            {"attention",
             {{"input_dim", cfg.attention.input_dim},
              {"extract_dim", cfg.attention.extract_dim},
              {"hidden_layers", cfg.attention.hidden_layers},
              {"hidden_width", cfg.attention.hidden_width}}},
            {"learner",
             {{"input_dim", cfg.learner.input_dim},
              {"class_count", cfg.learner.class_count},
              {"hidden", cfg.learner.hidden}}},
            {"log_every", cfg.log_every}};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_manifest(const std::string& out_dir, json manifest, Clock::time_point t0) {
    manifest["wall_seconds"] = seconds_since(t0);
    afs::write_text_file_atomic(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& s, char sep,
                                               const std::string& what) {
    const std::size_t pos = s.find(sep);
    std::size_t a = 0, b = 0;
    bool ok = pos != std::string::npos && pos > 0 && pos + 1 < s.size();
    if (ok) {
        auto [p1, e1] = std::from_chars(s.data(), s.data() + pos, a);
        auto [p2, e2] = std::from_chars(s.data() + pos + 1, s.data() + s.size(), b);
        ok = e1 == std::errc() && p1 == s.data() + pos && e2 == std::errc() &&
             p2 == s.data() + s.size();
    }
    if (!ok)
        throw afs::ConfigError(what + ": expected <n>" + sep + "<n>, got '" + s + "'");
    return {a, b};
}

void apply_jobs(int jobs) {
    if (jobs > 0) omp_set_num_threads(jobs);
}

void write_train_artifacts(const std::string& out_dir, const afs::AfsModel& model,
                           const afs::TrainReport& report, json& manifest) {
    std::filesystem::create_directories(out_dir);
    const std::string ckpt = out_dir + "/model.ckpt";
    const std::string weights = out_dir + "/weights.csv";
    const std::string trace = out_dir + "/trace.csv";
    afs::save_checkpoint(model, ckpt);
    afs::export_weights(report.weights, "afs", weights);
    afs::write_text_file_atomic(trace, afs::trace_csv(report));
    manifest["artifacts"] = {ckpt, weights, trace, out_dir + "/manifest.json"};
    manifest["steps_run"] = report.steps_run;
    manifest["train_wall_seconds"] = report.wall_seconds;
}

// ---- subcommand bodies ----------------------------------------------------

int run_train(const DataOpts& data, const TrainOpts& topts, const std::string& out_dir,
              int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "train";
    json fingerprints;
    const afs::Dataset ds = load_data(data, "", fingerprints);
    manifest["inputs"] = fingerprints;
    manifest["dataset"] = dataset_json(ds);

    const afs::TrainConfig cfg = to_train_config(topts, ds);
    manifest["config"] = train_config_json(cfg);
    afs::TrainResult result = afs::train_afs(ds, cfg);

    write_train_artifacts(out_dir, result.model, result.report, manifest);
    write_manifest(out_dir, manifest, t0);
    std::printf("trained %zu steps on %s in %.1fs\n", result.report.steps_run, ds.name.c_str(),
                result.report.wall_seconds);
    std::printf("artifacts in %s\n", out_dir.c_str());
    return 0;
}

int run_hybrid(const DataOpts& data, const TrainOpts& topts, const std::string& base_name,
               std::size_t pretrain_steps, double mse_tol, std::size_t relieff_k,
               std::size_t relieff_samples, const std::string& out_dir, int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "hybrid";
    json fingerprints;
    const afs::Dataset ds = load_data(data, "", fingerprints);
    manifest["inputs"] = fingerprints;
    manifest["dataset"] = dataset_json(ds);

    afs::BaseMethodConfig base;
    base.method = base_name == "fisher" ? afs::BaseMethod::Fisher : afs::BaseMethod::ReliefF;
    base.relieff_neighbors = relieff_k;
    base.relieff_samples = relieff_samples;

    const afs::TrainConfig cfg = to_train_config(topts, ds);
    afs::PretrainConfig pre;
    pre.max_steps = pretrain_steps;
    pre.batch_size = cfg.batch_size;
    pre.lambda = cfg.lambda;
    pre.seed = cfg.seed;
    pre.adam = cfg.adam;
    pre.mse_tolerance = mse_tol;
    pre.log_every = cfg.log_every;

    manifest["config"] = train_config_json(cfg);
    manifest["pretrain"] = {{"max_steps", pre.max_steps},
                            {"mse_tolerance", pre.mse_tolerance},
                            {"base_method", base_name},
                            {"relieff_neighbors", relieff_k},
                            {"relieff_samples", relieff_samples}};

    afs::HybridResult result = afs::hybrid_init_train(ds, base, pre, cfg);
    manifest["pretrain"]["targets"] = result.targets;
    manifest["pretrain"]["steps_run"] = result.pretrain_report.steps_run;
    manifest["pretrain"]["final_mse"] = result.pretrain_report.final_match_mse;

    write_train_artifacts(out_dir, result.model, result.report, manifest);
    afs::export_weights(result.base_weights, base_name, out_dir + "/base_weights.csv");
    afs::write_text_file_atomic(out_dir + "/pretrain_trace.csv",
                                afs::trace_csv(result.pretrain_report));
    manifest["artifacts"].push_back(out_dir + "/base_weights.csv");
    manifest["artifacts"].push_back(out_dir + "/pretrain_trace.csv");
    write_manifest(out_dir, manifest, t0);
    std::printf("hybrid (%s) pretrained %zu steps (final mse %.3g), trained %zu steps\n",
                base_name.c_str(), result.pretrain_report.steps_run,
                result.pretrain_report.final_match_mse, result.report.steps_run);
    std::printf("artifacts in %s\n", out_dir.c_str());
    return 0;
}

int run_reuse(const DataOpts& data, const TrainOpts& topts, const std::string& checkpoint,
              const std::string& mode_name, const std::string& out_dir, int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "reuse";
    json fingerprints;
    const afs::Dataset ds = load_data(data, "", fingerprints);
    fingerprint_hex(checkpoint, fingerprints);
    manifest["inputs"] = fingerprints;
    manifest["dataset"] = dataset_json(ds);

    const afs::ReuseMode mode =
        mode_name == "global" ? afs::ReuseMode::GlobalTune : afs::ReuseMode::LocalTune;
    const afs::TrainConfig cfg = to_train_config(topts, ds);
    manifest["config"] = train_config_json(cfg);
    manifest["reuse"] = {{"checkpoint", checkpoint},
                         {"mode", mode_name},
                         {"learner_frozen", mode == afs::ReuseMode::LocalTune}};

    afs::TrainResult result = afs::finetune_reused(ds, checkpoint, mode, cfg);
    write_train_artifacts(out_dir, result.model, result.report, manifest);
    write_manifest(out_dir, manifest, t0);
    std::printf("reuse (%s) fine-tuned %zu steps in %.1fs\n", mode_name.c_str(),
                result.report.steps_run, result.report.wall_seconds);
    std::printf("artifacts in %s\n", out_dir.c_str());
    return 0;
}

int run_eval(const DataOpts& data, const DataOpts& test_data, const std::string& weights_path,
             const std::string& cv, std::size_t k_min, std::size_t k_max, std::size_t k_step,
             const std::string& avg, std::size_t bench_hidden, std::size_t bench_steps,
             std::size_t bench_batch, double bench_lr, std::uint64_t seed,
             const std::string& out_dir, int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "eval";
    json fingerprints;
    fingerprint_hex(weights_path, fingerprints);
    const afs::ImportedWeights iw = afs::import_weights(weights_path);
    const afs::Dataset ds = load_data(data, "", fingerprints);
    if (iw.weights.size() != ds.feature_count())
        throw afs::DataError(weights_path + ": " + std::to_string(iw.weights.size()) +
                             " weights for " + std::to_string(ds.feature_count()) +
                             " dataset features");

    afs::KGrid grid{k_min, k_max, k_step};
    if (k_max > ds.feature_count())
        throw afs::ConfigError("--k-max " + std::to_string(k_max) + " exceeds " +
                               std::to_string(ds.feature_count()) + " features");
    afs::EvalConfig ecfg;
    ecfg.hidden = bench_hidden;
    ecfg.steps = bench_steps;
    ecfg.batch_size = bench_batch;
    ecfg.learning_rate = bench_lr;
    ecfg.seed = seed;
    manifest["config"] = {{"weights", weights_path},   {"method", iw.method},
                          {"k_min", k_min},            {"k_max", k_max},
                          {"k_step", k_step},          {"bench_hidden", bench_hidden},
                          {"bench_steps", bench_steps},{"bench_batch", bench_batch},
                          {"bench_lr", bench_lr},      {"seed", seed}};

    afs::AccuracyCurve curve;
    if (!cv.empty()) {
        const auto [repeats, folds] = parse_pair(cv, 'x', "--cv");
        const afs::SplitPlan plan =
            afs::kfold_splits(ds.sample_count(), folds, repeats, seed, &ds.labels);
        if (plan.fallback_warning)
            std::fprintf(stderr,
                         "warning: a class has fewer samples than folds; "
                         "using unstratified folds\n");
        manifest["config"]["cv"] = {{"repeats", repeats},
                                    {"folds", folds},
                                    {"stratified", plan.stratified}};
        curve = afs::cross_validated_curve(
            ds, plan, [&](const afs::Dataset&) { return iw.weights; }, grid, ecfg);
    } else {
        const afs::Dataset test = load_data(test_data, "test", fingerprints);
        curve = afs::accuracy_curve(ds, test, afs::rank_features(iw.weights), grid, ecfg);
        manifest["test_dataset"] = dataset_json(test);
    }
    curve.method = iw.method;
    manifest["inputs"] = fingerprints;
    manifest["dataset"] = dataset_json(ds);

    std::filesystem::create_directories(out_dir);
    const std::string curve_path = out_dir + "/curve.csv";
    afs::write_text_file_atomic(curve_path, afs::curve_csv(curve));
    manifest["artifacts"] = {curve_path, out_dir + "/manifest.json"};
    if (!avg.empty()) {
        const auto [lo, hi] = parse_pair(avg, ':', "--avg");
        const double mean = afs::average_accuracy(curve, lo, hi);
        manifest["average_accuracy"] = {{"k_lo", lo}, {"k_hi", hi}, {"value", mean}};
        std::printf("average accuracy over K in [%zu, %zu]: %.4f\n", lo, hi, mean);
    }
    write_manifest(out_dir, manifest, t0);
    std::printf("curve (%zu points, method %s) -> %s\n", curve.points.size(),
                curve.method.c_str(), curve_path.c_str());
    return 0;
}

int run_synth(const DataOpts& data, const std::string& noise, double snr_db,
              std::size_t length, double angle, double contrast, std::uint64_t seed,
              const std::string& name_override, const std::string& out_dir, int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "synth";
    json fingerprints;
    const afs::Dataset ds = load_data(data, "", fingerprints);
    manifest["inputs"] = fingerprints;
    manifest["dataset"] = dataset_json(ds);

    afs::Dataset out;
    afs::NoiseInfo info;
    json params = {{"noise", noise}, {"seed", seed}};
    if (noise == "awgn") {
        params["snr_db"] = snr_db;
        out = afs::synthesize_awgn(ds, snr_db, seed, &info);
        params["achieved_snr_db"] = info.achieved_snr_db;
    } else if (noise == "mb") {
        params["kernel_length"] = length;
        params["angle_deg"] = angle;
        out = afs::synthesize_motion_blur(ds, length, angle);
    } else {
        params["contrast_factor"] = contrast;
        params["snr_db"] = snr_db;
        out = afs::synthesize_rc_awgn(ds, contrast, snr_db, seed, &info);
        params["achieved_snr_db"] = info.achieved_snr_db;
    }

    const std::string base = name_override.empty() ? out.name : name_override;
    std::filesystem::create_directories(out_dir);
    const std::string images_path = out_dir + "/" + base + "-images.idx";
    const std::string labels_path = out_dir + "/" + base + "-labels.idx";
    const std::string sidecar = out_dir + "/" + base + "-noise.json";
    afs::save_idx(out, images_path, labels_path);
    afs::write_text_file_atomic(sidecar, params.dump(2) + "\n");
    manifest["noise"] = params;
    manifest["artifacts"] = {images_path, labels_path, sidecar, out_dir + "/manifest.json"};
    write_manifest(out_dir, manifest, t0);
    std::printf("synthesized %s -> %s\n", out.name.c_str(), images_path.c_str());
    return 0;
}

int run_heatmap(const std::string& weights_path, const std::vector<std::size_t>& tiers,
                const std::string& shape, const std::string& out_name,
                const std::string& out_dir, int jobs) {
    apply_jobs(jobs);
    const Clock::time_point t0 = Clock::now();
    json manifest;
    manifest["command"] = "heatmap";
    json fingerprints;
    fingerprint_hex(weights_path, fingerprints);
    manifest["inputs"] = fingerprints;

    const afs::ImportedWeights iw = afs::import_weights(weights_path);
    const auto [rows, cols] = parse_pair(shape, 'x', "--shape");
    if (rows * cols != iw.weights.size())
        throw afs::ConfigError("--shape " + shape + " does not match " +
                               std::to_string(iw.weights.size()) + " features");
    for (std::size_t k : tiers)
        if (k == 0 || k > iw.weights.size())
            throw afs::ConfigError("--tiers entry " + std::to_string(k) + " outside [1, " +
                                   std::to_string(iw.weights.size()) + "]");

    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/" + out_name;
    afs::export_heatmap(afs::rank_features(iw.weights), tiers, rows, cols, path);
    manifest["config"] = {{"weights", weights_path},
                          {"method", iw.method},
                          {"tiers", tiers},
                          {"shape", shape}};
    manifest["artifacts"] = {path, out_dir + "/manifest.json"};
    write_manifest(out_dir, manifest, t0);
    std::printf("heatmap (%zu tiers, method %s) -> %s\n", tiers.size(), iw.method.c_str(),
                path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention-based feature selection toolkit"};
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "OpenMP thread count (default: all cores)");

    std::string out_dir = default_out_dir();

    // train
    auto* train = app.add_subcommand("train", "Jointly train the selection model");
    train->set_config("--config");
    DataOpts train_data;
    TrainOpts train_opts;
    std::string train_out = out_dir;
    add_data_options(train, train_data, "", "training data");
    add_train_options(train, train_opts);
    train->add_option("--out-dir", train_out, "Artifact directory")->capture_default_str();

    // hybrid
    auto* hybrid = app.add_subcommand("hybrid", "Filter-method warm start, then joint training");
    hybrid->set_config("--config");
    DataOpts hybrid_data;
    TrainOpts hybrid_opts;
    std::string hybrid_out = out_dir;
    std::string base_name;
    std::size_t pretrain_steps = 1000;
    double mse_tol = 1e-4;
    std::size_t relieff_k = 5;
    std::size_t relieff_samples = 0;
    add_data_options(hybrid, hybrid_data, "", "training data");
    add_train_options(hybrid, hybrid_opts);
    hybrid->add_option("--base", base_name, "Warm-start filter method")
        ->required()
        ->check(CLI::IsMember({"fisher", "relieff"}));
    hybrid->add_option("--pretrain-steps", pretrain_steps, "Maximum pretraining steps")
        ->capture_default_str();
    hybrid->add_option("--mse-tol", mse_tol, "Pretraining early-stop MSE")->capture_default_str();
    hybrid->add_option("--relieff-k", relieff_k, "ReliefF neighbor count")->capture_default_str();
    hybrid->add_option("--relieff-samples", relieff_samples,
                       "ReliefF visited instances (0 = all)")
        ->capture_default_str();
    hybrid->add_option("--out-dir", hybrid_out, "Artifact directory")->capture_default_str();

    // reuse
    auto* reuse = app.add_subcommand("reuse", "Fine-tune starting from a saved learner");
    reuse->set_config("--config");
    DataOpts reuse_data;
    TrainOpts reuse_opts;
    std::string reuse_out = out_dir;
    std::string checkpoint;
    std::string mode_name;
    add_data_options(reuse, reuse_data, "", "training data");
    add_train_options(reuse, reuse_opts);
    reuse->add_option("--checkpoint", checkpoint, "Checkpoint carrying learner tensors")
        ->required();
    reuse->add_option("--mode", mode_name, "global (tune both) or local (freeze learner)")
        ->required()
        ->check(CLI::IsMember({"global", "local"}));
    reuse->add_option("--out-dir", reuse_out, "Artifact directory")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Top-K accuracy curve for saved feature weights");
    eval->set_config("--config");
    DataOpts eval_data, eval_test;
    std::string eval_out = out_dir;
    std::string weights_path, cv, avg;
    std::size_t k_min = 15, k_max = 295, k_step = 10;
    std::size_t bench_hidden = 500, bench_steps = 3000, bench_batch = 100;
    double bench_lr = 1e-3;
    std::uint64_t eval_seed = 0;
    add_data_options(eval, eval_data, "", "training data");
    add_data_options(eval, eval_test, "test", "held-out data");
    eval->add_option("--weights", weights_path, "Feature weights CSV")->required();
    eval->add_option("--cv", cv, "Cross-validate as <repeats>x<folds> instead of a holdout");
    eval->add_option("--k-min", k_min, "Smallest K")->capture_default_str();
    eval->add_option("--k-max", k_max, "Largest K")->capture_default_str();
    eval->add_option("--k-step", k_step, "K increment")->capture_default_str();
    eval->add_option("--avg", avg, "Also report mean accuracy over <lo>:<hi>");
    eval->add_option("--bench-hidden", bench_hidden, "Benchmark hidden width")
        ->capture_default_str();
    eval->add_option("--bench-steps", bench_steps, "Benchmark training steps")
        ->capture_default_str();
    eval->add_option("--bench-batch", bench_batch, "Benchmark batch size")->capture_default_str();
    eval->add_option("--bench-lr", bench_lr, "Benchmark learning rate")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Master seed")->capture_default_str();
    eval->add_option("--out-dir", eval_out, "Artifact directory")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Write a noise-corrupted copy of a dataset");
    synth->set_config("--config");
    DataOpts synth_data;
    std::string synth_out = out_dir;
    std::string noise, synth_name;
    double snr_db = 9.5, angle = 15.0, contrast = 0.5;
    std::size_t length = 5;
    std::uint64_t synth_seed = 0;
    add_data_options(synth, synth_data, "", "source data");
    synth->add_option("--noise", noise, "awgn, mb (motion blur), or rcawgn")
        ->required()
        ->check(CLI::IsMember({"awgn", "mb", "rcawgn"}));
    synth->add_option("--snr-db", snr_db, "Noise level for awgn/rcawgn")->capture_default_str();
    synth->add_option("--length", length, "Motion blur kernel length")->capture_default_str();
    synth->add_option("--angle", angle, "Motion blur angle in degrees")->capture_default_str();
    synth->add_option("--contrast", contrast, "Contrast factor for rcawgn")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "Noise seed (required for reproducibility)")
        ->required();
    synth->add_option("--name", synth_name, "Output base name (default: derived)");
    synth->add_option("--out-dir", synth_out, "Artifact directory")->capture_default_str();

    // heatmap
    auto* heatmap = app.add_subcommand("heatmap", "Render selection tiers as a PGM image");
    heatmap->set_config("--config");
    std::string hm_weights, hm_shape = "28x28", hm_name = "heatmap.pgm";
    std::string hm_out = out_dir;
    std::vector<std::size_t> tiers = {65, 165, 350};
    heatmap->add_option("--weights", hm_weights, "Feature weights CSV")->required();
    heatmap->add_option("--tiers", tiers, "Top-K tier boundaries")
        ->delimiter(',')
        ->capture_default_str();
    heatmap->add_option("--shape", hm_shape, "Image shape as <rows>x<cols>")
        ->capture_default_str();
    heatmap->add_option("--name", hm_name, "Output file name")->capture_default_str();
    heatmap->add_option("--out-dir", hm_out, "Artifact directory")->capture_default_str();

    int rc = 0;
    train->callback([&] { rc = run_train(train_data, train_opts, train_out, jobs); });
    hybrid->callback([&] {
        rc = run_hybrid(hybrid_data, hybrid_opts, base_name, pretrain_steps, mse_tol, relieff_k,
                        relieff_samples, hybrid_out, jobs);
    });
    reuse->callback(
        [&] { rc = run_reuse(reuse_data, reuse_opts, checkpoint, mode_name, reuse_out, jobs); });
    eval->callback([&] {
        rc = run_eval(eval_data, eval_test, weights_path, cv, k_min, k_max, k_step, avg,
                      bench_hidden, bench_steps, bench_batch, bench_lr, eval_seed, eval_out,
                      jobs);
    });
    synth->callback([&] {
        rc = run_synth(synth_data, noise, snr_db, length, angle, contrast, synth_seed,
                       synth_name, synth_out, jobs);
    });
    heatmap->callback(
        [&] { rc = run_heatmap(hm_weights, tiers, hm_shape, hm_name, hm_out, jobs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const afs::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const afs::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
