#include "prefdiff/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "prefdiff/errors.hpp"
#include "prefdiff/parallel.hpp"
#include "prefdiff/rng.hpp"

namespace prefdiff {

namespace fs = std::filesystem;

ToyWorld world_from_config(const RunConfig& cfg) {
    WorldConfig w;
    w.vocab_size = cfg.vocab_size;
    w.sample_dim = cfg.sample_dim;
    w.embed_dim = cfg.embed_dim;
    w.n_slots = cfg.n_slots;
    w.scorer_noise = cfg.scorer_noise;
    w.seed = derive_seed(cfg.seed, "world");
    return ToyWorld(w);
}

NoiseSchedule schedule_from_config(const RunConfig& cfg) {
    return build_linear_schedule(cfg.n_steps, cfg.beta_start, cfg.beta_end);
}

DenoiserArch arch_from_config(const RunConfig& cfg) {
    DenoiserArch arch;
    arch.sample_dim = cfg.sample_dim;
    arch.hidden = cfg.hidden;
    arch.time_embed_dim = cfg.time_embed_dim;
    arch.cond_embed_dim = cfg.embed_dim;
    arch.vocab_size = cfg.vocab_size;
    arch.n_slots = cfg.n_slots;
    arch.cond_seed = derive_seed(derive_seed(cfg.seed, "world"), "cond-features");
    arch.nonlinearity = cfg.nonlinearity;
    return arch;
}

GuidanceConfig guidance_from_config(const RunConfig& cfg) {
    return {cfg.guidance_scale, cfg.n_inference_steps};
}

DpoConfig dpo_from_config(const RunConfig& cfg) {
    DpoConfig d;
    d.beta = cfg.dpo_beta;
    d.weighting = cfg.dpo_weighting;
    d.coeff = cfg.coeff;
    return d;
}

std::vector<LabeledSample> make_pretrain_data(const RunConfig& cfg, const ToyWorld& world) {
    std::vector<ConditionSpec> conds = world.condition_pool(
        cfg.pretrain_size, derive_seed(cfg.seed, "pretrain-conds"), "p", 1, cfg.n_slots);
    std::uint64_t synth_seed = derive_seed(cfg.seed, "pretrain-synth");
    std::vector<LabeledSample> data(conds.size());
    parallel_for(static_cast<int>(conds.size()), cfg.workers, [&](int i) {
        Sample x0 = world.synthesize_ground_truth(conds[i], cfg.noise_scale,
                                                  derive_seed(synth_seed, static_cast<std::uint64_t>(i)));
        data[i] = {std::move(conds[i]), std::move(x0)};
    });
    return data;
}

static CheckpointHeader make_header(const RunConfig& cfg, const DenoiserArch& arch,
                                    const std::string& phase, std::int64_t steps) {
    CheckpointHeader h;
    h.arch = arch;
    h.n_steps = cfg.n_steps;
    h.beta_start = cfg.beta_start;
    h.beta_end = cfg.beta_end;
    h.coeff = cfg.coeff;
    h.seed = cfg.seed;
    h.phase = phase;
    h.step_count = steps;
    return h;
}

void check_header_matches(const RunConfig& cfg, const CheckpointHeader& h) {
    if (h.n_steps != cfg.n_steps || h.beta_start != cfg.beta_start ||
        h.beta_end != cfg.beta_end)
        throw ConfigError("checkpoint schedule does not match the config");
    if (h.coeff != cfg.coeff)
        throw ConfigError("checkpoint forward_coeff does not match the config");
    if (!(h.arch == arch_from_config(cfg)))
        throw ConfigError("checkpoint architecture does not match the config");
}

std::string run_pretrain(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ToyWorld world = world_from_config(cfg);
    NoiseSchedule schedule = schedule_from_config(cfg);
    std::vector<LabeledSample> data = make_pretrain_data(cfg, world);

    TrainConfig tc;
    tc.epochs = cfg.pretrain_epochs;
    tc.lr = cfg.pretrain_lr;
    tc.weight_decay = cfg.weight_decay;
    tc.batch_size = cfg.batch_size;
    tc.grad_accum = cfg.grad_accum;
    tc.seed = derive_seed(cfg.seed, "pretrain-train");
    tc.cond_dropout = cfg.cond_dropout;
    tc.augment_prob = cfg.augment_prob;
    tc.gamma_mode = cfg.gamma_weighting;
    tc.coeff = cfg.coeff;
    tc.metrics_path = (fs::path(out_dir) / "pretrain_metrics.csv").string();

    TrainOutcome out = train_reference(tc, arch_from_config(cfg), data, schedule);

    std::string ckpt = (fs::path(out_dir) / "reference.ckpt").string();
    save_checkpoint(ckpt, out.model,
                    make_header(cfg, out.model.arch(), "reference", out.step_count));
    return ckpt;
}

BuildPrefsOutput run_build_prefs(const RunConfig& cfg, const std::string& model_ckpt,
                                 const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto [model, header] = load_checkpoint(model_ckpt);
    check_header_matches(cfg, header);
    ToyWorld world = world_from_config(cfg);
    NoiseSchedule schedule = schedule_from_config(cfg);
    std::vector<ConditionSpec> conds = world.condition_pool(
        cfg.prefs_pool_size, derive_seed(cfg.seed, "prefs-pool"), "q", 1, cfg.n_slots);

    PrefsBuildConfig pcfg;
    pcfg.s11_steps = cfg.s11_steps;
    pcfg.thresholds = cfg.thresholds;
    pcfg.calibrate = cfg.threshold_mode == "quantile";
    pcfg.quantiles = cfg.quantiles;
    pcfg.workers = cfg.workers;

    BuildPrefsOutput out;
    out.jsonl_path = (fs::path(out_dir) / "prefs.jsonl").string();
    out.result = build_dataset(conds, world, model, schedule, guidance_from_config(cfg), pcfg,
                               derive_seed(cfg.seed, "prefs-gen"), out.jsonl_path, cfg.coeff);
    out.report_path = (fs::path(out_dir) / "prefs_report.json").string();
    std::ofstream rep(out.report_path, std::ios::binary);
    if (!rep) throw IoError("cannot open for writing: " + out.report_path);
    rep << report_to_json(out.result.report) << "\n";
    return out;
}

void split_pairs(const std::vector<PreferencePair>& pairs, double holdout_fraction,
                 std::uint64_t seed, std::vector<PreferencePair>& train,
                 std::vector<PreferencePair>& holdout) {
    if (pairs.size() < 2) throw ConfigError("need at least 2 pairs to split");
    std::vector<int> order(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);
    std::size_t n_hold = static_cast<std::size_t>(std::lround(holdout_fraction * pairs.size()));
    n_hold = std::min(std::max<std::size_t>(n_hold, 1), pairs.size() - 1);
    train.clear();
    holdout.clear();
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_hold ? holdout : train).push_back(pairs[order[i]]);
}

AlignResult align_pairs(const RunConfig& cfg, const Denoiser& reference,
                        const std::vector<PreferencePair>& pairs, std::uint64_t align_seed,
                        const std::string& sft_metrics_path,
                        const std::string& dpo_metrics_path) {
    AlignResult result{reference, reference, {}, {}, 0, 0};
    split_pairs(pairs, cfg.holdout_fraction, align_seed, result.train, result.holdout);

    TrainConfig sft_cfg;
    sft_cfg.epochs = cfg.sft_epochs;
    sft_cfg.lr = cfg.sft_lr;
    sft_cfg.weight_decay = cfg.weight_decay;
    sft_cfg.batch_size = cfg.batch_size;
    sft_cfg.grad_accum = cfg.grad_accum;
    sft_cfg.seed = derive_seed(align_seed, "sft-train");
    sft_cfg.gamma_mode = cfg.gamma_weighting;
    sft_cfg.coeff = cfg.coeff;
    sft_cfg.metrics_path = sft_metrics_path;
    TrainOutcome sft = train_sft(sft_cfg, result.train, schedule_from_config(cfg), reference);
    result.sft = sft.model;
    result.sft_steps = sft.step_count;

    TrainConfig dpo_cfg;
    dpo_cfg.epochs = cfg.dpo_epochs;
    dpo_cfg.lr = cfg.dpo_lr;
    dpo_cfg.weight_decay = cfg.weight_decay;
    dpo_cfg.batch_size = cfg.batch_size;
    dpo_cfg.grad_accum = cfg.grad_accum;
    dpo_cfg.seed = derive_seed(align_seed, "dpo-train");
    dpo_cfg.coeff = cfg.coeff;
    dpo_cfg.dpo = dpo_from_config(cfg);
    dpo_cfg.metrics_path = dpo_metrics_path;
    const Denoiser& dpo_reference = cfg.dpo_reference == "sft" ? result.sft : reference;
    TrainOutcome dpo = train_dpo(dpo_cfg, result.train, schedule_from_config(cfg), result.sft,
                                 dpo_reference);
    result.aligned = std::move(dpo.model);
    result.dpo_steps = dpo.step_count;
    return result;
}

AlignOutput run_align(const RunConfig& cfg, const std::string& ref_ckpt,
                      const std::string& prefs_path, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto [reference, header] = load_checkpoint(ref_ckpt);
    check_header_matches(cfg, header);
    std::vector<PreferencePair> pairs = read_pairs_jsonl(prefs_path);

    AlignOutput out;
    out.sft_ckpt = (fs::path(out_dir) / "sft.ckpt").string();
    out.aligned_ckpt = (fs::path(out_dir) / "aligned.ckpt").string();
    out.train_jsonl = (fs::path(out_dir) / "pairs_train.jsonl").string();
    out.holdout_jsonl = (fs::path(out_dir) / "pairs_holdout.jsonl").string();

    AlignResult result =
        align_pairs(cfg, reference, pairs, cfg.seed,
                    (fs::path(out_dir) / "sft_metrics.csv").string(),
                    (fs::path(out_dir) / "dpo_metrics.csv").string());
    write_pairs_jsonl(out.train_jsonl, result.train);
    write_pairs_jsonl(out.holdout_jsonl, result.holdout);
    save_checkpoint(out.sft_ckpt, result.sft,
                    make_header(cfg, result.sft.arch(), "sft", result.sft_steps));
    save_checkpoint(out.aligned_ckpt, result.aligned,
                    make_header(cfg, result.aligned.arch(), "dpo", result.dpo_steps));
    return out;
}

EvalReport run_eval(const RunConfig& cfg, const ToyWorld& world, const NoiseSchedule& schedule,
                    const Denoiser& policy, const Denoiser& reference,
                    const std::vector<PreferencePair>& holdout) {
    GuidanceConfig guidance = guidance_from_config(cfg);
    std::vector<ConditionSpec> conds = world.condition_pool(
        cfg.eval_conditions, derive_seed(cfg.seed, "eval-conds"), "e", 1, cfg.n_slots);
    std::uint64_t gen_seed = derive_seed(cfg.seed, "eval-gen");

    EvalReport report;
    report.n_eval = cfg.eval_conditions;
    report.mean_score1 = mean_alignment_score(world, 1, schedule, policy, guidance, conds,
                                              gen_seed, cfg.coeff, cfg.workers);
    report.mean_score2 = mean_alignment_score(world, 2, schedule, policy, guidance, conds,
                                              gen_seed, cfg.coeff, cfg.workers);
    report.temporal_order_accuracy = temporal_order_accuracy(world, schedule, policy, guidance,
                                                             conds, gen_seed, cfg.coeff,
                                                             cfg.workers);

    int n = static_cast<int>(conds.size());
    std::vector<Sample> generated(n), truth(n);
    std::uint64_t gt_seed = derive_seed(cfg.seed, "eval-gt");
    parallel_for(n, cfg.workers, [&](int i) {
        Rng rng(derive_seed(gen_seed, conds[i].id));
        generated[i] = sample(schedule, policy, &conds[i], guidance, rng, cfg.coeff);
        truth[i] = world.synthesize_ground_truth(conds[i], cfg.noise_scale,
                                                 derive_seed(gt_seed, static_cast<std::uint64_t>(i)));
    });
    report.frechet_gaussian = frechet_gaussian_distance(generated, truth);

    if (!holdout.empty()) {
        PreferenceAccuracy acc =
            preference_accuracy(schedule, policy, reference, holdout, cfg.margin_draws,
                                dpo_from_config(cfg), derive_seed(cfg.seed, "eval-margin"),
                                cfg.workers);
        report.pref_accuracy = acc.value;
        report.pref_zero_fraction = acc.zero_fraction;
    }
    return report;
}

}  // namespace prefdiff
