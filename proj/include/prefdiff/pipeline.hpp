#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefdiff/checkpoint.hpp"
#include "prefdiff/config.hpp"
#include "prefdiff/denoiser.hpp"
#include "prefdiff/evalsuite.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/toyworld.hpp"
#include "prefdiff/trainer.hpp"

namespace prefdiff {

// All pipeline randomness flows from cfg.seed through named sub-streams, so
// each stage is re-runnable on its own.
ToyWorld world_from_config(const RunConfig& cfg);
NoiseSchedule schedule_from_config(const RunConfig& cfg);
DenoiserArch arch_from_config(const RunConfig& cfg);
GuidanceConfig guidance_from_config(const RunConfig& cfg);
DpoConfig dpo_from_config(const RunConfig& cfg);

std::vector<LabeledSample> make_pretrain_data(const RunConfig& cfg, const ToyWorld& world);

// Rejects checkpoints whose architecture or schedule disagrees with cfg.
void check_header_matches(const RunConfig& cfg, const CheckpointHeader& header);

// Trains the reference model and writes <out_dir>/reference.ckpt plus a
// metrics CSV. Returns the checkpoint path.
std::string run_pretrain(const RunConfig& cfg, const std::string& out_dir);

struct BuildPrefsOutput {
    std::string jsonl_path;
    std::string report_path;
    BuildResult result;
};

BuildPrefsOutput run_build_prefs(const RunConfig& cfg, const std::string& model_ckpt,
                                 const std::string& out_dir);

// Deterministic holdout split; the holdout takes round(fraction * n) pairs.
void split_pairs(const std::vector<PreferencePair>& pairs, double holdout_fraction,
                 std::uint64_t seed, std::vector<PreferencePair>& train,
                 std::vector<PreferencePair>& holdout);

struct AlignResult {
    Denoiser sft;
    Denoiser aligned;
    std::vector<PreferencePair> train;
    std::vector<PreferencePair> holdout;
    std::int64_t sft_steps = 0;
    std::int64_t dpo_steps = 0;
};

// SFT on winners then DPO against the configured reference (the pretrained
// model by default, the SFT output with dpo_reference=sft).
AlignResult align_pairs(const RunConfig& cfg, const Denoiser& reference,
                        const std::vector<PreferencePair>& pairs, std::uint64_t align_seed,
                        const std::string& sft_metrics_path = "",
                        const std::string& dpo_metrics_path = "");

struct AlignOutput {
    std::string sft_ckpt;
    std::string aligned_ckpt;
    std::string train_jsonl;
    std::string holdout_jsonl;
};

AlignOutput run_align(const RunConfig& cfg, const std::string& ref_ckpt,
                      const std::string& prefs_path, const std::string& out_dir);

// Metric suite for one policy: alignment scores, temporal accuracy, Frechet
// distance against ground-truth synthesis, and held-out preference accuracy
// of the policy relative to `reference`.
EvalReport run_eval(const RunConfig& cfg, const ToyWorld& world, const NoiseSchedule& schedule,
                    const Denoiser& policy, const Denoiser& reference,
                    const std::vector<PreferencePair>& holdout);

}  // namespace prefdiff
