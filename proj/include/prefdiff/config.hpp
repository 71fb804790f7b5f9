#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefdiff/diffusion.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/schedule.hpp"
#include "prefdiff/toyworld.hpp"

namespace prefdiff {

// Flat key=value run configuration. Every knob has a default; unknown keys
// are rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    int workers = 1;

    // world
    int vocab_size = 8;
    int sample_dim = 32;
    int embed_dim = 16;
    int n_slots = 4;
    double scorer_noise = 0.15;
    double noise_scale = 0.05;

    // schedule
    int n_steps = 50;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    ForwardCoeff coeff = ForwardCoeff::kSqrt;

    // denoiser
    std::vector<int> hidden = {64, 64};
    int time_embed_dim = 16;
    std::string nonlinearity = "tanh";

    // guidance
    double guidance_scale = 3.0;
    int n_inference_steps = 50;

    // pretraining
    int pretrain_size = 2000;
    int pretrain_epochs = 30;
    double pretrain_lr = 1e-3;
    int batch_size = 8;
    int grad_accum = 4;
    double weight_decay = 0.0;
    double augment_prob = 0.3;
    double cond_dropout = 0.1;
    WeightMode gamma_weighting = WeightMode::kConstant;

    // preference dataset
    int prefs_pool_size = 2000;
    std::vector<int> s11_steps = {5, 10, 25, 50};
    std::string threshold_mode = "quantile";  // or "fixed"
    FilterThresholds thresholds;
    // Looser floors than QuantileSpec's own defaults: single-shot winners
    // from the perturbation strategies sit below the pooled argmax winners,
    // and the run-level calibration must not squeeze them out.
    QuantileSpec quantiles{0.10, 0.05, 0.10, 0.95};

    // alignment
    int sft_epochs = 1;
    double sft_lr = 5e-4;
    int dpo_epochs = 4;
    double dpo_lr = 5e-4;
    double dpo_beta = 2000.0;
    WeightMode dpo_weighting = WeightMode::kConstant;
    std::string dpo_reference = "pretrained";  // or "sft"
    double holdout_fraction = 0.2;
    int margin_draws = 24;

    // evaluation
    int eval_conditions = 200;

    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// All keys in canonical order; parses back to the same config.
std::string config_to_text(const RunConfig& cfg);

}  // namespace prefdiff
