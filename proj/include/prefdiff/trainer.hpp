#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prefdiff/denoiser.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/dpo.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/schedule.hpp"

namespace prefdiff {

// Adam with decoupled weight decay.
struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

void adamw_step(std::vector<double>& params, AdamState& state, const std::vector<double>& grad,
                double lr, const AdamParams& opt);

struct TrainConfig {
    int epochs = 1;
    double lr = 1e-3;
    double weight_decay = 0.0;
    int batch_size = 8;
    int grad_accum = 4;
    std::uint64_t seed = 1;
    double cond_dropout = 0.1;  // reference phase only
    double augment_prob = 0.3;  // reference phase only
    WeightMode gamma_mode = WeightMode::kConstant;
    ForwardCoeff coeff = ForwardCoeff::kSqrt;
    DpoConfig dpo;
    std::string metrics_path;  // optional CSV: step,phase,loss,lr,margin
};

struct TrainOutcome {
    Denoiser model;
    std::int64_t step_count = 0;
    double first_loss = 0.0;  // mean loss of the first optimizer step
    double final_loss = 0.0;  // mean loss of the last optimizer step
};

using LabeledSample = std::pair<ConditionSpec, Sample>;

// Noise-prediction pretraining with mixing augmentation and condition
// dropout. Linear lr decay to zero over the total optimizer steps.
TrainOutcome train_reference(const TrainConfig& cfg, const DenoiserArch& arch,
                             const std::vector<LabeledSample>& data,
                             const NoiseSchedule& schedule);

// Noise-prediction fine-tuning on (condition, winner) only.
TrainOutcome train_sft(const TrainConfig& cfg, const std::vector<PreferencePair>& pairs,
                       const NoiseSchedule& schedule, const Denoiser& init);

// Preference fine-tuning against a frozen reference.
TrainOutcome train_dpo(const TrainConfig& cfg, const std::vector<PreferencePair>& pairs,
                       const NoiseSchedule& schedule, const Denoiser& policy_init,
                       const Denoiser& reference);

}  // namespace prefdiff
