#pragma once

#include <utility>
#include <vector>

#include "prefdiff/denoiser.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/rng.hpp"
#include "prefdiff/schedule.hpp"

namespace prefdiff {

// log(1 / (1 + exp(-t))), stable for large |t|.
double log_sigmoid(double t);

// P(winner beats loser) = sigmoid(r_w - r_l).
double bt_probability(double r_w, double r_l);

// Mean of -log sigmoid(r_w - r_l).
double reward_nll(const std::vector<std::pair<double, double>>& reward_pairs);

struct DpoConfig {
    double beta = 2000.0;
    WeightMode weighting = WeightMode::kConstant;
    ForwardCoeff coeff = ForwardCoeff::kSqrt;
};

struct DpoBatchResult {
    double loss = 0.0;
    std::vector<double> grad;
    double margin = 0.0;  // the inner argument of the sigmoid
    std::vector<double> per_pair_inner;
};

// inner = -beta N w(snr_n) [(|eps_w - policy(x_n^w)|^2 - |eps_w - ref(x_n^w)|^2)
//                          - (|eps_l - policy(x_n^l)|^2 - |eps_l - ref(x_n^l)|^2)]
// loss = -log sigmoid(inner). Gradient flows through the policy terms only.
DpoBatchResult dpo_diffusion_loss(const NoiseSchedule& schedule, const Denoiser& policy,
                                  const Denoiser& reference, const PreferencePair& pair, int n,
                                  const Sample& eps_w, const Sample& eps_l,
                                  const DpoConfig& config);

// Monte-Carlo estimate of E over (n, eps) of the inner term. One shared eps
// per draw for winner and loser, which keeps the estimate unbiased and makes
// the winner/loser swap flip the sign exactly.
double implicit_reward_margin(const NoiseSchedule& schedule, const Denoiser& policy,
                              const Denoiser& reference, const PreferencePair& pair,
                              int n_samples, const DpoConfig& config, Rng& rng);

}  // namespace prefdiff
