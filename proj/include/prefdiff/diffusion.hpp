#pragma once

#include <string>
#include <vector>

#include "prefdiff/denoiser.hpp"
#include "prefdiff/rng.hpp"
#include "prefdiff/schedule.hpp"
#include "prefdiff/toyworld.hpp"

namespace prefdiff {

// Coefficient on eps in the forward noising map: sqrt(1 - abar_n) (variance
// consistent) or (1 - abar_n) verbatim. The flag travels with checkpoints.
enum class ForwardCoeff { kSqrt, kAsPrinted };

ForwardCoeff forward_coeff_from_string(const std::string& name);
std::string to_string(ForwardCoeff coeff);

double noise_coeff(const NoiseSchedule& schedule, int n, ForwardCoeff coeff);

// x_n = sqrt(abar_n) x0 + noise_coeff(n) eps.
Sample forward_sample(const NoiseSchedule& schedule, const Sample& x0, int n, const Sample& eps,
                      ForwardCoeff coeff = ForwardCoeff::kSqrt);

// Exact single-step inversion: recovers x0 from (x_n, eps).
Sample invert_forward(const NoiseSchedule& schedule, const Sample& x_n, int n, const Sample& eps,
                      ForwardCoeff coeff = ForwardCoeff::kSqrt);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;
};

// gamma_n * |eps - model(x_n, n, cond)|^2 with gradient via backward and
// upstream 2 gamma_n (eps_hat - eps). cond == nullptr trains the null token.
LossResult ldm_loss(const NoiseSchedule& schedule, const Denoiser& model, const Sample& x0,
                    const ConditionSpec* cond, int n, const Sample& eps,
                    WeightMode gamma_mode = WeightMode::kConstant,
                    ForwardCoeff coeff = ForwardCoeff::kSqrt);

struct GuidanceConfig {
    double scale = 3.0;
    int n_inference_steps = 50;
};

// eps_uncond + w (eps_cond - eps_uncond). w == 1 returns the conditional
// prediction itself and w == 0 (or absent cond) the unconditional one, so
// those cases are bitwise exact.
Sample guided_noise(const Denoiser& model, const Sample& x_n, int n, const ConditionSpec* cond,
                    double w);

// Posterior mean given the noise estimate:
// (x_n - (1 - alpha_n)/sqrt(1 - abar_n) eps_hat) / sqrt(alpha_n).
Sample reverse_step_mean(const NoiseSchedule& schedule, const Sample& x_n, int n,
                         const Sample& eps_hat);

// One ancestral step x_n -> x_{n-1}: mean plus sqrt(posterior_var_n) z.
// The n == 1 step is deterministic and draws nothing from rng.
Sample reverse_step(const NoiseSchedule& schedule, const Denoiser& model, const Sample& x_n, int n,
                    const ConditionSpec* cond, const GuidanceConfig& guidance, Rng& rng);

// Full ancestral sampler from x_N ~ N(0, I). With n_inference_steps < N the
// trajectory visits an evenly spaced subset of steps; multi-step gaps jump
// through the predicted x0 with the matching coarsened posterior.
Sample sample(const NoiseSchedule& schedule, const Denoiser& model, const ConditionSpec* cond,
              const GuidanceConfig& guidance, Rng& rng,
              ForwardCoeff coeff = ForwardCoeff::kSqrt);

}  // namespace prefdiff
