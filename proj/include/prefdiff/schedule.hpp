#pragma once

#include <string_view>
#include <vector>

namespace prefdiff {

// Per-step weighting for the denoising losses. "constant" keeps the
// loss-at-reference identity simple; "snr" weighs by the step's
// signal-to-noise ratio.
enum class WeightMode { kConstant, kSnr };

WeightMode weight_mode_from_string(std::string_view s);
const char* to_string(WeightMode m);

// Diffusion noise schedule plus every derived per-step table. Index
// convention follows the process definition: step n runs 1..n_steps, so
// accessors take 1-based n. Immutable after construction.
struct NoiseSchedule {
    int n_steps = 0;
    std::vector<double> betas;           // beta_n, strictly increasing in (0,1)
    std::vector<double> alphas;          // 1 - beta_n
    std::vector<double> alpha_bars;      // running product of alphas
    std::vector<double> posterior_vars;  // (1 - abar_{n-1}) / (1 - abar_n) * beta_n, abar_0 = 1
    std::vector<double> snrs;            // abar_n / (1 - abar_n)

    double beta(int n) const { return betas[check(n)]; }
    double alpha(int n) const { return alphas[check(n)]; }
    double alpha_bar(int n) const { return alpha_bars[check(n)]; }
    // alpha_bar extended with abar_0 = 1 (makes the final denoising step
    // deterministic).
    double alpha_bar0(int n) const;
    double posterior_var(int n) const { return posterior_vars[check(n)]; }
    double snr(int n) const { return snrs[check(n)]; }

  private:
    int check(int n) const;
};

// Linearly spaced betas, endpoints inclusive. n_steps == 1 degenerates to the
// single value beta_start.
NoiseSchedule build_linear_schedule(int n_steps, double beta_start, double beta_end);

// omega(lambda_n): 1.0 under constant weighting, lambda_n under "snr".
double snr_weight(const NoiseSchedule& schedule, int n, WeightMode mode = WeightMode::kConstant);

}  // namespace prefdiff
