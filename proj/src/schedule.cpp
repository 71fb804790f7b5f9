#include "prefdiff/schedule.hpp"

#include <stdexcept>
#include <string>

#include "prefdiff/errors.hpp"

namespace prefdiff {

WeightMode weight_mode_from_string(std::string_view s) {
    if (s == "constant") return WeightMode::kConstant;
    if (s == "snr") return WeightMode::kSnr;
    throw ConfigError("unknown weight mode: " + std::string(s));
}

const char* to_string(WeightMode m) {
    return m == WeightMode::kConstant ? "constant" : "snr";
}

int NoiseSchedule::check(int n) const {
    if (n < 1 || n > n_steps)
        throw std::out_of_range("schedule step " + std::to_string(n) + " outside 1.." +
                                std::to_string(n_steps));
    return n - 1;
}

double NoiseSchedule::alpha_bar0(int n) const {
    if (n == 0) return 1.0;
    return alpha_bars[check(n)];
}

NoiseSchedule build_linear_schedule(int n_steps, double beta_start, double beta_end) {
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(beta_start > 0.0) || !(beta_end < 1.0))
        throw ConfigError("betas must lie in (0, 1)");
    if (n_steps == 1) {
        if (beta_start > beta_end) throw ConfigError("beta_start must not exceed beta_end");
    } else if (!(beta_start < beta_end)) {
        throw ConfigError("beta_start must be strictly below beta_end");
    }

    NoiseSchedule s;
    s.n_steps = n_steps;
    s.betas.resize(n_steps);
    if (n_steps == 1) {
        s.betas[0] = beta_start;
    } else {
        double step = (beta_end - beta_start) / static_cast<double>(n_steps - 1);
        for (int i = 0; i < n_steps; ++i) s.betas[i] = beta_start + step * i;
        s.betas[n_steps - 1] = beta_end;  // endpoint exact
    }

    s.alphas.resize(n_steps);
    s.alpha_bars.resize(n_steps);
    s.posterior_vars.resize(n_steps);
    s.snrs.resize(n_steps);
    double abar = 1.0;
    for (int i = 0; i < n_steps; ++i) {
        s.alphas[i] = 1.0 - s.betas[i];
        double abar_prev = abar;
        abar *= s.alphas[i];
        s.alpha_bars[i] = abar;
        s.posterior_vars[i] = (1.0 - abar_prev) / (1.0 - abar) * s.betas[i];
        s.snrs[i] = abar / (1.0 - abar);
    }
    return s;
}

double snr_weight(const NoiseSchedule& schedule, int n, WeightMode mode) {
    switch (mode) {
        case WeightMode::kConstant:
            schedule.snr(n);  // still range-check n
            return 1.0;
        case WeightMode::kSnr:
            return schedule.snr(n);
    }
    throw ConfigError("unhandled weight mode");
}

}  // namespace prefdiff
