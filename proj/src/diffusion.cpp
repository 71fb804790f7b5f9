#include "prefdiff/diffusion.hpp"

#include <cmath>

#include "prefdiff/errors.hpp"
#include "prefdiff/vecops.hpp"

namespace prefdiff {

ForwardCoeff forward_coeff_from_string(const std::string& name) {
    if (name == "sqrt") return ForwardCoeff::kSqrt;
    if (name == "as_printed") return ForwardCoeff::kAsPrinted;
    throw ConfigError("unknown forward_coeff: " + name);
}

std::string to_string(ForwardCoeff coeff) {
    return coeff == ForwardCoeff::kSqrt ? "sqrt" : "as_printed";
}

double noise_coeff(const NoiseSchedule& schedule, int n, ForwardCoeff coeff) {
    double one_minus = 1.0 - schedule.alpha_bar(n);
    return coeff == ForwardCoeff::kSqrt ? std::sqrt(one_minus) : one_minus;
}

static void check_dim(const Sample& x, const Sample& eps) {
    if (x.size() != eps.size()) throw ShapeError("sample/noise dimension mismatch");
}

Sample forward_sample(const NoiseSchedule& schedule, const Sample& x0, int n, const Sample& eps,
                      ForwardCoeff coeff) {
    check_dim(x0, eps);
    double a = std::sqrt(schedule.alpha_bar(n));
    double b = noise_coeff(schedule, n, coeff);
    Sample out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + b * eps[i];
    return out;
}

Sample invert_forward(const NoiseSchedule& schedule, const Sample& x_n, int n, const Sample& eps,
                      ForwardCoeff coeff) {
    check_dim(x_n, eps);
    double a = std::sqrt(schedule.alpha_bar(n));
    double b = noise_coeff(schedule, n, coeff);
    Sample out(x_n.size());
    for (std::size_t i = 0; i < x_n.size(); ++i) out[i] = (x_n[i] - b * eps[i]) / a;
    return out;
}

LossResult ldm_loss(const NoiseSchedule& schedule, const Denoiser& model, const Sample& x0,
                    const ConditionSpec* cond, int n, const Sample& eps, WeightMode gamma_mode,
                    ForwardCoeff coeff) {
    Sample x_n = forward_sample(schedule, x0, n, eps, coeff);
    Sample eps_hat = model.forward(x_n, n, cond);
    double gamma = snr_weight(schedule, n, gamma_mode);
    LossResult res;
    res.loss = gamma * vec::squared_distance(eps_hat, eps);
    Sample upstream(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) upstream[i] = 2.0 * gamma * (eps_hat[i] - eps[i]);
    res.grad = model.backward(x_n, n, cond, upstream);
    return res;
}

Sample guided_noise(const Denoiser& model, const Sample& x_n, int n, const ConditionSpec* cond,
                    double w) {
    if (cond == nullptr || w == 0.0) return model.forward(x_n, n, nullptr);
    if (w == 1.0) return model.forward(x_n, n, cond);
    Sample eps_c = model.forward(x_n, n, cond);
    Sample eps_u = model.forward(x_n, n, nullptr);
    Sample out(eps_c.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps_u[i] + w * (eps_c[i] - eps_u[i]);
    return out;
}

Sample reverse_step_mean(const NoiseSchedule& schedule, const Sample& x_n, int n,
                         const Sample& eps_hat) {
    check_dim(x_n, eps_hat);
    double alpha = schedule.alpha(n);
    double c = (1.0 - alpha) / std::sqrt(1.0 - schedule.alpha_bar(n));
    double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    Sample out(x_n.size());
    for (std::size_t i = 0; i < x_n.size(); ++i) out[i] = inv_sqrt_alpha * (x_n[i] - c * eps_hat[i]);
    return out;
}

Sample reverse_step(const NoiseSchedule& schedule, const Denoiser& model, const Sample& x_n, int n,
                    const ConditionSpec* cond, const GuidanceConfig& guidance, Rng& rng) {
    Sample eps_hat = guided_noise(model, x_n, n, cond, guidance.scale);
    Sample out = reverse_step_mean(schedule, x_n, n, eps_hat);
    double var = schedule.posterior_var(n);
    if (var > 0.0) {
        double sd = std::sqrt(var);
        for (double& v : out) v += sd * rng.next_normal();
    }
    return out;
}

Sample sample(const NoiseSchedule& schedule, const Denoiser& model, const ConditionSpec* cond,
              const GuidanceConfig& guidance, Rng& rng, ForwardCoeff coeff) {
    int n_steps = schedule.n_steps;
    int s = guidance.n_inference_steps;
    if (s < 1 || s > n_steps)
        throw ConfigError("n_inference_steps must be in 1..n_steps");
    if (!(guidance.scale >= 0.0) || !std::isfinite(guidance.scale))
        throw ConfigError("guidance scale must be finite and >= 0");

    std::vector<int> grid(s + 1);
    for (int k = 0; k <= s; ++k)
        grid[k] = static_cast<int>(std::lround(static_cast<double>(n_steps) * k / s));

    Sample x = rng.normal_vector(model.arch().sample_dim);
    for (int k = s; k >= 1; --k) {
        int n_hi = grid[k];
        int n_lo = grid[k - 1];
        if (n_hi - n_lo == 1) {
            x = reverse_step(schedule, model, x, n_hi, cond, guidance, rng);
            continue;
        }
        Sample eps_hat = guided_noise(model, x, n_hi, cond, guidance.scale);
        Sample x0_hat = invert_forward(schedule, x, n_hi, eps_hat, coeff);
        double abar_hi = schedule.alpha_bar(n_hi);
        double abar_lo = n_lo == 0 ? 1.0 : schedule.alpha_bar(n_lo);
        double alpha_gap = abar_hi / abar_lo;
        double beta_gap = 1.0 - alpha_gap;
        double coef_x0 = std::sqrt(abar_lo) * beta_gap / (1.0 - abar_hi);
        double coef_xn = std::sqrt(alpha_gap) * (1.0 - abar_lo) / (1.0 - abar_hi);
        double var = (1.0 - abar_lo) / (1.0 - abar_hi) * beta_gap;
        Sample next(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) next[i] = coef_x0 * x0_hat[i] + coef_xn * x[i];
        if (var > 0.0) {
            double sd = std::sqrt(var);
            for (double& v : next) v += sd * rng.next_normal();
        }
        x = std::move(next);
    }
    return x;
}

}  // namespace prefdiff
