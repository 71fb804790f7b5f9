#include "prefdiff/dpo.hpp"

#include <cmath>
#include <stdexcept>

#include "prefdiff/errors.hpp"
#include "prefdiff/vecops.hpp"

namespace prefdiff {

static double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double log_sigmoid(double t) { return -softplus(-t); }

double bt_probability(double r_w, double r_l) { return std::exp(log_sigmoid(r_w - r_l)); }

double reward_nll(const std::vector<std::pair<double, double>>& reward_pairs) {
    if (reward_pairs.empty()) throw std::invalid_argument("reward_nll of an empty list");
    double total = 0.0;
    for (const auto& [r_w, r_l] : reward_pairs) total += -log_sigmoid(r_w - r_l);
    return total / reward_pairs.size();
}

// The sigmoid's inner term for one (pair, n, eps_w, eps_l) draw, plus the
// policy prediction errors needed for the gradient.
struct InnerParts {
    double inner = 0.0;
    double scale = 0.0;  // beta * N * w(snr_n)
    Sample x_nw, x_nl;
    Sample diff_w, diff_l;  // policy prediction minus eps
};

static InnerParts inner_term(const NoiseSchedule& schedule, const Denoiser& policy,
                             const Denoiser& reference, const PreferencePair& pair, int n,
                             const Sample& eps_w, const Sample& eps_l, const DpoConfig& config) {
    if (!(config.beta > 0.0) || !std::isfinite(config.beta))
        throw ConfigError("dpo beta must be finite and positive");
    if (!vec::all_finite(pair.winner) || !vec::all_finite(pair.loser) ||
        !vec::all_finite(eps_w) || !vec::all_finite(eps_l))
        throw NumericalError("non-finite sample or noise in preference loss");
    InnerParts parts;
    parts.x_nw = forward_sample(schedule, pair.winner, n, eps_w, config.coeff);
    parts.x_nl = forward_sample(schedule, pair.loser, n, eps_l, config.coeff);
    const ConditionSpec* cond = &pair.condition;

    Sample pol_w = policy.forward(parts.x_nw, n, cond);
    Sample ref_w = reference.forward(parts.x_nw, n, cond);
    Sample pol_l = policy.forward(parts.x_nl, n, cond);
    Sample ref_l = reference.forward(parts.x_nl, n, cond);

    double err_pol_w = vec::squared_distance(pol_w, eps_w);
    double err_ref_w = vec::squared_distance(ref_w, eps_w);
    double err_pol_l = vec::squared_distance(pol_l, eps_l);
    double err_ref_l = vec::squared_distance(ref_l, eps_l);

    parts.scale = config.beta * schedule.n_steps * snr_weight(schedule, n, config.weighting);
    parts.inner = -parts.scale * ((err_pol_w - err_ref_w) - (err_pol_l - err_ref_l));

    parts.diff_w.resize(eps_w.size());
    parts.diff_l.resize(eps_l.size());
    for (std::size_t i = 0; i < eps_w.size(); ++i) {
        parts.diff_w[i] = pol_w[i] - eps_w[i];
        parts.diff_l[i] = pol_l[i] - eps_l[i];
    }
    return parts;
}

DpoBatchResult dpo_diffusion_loss(const NoiseSchedule& schedule, const Denoiser& policy,
                                  const Denoiser& reference, const PreferencePair& pair, int n,
                                  const Sample& eps_w, const Sample& eps_l,
                                  const DpoConfig& config) {
    InnerParts parts = inner_term(schedule, policy, reference, pair, n, eps_w, eps_l, config);

    DpoBatchResult res;
    res.loss = softplus(-parts.inner);
    res.margin = parts.inner;
    res.per_pair_inner = {parts.inner};
    if (!std::isfinite(res.loss))
        throw NumericalError("non-finite preference loss (inner = " +
                             std::to_string(parts.inner) + ", step " + std::to_string(n) + ")");

    // dloss/dinner = -sigmoid(-inner); dinner/derr_pol_w = -scale;
    // derr/dprediction = 2 (prediction - eps). Fold everything into the
    // upstream vectors so backward runs once per branch.
    double sig_neg = std::exp(log_sigmoid(-parts.inner));
    double coef = 2.0 * sig_neg * parts.scale;
    Sample up_w(parts.diff_w.size()), up_l(parts.diff_l.size());
    for (std::size_t i = 0; i < up_w.size(); ++i) {
        up_w[i] = coef * parts.diff_w[i];
        up_l[i] = -coef * parts.diff_l[i];
    }
    const ConditionSpec* cond = &pair.condition;
    res.grad = policy.backward(parts.x_nw, n, cond, up_w);
    std::vector<double> grad_l = policy.backward(parts.x_nl, n, cond, up_l);
    for (std::size_t i = 0; i < res.grad.size(); ++i) res.grad[i] += grad_l[i];
    return res;
}

double implicit_reward_margin(const NoiseSchedule& schedule, const Denoiser& policy,
                              const Denoiser& reference, const PreferencePair& pair,
                              int n_samples, const DpoConfig& config, Rng& rng) {
    if (n_samples <= 0) throw std::invalid_argument("implicit_reward_margin needs n_samples >= 1");
    int dim = static_cast<int>(pair.winner.size());
    double total = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        int n = 1 + rng.next_int(schedule.n_steps);
        Sample eps = rng.normal_vector(dim);
        InnerParts parts = inner_term(schedule, policy, reference, pair, n, eps, eps, config);
        total += parts.inner;
    }
    return total / n_samples;
}

}  // namespace prefdiff
