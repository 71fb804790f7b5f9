#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefdiff/denoiser.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/dpo.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/toyworld.hpp"

namespace prefdiff {

struct GaussianStats {
    std::vector<double> mean;  // D
    std::vector<double> cov;   // D x D row-major, or D diagonal entries
    bool diagonal = false;
    int n = 0;
};

// Sample mean and unbiased covariance. diagonal_only keeps the per-dimension
// variances instead of the full matrix.
GaussianStats fit_gaussian(const std::vector<Sample>& samples, bool diagonal_only = false);

// |mu_a - mu_b|^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}), clamped at 0.
double frechet_from_stats(const GaussianStats& a, const GaussianStats& b);

// Fits Gaussians to both sets. Sets smaller than D+1, and matrix square
// roots that fail to resolve, fall back to diagonal covariance with a
// warning on stderr.
double frechet_gaussian_distance(const std::vector<Sample>& set_a,
                                 const std::vector<Sample>& set_b);

struct PreferenceAccuracy {
    double value = 0.0;          // fraction of pairs with margin > 0
    double zero_fraction = 0.0;  // fraction with margin exactly 0
    int n = 0;
};

// Monte-Carlo implicit-reward margins on held-out pairs. Each pair's rng
// stream derives from its id, so the result is independent of pair order.
PreferenceAccuracy preference_accuracy(const NoiseSchedule& schedule, const Denoiser& policy,
                                       const Denoiser& reference,
                                       const std::vector<PreferencePair>& held_out,
                                       int margin_draws, const DpoConfig& config,
                                       std::uint64_t seed, int workers = 1);

// Fraction of provided samples whose decoded event sequence equals the
// condition's. Conditions and samples are matched by index.
double temporal_order_accuracy_on_samples(const ToyWorld& world,
                                          const std::vector<ConditionSpec>& conditions,
                                          const std::vector<Sample>& samples);

// Generates one sample per condition (conditions with fewer than 2 events
// are skipped) and checks the decoded event order.
double temporal_order_accuracy(const ToyWorld& world, const NoiseSchedule& schedule,
                               const Denoiser& model, const GuidanceConfig& guidance,
                               const std::vector<ConditionSpec>& conditions, std::uint64_t seed,
                               ForwardCoeff coeff = ForwardCoeff::kSqrt, int workers = 1);

// Mean scorer score over one generation per condition.
double mean_alignment_score(const ToyWorld& world, int scorer_id, const NoiseSchedule& schedule,
                            const Denoiser& model, const GuidanceConfig& guidance,
                            const std::vector<ConditionSpec>& conditions, std::uint64_t seed,
                            ForwardCoeff coeff = ForwardCoeff::kSqrt, int workers = 1);

struct EvalReport {
    double mean_score1 = 0.0;
    double mean_score2 = 0.0;
    double frechet_gaussian = 0.0;
    double pref_accuracy = 0.0;
    double pref_zero_fraction = 0.0;
    double temporal_order_accuracy = 0.0;
    int n_eval = 0;
};

std::string eval_report_to_json(const EvalReport& report);

}  // namespace prefdiff
