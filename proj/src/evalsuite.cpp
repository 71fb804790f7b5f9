#include "prefdiff/evalsuite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

#include "prefdiff/errors.hpp"
#include "prefdiff/parallel.hpp"
#include "prefdiff/vecops.hpp"

namespace prefdiff {

GaussianStats fit_gaussian(const std::vector<Sample>& samples, bool diagonal_only) {
    if (samples.size() < 2) throw std::invalid_argument("need at least 2 samples to fit");
    int n = static_cast<int>(samples.size());
    int dim = static_cast<int>(samples[0].size());
    GaussianStats st;
    st.n = n;
    st.diagonal = diagonal_only;
    st.mean.assign(dim, 0.0);
    for (const auto& s : samples) {
        if (static_cast<int>(s.size()) != dim) throw ShapeError("ragged sample set");
        for (int i = 0; i < dim; ++i) st.mean[i] += s[i];
    }
    for (double& v : st.mean) v /= n;
    if (diagonal_only) {
        st.cov.assign(dim, 0.0);
        for (const auto& s : samples)
            for (int i = 0; i < dim; ++i) {
                double d = s[i] - st.mean[i];
                st.cov[i] += d * d;
            }
        for (double& v : st.cov) v /= n - 1;
    } else {
        st.cov.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        for (const auto& s : samples)
            for (int i = 0; i < dim; ++i) {
                double di = s[i] - st.mean[i];
                for (int j = 0; j < dim; ++j)
                    st.cov[static_cast<std::size_t>(i) * dim + j] += di * (s[j] - st.mean[j]);
            }
        for (double& v : st.cov) v /= n - 1;
    }
    return st;
}

static double frechet_diagonal(const GaussianStats& a, const GaussianStats& b) {
    int dim = static_cast<int>(a.mean.size());
    double dist = 0.0;
    for (int i = 0; i < dim; ++i) {
        double dm = a.mean[i] - b.mean[i];
        double va = a.diagonal ? a.cov[i] : a.cov[static_cast<std::size_t>(i) * dim + i];
        double vb = b.diagonal ? b.cov[i] : b.cov[static_cast<std::size_t>(i) * dim + i];
        double ds = std::sqrt(std::max(va, 0.0)) - std::sqrt(std::max(vb, 0.0));
        dist += dm * dm + ds * ds;
    }
    return std::max(dist, 0.0);
}

double frechet_from_stats(const GaussianStats& a, const GaussianStats& b) {
    if (a.mean.size() != b.mean.size()) throw ShapeError("mean dimension mismatch");
    if (a.diagonal || b.diagonal) return frechet_diagonal(a, b);

    int dim = static_cast<int>(a.mean.size());
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> sa(a.cov.data(), dim, dim);
    Eigen::Map<const Mat> sb(b.cov.data(), dim, dim);

    Eigen::SelfAdjointEigenSolver<Mat> es_a(sa);
    if (es_a.info() != Eigen::Success) {
        std::fprintf(stderr, "warning: covariance eigendecomposition failed, "
                             "using diagonal covariances\n");
        return frechet_diagonal(a, b);
    }
    Mat sqrt_a = es_a.eigenvectors() *
                 es_a.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                 es_a.eigenvectors().transpose();
    Mat m = sqrt_a * sb * sqrt_a;
    Eigen::SelfAdjointEigenSolver<Mat> es_m(0.5 * (m + m.transpose()));
    if (es_m.info() != Eigen::Success) {
        std::fprintf(stderr, "warning: cross-covariance square root failed, "
                             "using diagonal covariances\n");
        return frechet_diagonal(a, b);
    }
    double tr_sqrt = es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    double dist = sa.trace() + sb.trace() - 2.0 * tr_sqrt;
    for (int i = 0; i < dim; ++i) {
        double dm = a.mean[i] - b.mean[i];
        dist += dm * dm;
    }
    if (dist < -1e-8)
        throw NumericalError("negative squared distance: " + std::to_string(dist));
    return std::max(dist, 0.0);
}

double frechet_gaussian_distance(const std::vector<Sample>& set_a,
                                 const std::vector<Sample>& set_b) {
    if (set_a.empty() || set_b.empty()) throw std::invalid_argument("empty sample set");
    int dim = static_cast<int>(set_a[0].size());
    bool diagonal = static_cast<int>(set_a.size()) < dim + 1 ||
                    static_cast<int>(set_b.size()) < dim + 1;
    if (diagonal)
        std::fprintf(stderr, "warning: sample sets too small for a full covariance, "
                             "using diagonal covariances\n");
    GaussianStats a = fit_gaussian(set_a, diagonal);
    GaussianStats b = fit_gaussian(set_b, diagonal);
    return frechet_from_stats(a, b);
}

PreferenceAccuracy preference_accuracy(const NoiseSchedule& schedule, const Denoiser& policy,
                                       const Denoiser& reference,
                                       const std::vector<PreferencePair>& held_out,
                                       int margin_draws, const DpoConfig& config,
                                       std::uint64_t seed, int workers) {
    if (held_out.empty()) throw std::invalid_argument("empty held-out set");
    int n = static_cast<int>(held_out.size());
    std::vector<double> margins(n);
    parallel_for(n, workers, [&](int i) {
        Rng rng(derive_seed(seed, held_out[i].id));
        margins[i] = implicit_reward_margin(schedule, policy, reference, held_out[i],
                                            margin_draws, config, rng);
    });
    PreferenceAccuracy acc;
    acc.n = n;
    int positive = 0, zero = 0;
    for (double m : margins) {
        if (m > 0.0) ++positive;
        if (m == 0.0) ++zero;
    }
    acc.value = static_cast<double>(positive) / n;
    acc.zero_fraction = static_cast<double>(zero) / n;
    return acc;
}

double temporal_order_accuracy_on_samples(const ToyWorld& world,
                                          const std::vector<ConditionSpec>& conditions,
                                          const std::vector<Sample>& samples) {
    if (conditions.size() != samples.size())
        throw ShapeError("conditions and samples must pair up");
    if (conditions.empty()) throw std::invalid_argument("empty evaluation set");
    int hits = 0;
    for (std::size_t i = 0; i < conditions.size(); ++i)
        if (world.decode_events(samples[i]) == conditions[i].events) ++hits;
    return static_cast<double>(hits) / conditions.size();
}

double temporal_order_accuracy(const ToyWorld& world, const NoiseSchedule& schedule,
                               const Denoiser& model, const GuidanceConfig& guidance,
                               const std::vector<ConditionSpec>& conditions, std::uint64_t seed,
                               ForwardCoeff coeff, int workers) {
    std::vector<ConditionSpec> multi;
    for (const auto& c : conditions)
        if (c.events.size() >= 2) multi.push_back(c);
    if (multi.empty()) throw std::invalid_argument("no conditions with >= 2 events");
    int n = static_cast<int>(multi.size());
    std::vector<Sample> generated(n);
    parallel_for(n, workers, [&](int i) {
        Rng rng(derive_seed(seed, multi[i].id));
        generated[i] = sample(schedule, model, &multi[i], guidance, rng, coeff);
    });
    return temporal_order_accuracy_on_samples(world, multi, generated);
}

double mean_alignment_score(const ToyWorld& world, int scorer_id, const NoiseSchedule& schedule,
                            const Denoiser& model, const GuidanceConfig& guidance,
                            const std::vector<ConditionSpec>& conditions, std::uint64_t seed,
                            ForwardCoeff coeff, int workers) {
    if (conditions.empty()) throw std::invalid_argument("empty condition list");
    int n = static_cast<int>(conditions.size());
    std::vector<double> scores(n);
    parallel_for(n, workers, [&](int i) {
        Rng rng(derive_seed(seed, conditions[i].id));
        Sample x = sample(schedule, model, &conditions[i], guidance, rng, coeff);
        scores[i] = world.score(scorer_id, conditions[i], x);
    });
    double total = 0.0;
    for (double s : scores) total += s;
    return total / n;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["mean_score1"] = report.mean_score1;
    j["mean_score2"] = report.mean_score2;
    j["frechet_gaussian"] = report.frechet_gaussian;
    j["pref_accuracy"] = report.pref_accuracy;
    j["pref_zero_fraction"] = report.pref_zero_fraction;
    j["temporal_order_accuracy"] = report.temporal_order_accuracy;
    j["n_eval"] = report.n_eval;
    return j.dump(2);
}

}  // namespace prefdiff
