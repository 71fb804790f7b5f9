#include "prefdiff/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "prefdiff/augment.hpp"
#include "prefdiff/errors.hpp"
#include "prefdiff/rng.hpp"

namespace prefdiff {

void adamw_step(std::vector<double>& params, AdamState& state, const std::vector<double>& grad,
                double lr, const AdamParams& opt) {
    if (grad.size() != params.size()) throw ShapeError("gradient/parameter size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) throw ShapeError("optimizer state size mismatch");
    state.t += 1;
    double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (opt.weight_decay != 0.0) params[i] -= lr * opt.weight_decay * params[i];
        state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grad[i];
        state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
        double m_hat = state.m[i] / bc1;
        double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
}

namespace {

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("lr must be finite and >= 0");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.grad_accum < 1) throw ConfigError("grad_accum must be >= 1");
}

class MetricsLog {
  public:
    explicit MetricsLog(const std::string& path) {
        if (path.empty()) return;
        out_.open(path, std::ios::binary);
        if (!out_) throw IoError("cannot open metrics log: " + path);
        out_ << "step,phase,loss,lr,margin\n";
    }
    void row(std::int64_t step, const char* phase, double loss, double lr, double margin) {
        if (!out_.is_open()) return;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%lld,%s,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(step), phase, loss, lr, margin);
        out_ << buf;
    }

  private:
    std::ofstream out_;
};

[[noreturn]] void report_divergence(const char* phase, std::int64_t step, double loss) {
    throw NumericalError(std::string("training diverged: phase ") + phase + ", step " +
                         std::to_string(step) + ", loss " + std::to_string(loss));
}

// One pass structure shared by the noise-prediction phases. Items are
// visited in shuffled order; every optimizer step consumes up to
// batch_size * grad_accum items and averages their gradients.
TrainOutcome run_ldm_phase(const char* phase, const TrainConfig& cfg, Denoiser model,
                           const std::vector<LabeledSample>& items, const NoiseSchedule& schedule,
                           bool augment, bool cond_dropout) {
    validate_train_config(cfg);
    if (items.empty()) throw ConfigError("training set is empty");
    int n = static_cast<int>(items.size());
    int dim = model.arch().sample_dim;
    int effective = cfg.batch_size * cfg.grad_accum;
    std::int64_t steps_per_epoch = (n + effective - 1) / effective;
    std::int64_t total_steps = steps_per_epoch * cfg.epochs;

    TrainOutcome out{std::move(model), 0, 0.0, 0.0};
    MetricsLog log(cfg.metrics_path);
    if (total_steps == 0) return out;

    Rng rng(derive_seed(cfg.seed, "train"));
    AdamState state;
    AdamParams opt;
    opt.weight_decay = cfg.weight_decay;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> grad_sum(out.model.params().size());

    std::int64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        int i = 0;
        while (i < n) {
            int take = std::min(effective, n - i);
            std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
            double loss_sum = 0.0;
            for (int k = 0; k < take; ++k) {
                const LabeledSample& item = items[order[i + k]];
                const ConditionSpec* cond = &item.first;
                const Sample* x0 = &item.second;
                ConditionSpec mixed_cond;
                Sample mixed_x;
                if (augment && rng.next_double() < cfg.augment_prob) {
                    const LabeledSample& partner = items[rng.next_int(n)];
                    MixResult m = mix(*x0, partner.second, *cond, partner.first,
                                      out.model.arch().n_slots);
                    mixed_cond = std::move(m.merged_condition);
                    mixed_x = std::move(m.mixed);
                    cond = &mixed_cond;
                    x0 = &mixed_x;
                }
                if (cond_dropout && rng.next_double() < cfg.cond_dropout) cond = nullptr;
                int step_n = 1 + rng.next_int(schedule.n_steps);
                Sample eps = rng.normal_vector(dim);
                LossResult res = ldm_loss(schedule, out.model, *x0, cond, step_n, eps,
                                          cfg.gamma_mode, cfg.coeff);
                loss_sum += res.loss;
                for (std::size_t g = 0; g < grad_sum.size(); ++g) grad_sum[g] += res.grad[g];
            }
            double loss_mean = loss_sum / take;
            if (!std::isfinite(loss_mean)) report_divergence(phase, t, loss_mean);
            for (double& g : grad_sum) g /= take;
            double lr_t = cfg.lr * (1.0 - static_cast<double>(t) / total_steps);
            adamw_step(out.model.params(), state, grad_sum, lr_t, opt);
            log.row(t, phase, loss_mean, lr_t, 0.0);
            if (t == 0) out.first_loss = loss_mean;
            out.final_loss = loss_mean;
            ++t;
            i += take;
        }
    }
    out.step_count = t;
    return out;
}

}  // namespace

TrainOutcome train_reference(const TrainConfig& cfg, const DenoiserArch& arch,
                             const std::vector<LabeledSample>& data,
                             const NoiseSchedule& schedule) {
    Denoiser init = Denoiser::init_random(arch, derive_seed(cfg.seed, "init"));
    return run_ldm_phase("reference", cfg, std::move(init), data, schedule, true, true);
}

TrainOutcome train_sft(const TrainConfig& cfg, const std::vector<PreferencePair>& pairs,
                       const NoiseSchedule& schedule, const Denoiser& init) {
    std::vector<LabeledSample> items;
    items.reserve(pairs.size());
    for (const auto& p : pairs) items.emplace_back(p.condition, p.winner);
    return run_ldm_phase("sft", cfg, init, items, schedule, false, false);
}

TrainOutcome train_dpo(const TrainConfig& cfg, const std::vector<PreferencePair>& pairs,
                       const NoiseSchedule& schedule, const Denoiser& policy_init,
                       const Denoiser& reference) {
    validate_train_config(cfg);
    if (pairs.empty()) throw ConfigError("preference set is empty");
    if (!(policy_init.arch() == reference.arch()))
        throw ConfigError("policy and reference architectures differ");
    DpoConfig dcfg = cfg.dpo;
    dcfg.coeff = cfg.coeff;

    int n = static_cast<int>(pairs.size());
    int dim = policy_init.arch().sample_dim;
    int effective = cfg.batch_size * cfg.grad_accum;
    std::int64_t steps_per_epoch = (n + effective - 1) / effective;
    std::int64_t total_steps = steps_per_epoch * cfg.epochs;

    TrainOutcome out{policy_init, 0, 0.0, 0.0};
    MetricsLog log(cfg.metrics_path);
    if (total_steps == 0) return out;

    Rng rng(derive_seed(cfg.seed, "train"));
    AdamState state;
    AdamParams opt;
    opt.weight_decay = cfg.weight_decay;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> grad_sum(out.model.params().size());

    std::int64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        int i = 0;
        while (i < n) {
            int take = std::min(effective, n - i);
            std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
            double loss_sum = 0.0, margin_sum = 0.0;
            for (int k = 0; k < take; ++k) {
                const PreferencePair& pair = pairs[order[i + k]];
                int step_n = 1 + rng.next_int(schedule.n_steps);
                Sample eps_w = rng.normal_vector(dim);
                Sample eps_l = rng.normal_vector(dim);
                DpoBatchResult res = dpo_diffusion_loss(schedule, out.model, reference, pair,
                                                        step_n, eps_w, eps_l, dcfg);
                loss_sum += res.loss;
                margin_sum += res.margin;
                for (std::size_t g = 0; g < grad_sum.size(); ++g) grad_sum[g] += res.grad[g];
            }
            double loss_mean = loss_sum / take;
            if (!std::isfinite(loss_mean)) report_divergence("dpo", t, loss_mean);
            for (double& g : grad_sum) g /= take;
            double lr_t = cfg.lr * (1.0 - static_cast<double>(t) / total_steps);
            adamw_step(out.model.params(), state, grad_sum, lr_t, opt);
            log.row(t, "dpo", loss_mean, lr_t, margin_sum / take);
            if (t == 0) out.first_loss = loss_mean;
            out.final_loss = loss_mean;
            ++t;
            i += take;
        }
    }
    out.step_count = t;
    return out;
}

}  // namespace prefdiff
