#include "prefdiff/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prefdiff/errors.hpp"

namespace prefdiff {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int out = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + key + ": " + v);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad unsigned integer for " + key + ": " + v);
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad real for " + key + ": " + v);
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(parse_int(key, trim(part)));
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (n_slots < 1 || sample_dim % n_slots != 0)
        throw ConfigError("sample_dim must be a positive multiple of n_slots");
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (!(scorer_noise >= 0.0)) throw ConfigError("scorer_noise must be >= 0");
    if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be >= 0");
    if (n_inference_steps < 1 || n_inference_steps > n_steps)
        throw ConfigError("n_inference_steps must be in 1..n_steps");
    if (!(guidance_scale >= 0.0)) throw ConfigError("guidance_scale must be >= 0");
    if (!(augment_prob >= 0.0 && augment_prob <= 1.0))
        throw ConfigError("augment_prob must be in [0,1]");
    if (!(cond_dropout >= 0.0 && cond_dropout <= 1.0))
        throw ConfigError("cond_dropout must be in [0,1]");
    if (nonlinearity != "tanh" && nonlinearity != "identity")
        throw ConfigError("nonlinearity must be tanh or identity");
    if (threshold_mode != "quantile" && threshold_mode != "fixed")
        throw ConfigError("threshold_mode must be quantile or fixed");
    if (dpo_reference != "pretrained" && dpo_reference != "sft")
        throw ConfigError("dpo_reference must be pretrained or sft");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ConfigError("holdout_fraction must be in (0,1)");
    if (margin_draws < 1) throw ConfigError("margin_draws must be >= 1");
    if (pretrain_size < 1) throw ConfigError("pretrain_size must be >= 1");
    if (prefs_pool_size < 1) throw ConfigError("prefs_pool_size must be >= 1");
    if (eval_conditions < 2) throw ConfigError("eval_conditions must be >= 2");
    if (!(dpo_beta > 0.0)) throw ConfigError("dpo_beta must be > 0");
    for (int s : s11_steps)
        if (s < 1 || s > n_steps) throw ConfigError("s11_steps entries must be in 1..n_steps");
    if (pretrain_epochs < 0 || sft_epochs < 0 || dpo_epochs < 0)
        throw ConfigError("epoch counts must be >= 0");
    if (!(pretrain_lr >= 0.0) || !(sft_lr >= 0.0) || !(dpo_lr >= 0.0))
        throw ConfigError("learning rates must be >= 0");
    if (batch_size < 1 || grad_accum < 1)
        throw ConfigError("batch_size and grad_accum must be >= 1");
    thresholds.validate();
    auto check_q = [](const char* name, double q) {
        if (!(q >= 0.0 && q <= 1.0))
            throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    check_q("q_alpha", quantiles.q_alpha);
    check_q("q_beta", quantiles.q_beta);
    check_q("q_delta_lo", quantiles.q_delta_lo);
    check_q("q_delta_hi", quantiles.q_delta_hi);
    if (!(quantiles.q_delta_lo < quantiles.q_delta_hi))
        throw ConfigError("q_delta_lo must be below q_delta_hi");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + " is not key=value: " + raw);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line_no) + " has an empty key or value");

        if (key == "seed") cfg.seed = parse_u64(key, val);
        else if (key == "workers") cfg.workers = parse_int(key, val);
        else if (key == "vocab_size") cfg.vocab_size = parse_int(key, val);
        else if (key == "sample_dim") cfg.sample_dim = parse_int(key, val);
        else if (key == "embed_dim") cfg.embed_dim = parse_int(key, val);
        else if (key == "n_slots") cfg.n_slots = parse_int(key, val);
        else if (key == "scorer_noise") cfg.scorer_noise = parse_double(key, val);
        else if (key == "noise_scale") cfg.noise_scale = parse_double(key, val);
        else if (key == "n_steps") cfg.n_steps = parse_int(key, val);
        else if (key == "beta_start") cfg.beta_start = parse_double(key, val);
        else if (key == "beta_end") cfg.beta_end = parse_double(key, val);
        else if (key == "forward_coeff") cfg.coeff = forward_coeff_from_string(val);
        else if (key == "hidden") cfg.hidden = parse_int_list(key, val);
        else if (key == "time_embed_dim") cfg.time_embed_dim = parse_int(key, val);
        else if (key == "nonlinearity") cfg.nonlinearity = val;
        else if (key == "guidance_scale") cfg.guidance_scale = parse_double(key, val);
        else if (key == "n_inference_steps") cfg.n_inference_steps = parse_int(key, val);
        else if (key == "pretrain_size") cfg.pretrain_size = parse_int(key, val);
        else if (key == "pretrain_epochs") cfg.pretrain_epochs = parse_int(key, val);
        else if (key == "pretrain_lr") cfg.pretrain_lr = parse_double(key, val);
        else if (key == "batch_size") cfg.batch_size = parse_int(key, val);
        else if (key == "grad_accum") cfg.grad_accum = parse_int(key, val);
        else if (key == "weight_decay") cfg.weight_decay = parse_double(key, val);
        else if (key == "augment_prob") cfg.augment_prob = parse_double(key, val);
        else if (key == "cond_dropout") cfg.cond_dropout = parse_double(key, val);
        else if (key == "gamma_weighting") cfg.gamma_weighting = weight_mode_from_string(val);
        else if (key == "prefs_pool_size") cfg.prefs_pool_size = parse_int(key, val);
        else if (key == "s11_steps") cfg.s11_steps = parse_int_list(key, val);
        else if (key == "threshold_mode") cfg.threshold_mode = val;
        else if (key == "alpha1") cfg.thresholds.alpha1 = parse_double(key, val);
        else if (key == "beta1") cfg.thresholds.beta1 = parse_double(key, val);
        else if (key == "delta1_lo") cfg.thresholds.delta1_lo = parse_double(key, val);
        else if (key == "delta1_hi") cfg.thresholds.delta1_hi = parse_double(key, val);
        else if (key == "alpha2") cfg.thresholds.alpha2 = parse_double(key, val);
        else if (key == "beta2") cfg.thresholds.beta2 = parse_double(key, val);
        else if (key == "delta2_lo") cfg.thresholds.delta2_lo = parse_double(key, val);
        else if (key == "delta2_hi") cfg.thresholds.delta2_hi = parse_double(key, val);
        else if (key == "q_alpha") cfg.quantiles.q_alpha = parse_double(key, val);
        else if (key == "q_beta") cfg.quantiles.q_beta = parse_double(key, val);
        else if (key == "q_delta_lo") cfg.quantiles.q_delta_lo = parse_double(key, val);
        else if (key == "q_delta_hi") cfg.quantiles.q_delta_hi = parse_double(key, val);
        else if (key == "sft_epochs") cfg.sft_epochs = parse_int(key, val);
        else if (key == "sft_lr") cfg.sft_lr = parse_double(key, val);
        else if (key == "dpo_epochs") cfg.dpo_epochs = parse_int(key, val);
        else if (key == "dpo_lr") cfg.dpo_lr = parse_double(key, val);
        else if (key == "dpo_beta") cfg.dpo_beta = parse_double(key, val);
        else if (key == "dpo_weighting") cfg.dpo_weighting = weight_mode_from_string(val);
        else if (key == "dpo_reference") cfg.dpo_reference = val;
        else if (key == "holdout_fraction") cfg.holdout_fraction = parse_double(key, val);
        else if (key == "margin_draws") cfg.margin_draws = parse_int(key, val);
        else if (key == "eval_conditions") cfg.eval_conditions = parse_int(key, val);
        else throw ConfigError("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const RunConfig& cfg) {
    std::string out;
    auto kv = [&out](const std::string& key, const std::string& val) {
        out += key + "=" + val + "\n";
    };
    kv("seed", std::to_string(cfg.seed));
    kv("workers", std::to_string(cfg.workers));
    kv("vocab_size", std::to_string(cfg.vocab_size));
    kv("sample_dim", std::to_string(cfg.sample_dim));
    kv("embed_dim", std::to_string(cfg.embed_dim));
    kv("n_slots", std::to_string(cfg.n_slots));
    kv("scorer_noise", format_double(cfg.scorer_noise));
    kv("noise_scale", format_double(cfg.noise_scale));
    kv("n_steps", std::to_string(cfg.n_steps));
    kv("beta_start", format_double(cfg.beta_start));
    kv("beta_end", format_double(cfg.beta_end));
    kv("forward_coeff", to_string(cfg.coeff));
    kv("hidden", format_int_list(cfg.hidden));
    kv("time_embed_dim", std::to_string(cfg.time_embed_dim));
    kv("nonlinearity", cfg.nonlinearity);
    kv("guidance_scale", format_double(cfg.guidance_scale));
    kv("n_inference_steps", std::to_string(cfg.n_inference_steps));
    kv("pretrain_size", std::to_string(cfg.pretrain_size));
    kv("pretrain_epochs", std::to_string(cfg.pretrain_epochs));
    kv("pretrain_lr", format_double(cfg.pretrain_lr));
    kv("batch_size", std::to_string(cfg.batch_size));
    kv("grad_accum", std::to_string(cfg.grad_accum));
    kv("weight_decay", format_double(cfg.weight_decay));
    kv("augment_prob", format_double(cfg.augment_prob));
    kv("cond_dropout", format_double(cfg.cond_dropout));
    kv("gamma_weighting", to_string(cfg.gamma_weighting));
    kv("prefs_pool_size", std::to_string(cfg.prefs_pool_size));
    kv("s11_steps", format_int_list(cfg.s11_steps));
    kv("threshold_mode", cfg.threshold_mode);
    kv("alpha1", format_double(cfg.thresholds.alpha1));
    kv("beta1", format_double(cfg.thresholds.beta1));
    kv("delta1_lo", format_double(cfg.thresholds.delta1_lo));
    kv("delta1_hi", format_double(cfg.thresholds.delta1_hi));
    kv("alpha2", format_double(cfg.thresholds.alpha2));
    kv("beta2", format_double(cfg.thresholds.beta2));
    kv("delta2_lo", format_double(cfg.thresholds.delta2_lo));
    kv("delta2_hi", format_double(cfg.thresholds.delta2_hi));
    kv("q_alpha", format_double(cfg.quantiles.q_alpha));
    kv("q_beta", format_double(cfg.quantiles.q_beta));
    kv("q_delta_lo", format_double(cfg.quantiles.q_delta_lo));
    kv("q_delta_hi", format_double(cfg.quantiles.q_delta_hi));
    kv("sft_epochs", std::to_string(cfg.sft_epochs));
    kv("sft_lr", format_double(cfg.sft_lr));
    kv("dpo_epochs", std::to_string(cfg.dpo_epochs));
    kv("dpo_lr", format_double(cfg.dpo_lr));
    kv("dpo_beta", format_double(cfg.dpo_beta));
    kv("dpo_weighting", to_string(cfg.dpo_weighting));
    kv("dpo_reference", cfg.dpo_reference);
    kv("holdout_fraction", format_double(cfg.holdout_fraction));
    kv("margin_draws", std::to_string(cfg.margin_draws));
    kv("eval_conditions", std::to_string(cfg.eval_conditions));
    return out;
}

}  // namespace prefdiff
