#include "prefdiff/denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "prefdiff/errors.hpp"
#include "prefdiff/rng.hpp"

namespace prefdiff {

int DenoiserArch::param_count() const {
    int count = 0;
    int prev = input_dim();
    for (int h : hidden) {
        count += h * (prev + 1);
        prev = h;
    }
    count += sample_dim * (prev + 1);
    count += cond_embed_dim;
    return count;
}

std::vector<double> timestep_embedding(int n, int dim) {
    if (dim < 0 || dim % 2 != 0) throw ConfigError("timestep embedding dim must be even");
    std::vector<double> emb(dim);
    int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * i / half);
        emb[2 * i] = std::sin(n * freq);
        emb[2 * i + 1] = std::cos(n * freq);
    }
    return emb;
}

Denoiser::Denoiser(const DenoiserArch& arch) : arch_(arch) {
    if (arch.sample_dim < 1) throw ConfigError("sample_dim must be >= 1");
    if (arch.time_embed_dim < 0 || arch.time_embed_dim % 2 != 0)
        throw ConfigError("time_embed_dim must be even and >= 0");
    if (arch.cond_embed_dim < 1) throw ConfigError("cond_embed_dim must be >= 1");
    for (int h : arch.hidden)
        if (h < 1) throw ConfigError("hidden widths must be >= 1");
    if (arch.nonlinearity == "tanh")
        act_ = Act::kTanh;
    else if (arch.nonlinearity == "identity")
        act_ = Act::kIdentity;
    else
        throw ConfigError("unknown nonlinearity: " + arch.nonlinearity);

    featurizer_ = CondFeaturizer(arch.cond_seed, arch.cond_embed_dim, arch.vocab_size,
                                 arch.n_slots);

    dims_.push_back(arch.input_dim());
    for (int h : arch.hidden) dims_.push_back(h);
    dims_.push_back(arch.sample_dim);

    int off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_off_.push_back(off);
        off += dims_[l + 1] * dims_[l];
        b_off_.push_back(off);
        off += dims_[l + 1];
    }
    null_off_ = off;
    params_.assign(arch.param_count(), 0.0);
}

Denoiser Denoiser::init_random(const DenoiserArch& arch, std::uint64_t seed) {
    Denoiser model(arch);
    Rng rng(seed);
    auto uniform = [&rng] { return rng.next_double() * 0.1 - 0.05; };
    for (std::size_t l = 0; l + 1 < model.dims_.size(); ++l) {
        int n_w = model.dims_[l + 1] * model.dims_[l];
        for (int i = 0; i < n_w; ++i) model.params_[model.w_off_[l] + i] = uniform();
    }
    for (int i = 0; i < arch.cond_embed_dim; ++i) model.params_[model.null_off_ + i] = uniform();
    return model;
}

std::vector<double> Denoiser::assemble_input(const Sample& x_n, int n,
                                             const ConditionSpec* cond) const {
    if (static_cast<int>(x_n.size()) != arch_.sample_dim)
        throw ShapeError("denoiser input dimension mismatch");
    if (n < 1) throw std::out_of_range("step index must be >= 1");
    if (static_cast<int>(params_.size()) != arch_.param_count())
        throw ShapeError("parameter count does not match architecture");
    std::vector<double> in;
    in.reserve(dims_[0]);
    in.insert(in.end(), x_n.begin(), x_n.end());
    std::vector<double> temb = timestep_embedding(n, arch_.time_embed_dim);
    in.insert(in.end(), temb.begin(), temb.end());
    if (cond != nullptr) {
        std::vector<double> feats = featurizer_.embed(*cond);
        in.insert(in.end(), feats.begin(), feats.end());
    } else {
        in.insert(in.end(), params_.begin() + null_off_, params_.end());
    }
    return in;
}

void Denoiser::run_layers(const std::vector<double>& input,
                          std::vector<std::vector<double>>& acts) const {
    acts.clear();
    acts.push_back(input);
    std::size_t n_layers = dims_.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::vector<double>& h = acts.back();
        std::vector<double> z(dims_[l + 1]);
        const double* w = params_.data() + w_off_[l];
        const double* b = params_.data() + b_off_[l];
        for (int r = 0; r < dims_[l + 1]; ++r) {
            double acc = b[r];
            const double* row = w + static_cast<std::size_t>(r) * dims_[l];
            for (int c = 0; c < dims_[l]; ++c) acc += row[c] * h[c];
            z[r] = acc;
        }
        if (l + 1 < n_layers && act_ == Act::kTanh)
            for (double& v : z) v = std::tanh(v);
        acts.push_back(std::move(z));
    }
}

Sample Denoiser::forward(const Sample& x_n, int n, const ConditionSpec* cond) const {
    std::vector<std::vector<double>> acts;
    run_layers(assemble_input(x_n, n, cond), acts);
    return acts.back();
}

std::vector<double> Denoiser::backward(const Sample& x_n, int n, const ConditionSpec* cond,
                                       const Sample& upstream) const {
    if (upstream.size() != static_cast<std::size_t>(arch_.sample_dim))
        throw ShapeError("upstream gradient dimension mismatch");
    std::vector<std::vector<double>> acts;
    run_layers(assemble_input(x_n, n, cond), acts);

    std::vector<double> grad(params_.size(), 0.0);
    std::vector<double> d = upstream;
    std::size_t n_layers = dims_.size() - 1;
    for (std::size_t li = n_layers; li-- > 0;) {
        const std::vector<double>& h = acts[li];
        double* gw = grad.data() + w_off_[li];
        double* gb = grad.data() + b_off_[li];
        for (int r = 0; r < dims_[li + 1]; ++r) {
            double* row = gw + static_cast<std::size_t>(r) * dims_[li];
            for (int c = 0; c < dims_[li]; ++c) row[c] += d[r] * h[c];
            gb[r] += d[r];
        }
        bool need_input_grad = li > 0 || cond == nullptr;
        if (!need_input_grad) break;
        const double* w = params_.data() + w_off_[li];
        std::vector<double> d_prev(dims_[li], 0.0);
        for (int r = 0; r < dims_[li + 1]; ++r) {
            const double* row = w + static_cast<std::size_t>(r) * dims_[li];
            for (int c = 0; c < dims_[li]; ++c) d_prev[c] += row[c] * d[r];
        }
        if (li > 0 && act_ == Act::kTanh) {
            // acts[li] holds tanh(z); derivative is 1 - tanh(z)^2.
            for (int c = 0; c < dims_[li]; ++c) d_prev[c] *= 1.0 - h[c] * h[c];
        }
        d = std::move(d_prev);
    }
    if (cond == nullptr) {
        int cond_start = arch_.sample_dim + arch_.time_embed_dim;
        for (int j = 0; j < arch_.cond_embed_dim; ++j) grad[null_off_ + j] += d[cond_start + j];
    }
    return grad;
}

}  // namespace prefdiff
