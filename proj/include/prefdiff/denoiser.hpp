#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefdiff/toyworld.hpp"

namespace prefdiff {

// Architecture descriptor. Carries everything needed to rebuild the net from
// a checkpoint, including the condition featurizer seed.
struct DenoiserArch {
    int sample_dim = 32;
    std::vector<int> hidden = {64, 64};
    int time_embed_dim = 16;  // even, 0 disables the timestep input
    int cond_embed_dim = 16;
    int vocab_size = 8;
    int n_slots = 4;
    std::uint64_t cond_seed = 0;
    std::string nonlinearity = "tanh";  // or "identity"

    int input_dim() const { return sample_dim + time_embed_dim + cond_embed_dim; }
    int param_count() const;
    bool operator==(const DenoiserArch&) const = default;
};

// Sinusoidal embedding of a (1-based) step index, dim entries (even).
std::vector<double> timestep_embedding(int n, int dim);

// MLP noise estimator over concat(x_n, timestep embedding, condition
// features). An absent condition uses the learned null token stored at the
// tail of the parameter vector.
class Denoiser {
  public:
    explicit Denoiser(const DenoiserArch& arch);

    // Uniform +-0.05 weights and null token, zero biases.
    static Denoiser init_random(const DenoiserArch& arch, std::uint64_t seed);

    const DenoiserArch& arch() const { return arch_; }
    const CondFeaturizer& featurizer() const { return featurizer_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    Sample forward(const Sample& x_n, int n, const ConditionSpec* cond) const;

    // Gradient of <forward(...), upstream> with respect to params.
    std::vector<double> backward(const Sample& x_n, int n, const ConditionSpec* cond,
                                 const Sample& upstream) const;

  private:
    enum class Act { kTanh, kIdentity };

    std::vector<double> assemble_input(const Sample& x_n, int n, const ConditionSpec* cond) const;
    void run_layers(const std::vector<double>& input, std::vector<std::vector<double>>& acts) const;

    DenoiserArch arch_;
    Act act_ = Act::kTanh;
    CondFeaturizer featurizer_;
    std::vector<int> dims_;      // input, hidden..., output widths
    std::vector<int> w_off_;     // per-layer weight offsets into params_
    std::vector<int> b_off_;     // per-layer bias offsets
    int null_off_ = 0;
    std::vector<double> params_;
};

}  // namespace prefdiff
