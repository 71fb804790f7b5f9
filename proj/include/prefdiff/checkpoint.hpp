#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "prefdiff/denoiser.hpp"
#include "prefdiff/diffusion.hpp"

namespace prefdiff {

struct CheckpointHeader {
    int format_version = 1;
    DenoiserArch arch;
    int n_steps = 50;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    ForwardCoeff coeff = ForwardCoeff::kSqrt;
    std::uint64_t seed = 0;
    std::string phase = "init";  // init, reference, sft, dpo
    std::int64_t step_count = 0;
};

// Binary layout: 8-byte magic, little-endian u64 header length, JSON header,
// little-endian u64 parameter count, parameters as little-endian f64.
void save_checkpoint(const std::string& path, const Denoiser& model,
                     const CheckpointHeader& header);

std::pair<Denoiser, CheckpointHeader> load_checkpoint(const std::string& path);

}  // namespace prefdiff
