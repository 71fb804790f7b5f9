#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace prefdiff {

// Deterministic PRNG with identical output on every platform. All project
// randomness flows through this class: std:: distributions are
// implementation-defined and would break byte-identical reruns.
//
// Stream: splitmix64. Normals: Box-Muller, exactly two uniforms per draw.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Standard normal. Consumes exactly two uniforms (no caching), so the
    // draw sequence is trivial to reproduce elsewhere.
    double next_normal();

    // Uniform integer in [0, bound). bound must be positive.
    int next_int(int bound);

    std::vector<double> normal_vector(std::size_t n);

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

// Named sub-stream derivation, e.g. derive_seed(root, "pretrain").
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream);

// Indexed sub-stream derivation for per-item streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace prefdiff
