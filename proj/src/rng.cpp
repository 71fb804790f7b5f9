#include "prefdiff/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace prefdiff {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t avalanche(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return avalanche(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
    // u1 in (0, 1] so log(u1) is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

int Rng::next_int(int bound) {
    if (bound <= 0) throw std::invalid_argument("Rng::next_int: bound must be positive");
    int v = static_cast<int>(next_double() * static_cast<double>(bound));
    return v < bound ? v : bound - 1;
}

std::vector<double> Rng::normal_vector(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = next_normal();
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
    return avalanche((base ^ fnv1a(stream)) + kGolden);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return avalanche((base ^ (index * 0xD1B54A32D192ED03ull)) + kGolden);
}

}  // namespace prefdiff
