#!/usr/bin/env python3
"""Generate frozen reference values for the C++ test suite.

Prints a C++ header to stdout:

    python3 tests/tools/make_reference_values.py > tests/oracle_values.hpp

The RNG section mirrors the project generator (splitmix64 + Box-Muller) so
the frozen values are an independent cross-language check of the stream.
The numerical sections recompute schedule, optimizer, quantile, and Frechet
quantities with numpy/scipy/mpmath rather than the project code.
"""

import math

import mpmath
import numpy as np
from scipy import linalg

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def avalanche(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def fnv1a(s):
    h = 0xCBF29CE484222325
    for c in s.encode():
        h = ((h ^ c) * 0x100000001B3) & MASK
    return h


def derive_seed_name(base, name):
    return avalanche(((base ^ fnv1a(name)) + GOLDEN) & MASK)


def derive_seed_index(base, index):
    return avalanche(((base ^ ((index * 0xD1B54A32D192ED03) & MASK)) + GOLDEN) & MASK)


class Rng:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK
        return avalanche(self.state)

    def next_double(self):
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_normal(self):
        u1 = ((self.next_u64() >> 11) + 1) * (2.0 ** -53)
        u2 = (self.next_u64() >> 11) * (2.0 ** -53)
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(6.283185307179586 * u2)

    def next_int(self, bound):
        v = int(self.next_double() * float(bound))
        return v if v < bound else bound - 1

    def normal_vector(self, n):
        return [self.next_normal() for _ in range(n)]

    def shuffle(self, v):
        for i in range(len(v), 1, -1):
            j = self.next_int(i)
            v[i - 1], v[j] = v[j], v[i - 1]


def fmt_d(x):
    return repr(float(x))


def emit_u64_array(name, values):
    vals = ", ".join(f"0x{v:016X}ull" for v in values)
    print(f"inline constexpr std::uint64_t {name}[] = {{{vals}}};")


def emit_double_array(name, values):
    vals = ", ".join(fmt_d(v) for v in values)
    print(f"inline constexpr double {name}[] = {{{vals}}};")


def emit_int_array(name, values):
    vals = ", ".join(str(v) for v in values)
    print(f"inline constexpr int {name}[] = {{{vals}}};")


def emit_double(name, value):
    print(f"inline constexpr double {name} = {fmt_d(value)};")


def emit_u64(name, value):
    print(f"inline constexpr std::uint64_t {name} = 0x{value:016X}ull;")


def rng_section():
    print("// splitmix64 stream, mirrored")
    r = Rng(42)
    emit_u64_array("kU64Seed42", [r.next_u64() for _ in range(4)])
    r = Rng(1)
    emit_double_array("kDoubleSeed1", [r.next_double() for _ in range(4)])
    r = Rng(7)
    emit_double_array("kNormalSeed7", [r.next_normal() for _ in range(4)])
    r = Rng(3)
    emit_int_array("kIntSeed3Bound10", [r.next_int(10) for _ in range(8)])
    emit_u64("kDeriveTrainFrom1", derive_seed_name(1, "train"))
    emit_u64("kDeriveIdx5From123", derive_seed_index(123, 5))
    emit_u64("kDeriveEmptyFrom9", derive_seed_name(9, ""))
    v = list(range(8))
    Rng(9).shuffle(v)
    emit_int_array("kShuffleSeed9N8", v)
    print()


def schedule_section():
    print("// linear beta schedule quantities, recomputed at 50-digit precision")
    mpmath.mp.dps = 50
    n, b0, b1 = 50, mpmath.mpf("1e-4"), mpmath.mpf("0.02")
    step = (b1 - b0) / (n - 1)
    betas = [b0 + step * i for i in range(n)]
    betas[-1] = b1
    abars = []
    a = mpmath.mpf(1)
    for b in betas:
        a *= 1 - b
        abars.append(a)

    def abar(i):
        return abars[i - 1]

    emit_double("kAlphaBar1N50", abar(1))
    emit_double("kAlphaBar10N50", abar(10))
    emit_double("kAlphaBar25N50", abar(25))
    emit_double("kAlphaBar50N50", abar(50))
    emit_double("kBeta25N50", betas[24])
    emit_double("kPosteriorVar2N50", (1 - abar(1)) / (1 - abar(2)) * betas[1])
    emit_double("kPosteriorVar50N50", (1 - abar(49)) / (1 - abar(50)) * betas[49])
    emit_double("kSnr1N50", abar(1) / (1 - abar(1)))
    emit_double("kSnr50N50", abar(50) / (1 - abar(50)))

    tb = [mpmath.mpf("0.1") + (mpmath.mpf("0.4") - mpmath.mpf("0.1")) / 3 * i for i in range(4)]
    tb[-1] = mpmath.mpf("0.4")
    ta = []
    a = mpmath.mpf(1)
    for b in tb:
        a *= 1 - b
        ta.append(a)
    emit_double_array("kTinyAlphaBarN4", ta)
    post = [mpmath.mpf(0)]
    for i in range(2, 5):
        post.append((1 - ta[i - 2]) / (1 - ta[i - 1]) * tb[i - 1])
    emit_double_array("kTinyPosteriorVarN4", post)
    print()


def embedding_section():
    print("// sinusoidal timestep embedding, n = 7, dim = 6")
    half = 3
    emb = []
    for i in range(half):
        freq = 10000.0 ** (-i / half)
        emb.append(math.sin(7 * freq))
        emb.append(math.cos(7 * freq))
    emit_double_array("kTimeEmb7Dim6", emb)
    print()


def adamw_section():
    print("// AdamW, lr 0.01, betas 0.9/0.999, eps 1e-8, weight decay 0.01")
    params = np.array([1.0, -2.0, 0.5])
    grads = [np.array([0.1, -0.2, 0.3]), np.array([0.05, 0.05, -0.1])]
    lr, b1, b2, eps, wd = 0.01, 0.9, 0.999, 1e-8, 0.01
    m = np.zeros(3)
    v = np.zeros(3)
    out = []
    for t, g in enumerate(grads, start=1):
        params = params - lr * wd * params
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        params = params - lr * mhat / (np.sqrt(vhat) + eps)
        out.append(params.copy())
    emit_double_array("kAdamStep1", out[0])
    emit_double_array("kAdamStep2", out[1])
    print()


def frechet_section():
    print("// Frechet distance between fitted Gaussians, scipy sqrtm")
    d, na, nb = 5, 80, 90
    ra = Rng(derive_seed_name(99, "fda"))
    rb = Rng(derive_seed_name(99, "fdb"))

    def make_set(rng, n, scale, cross, shift):
        rows = []
        for _ in range(n):
            z = rng.normal_vector(d)
            row = [scale * z[0] + shift * 0.0]
            for j in range(1, d):
                row.append(scale * z[j] + cross * z[j - 1] + shift * j)
            rows.append(row)
        return np.array(rows)

    a = make_set(ra, na, 0.9, 0.4, 0.1)
    b = make_set(rb, nb, 1.2, -0.3, -0.05)
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    ca, cb = np.cov(a, rowvar=False), np.cov(b, rowvar=False)
    sqrt_ab = linalg.sqrtm(ca @ cb)
    fd = float(np.sum((mu_a - mu_b) ** 2) + np.trace(ca + cb - 2 * np.real(sqrt_ab)))
    emit_double("kFrechetOracle", fd)

    da = np.var(a, axis=0, ddof=1)
    db = np.var(b, axis=0, ddof=1)
    fd_diag = float(np.sum((mu_a - mu_b) ** 2) + np.sum(da + db - 2 * np.sqrt(da * db)))
    emit_double("kFrechetDiagOracle", fd_diag)
    print()


def quantile_section():
    print("// threshold calibration on a mirrored candidate pool, numpy linear quantiles")
    r = Rng(2024)
    w1, l1, w2, l2 = [], [], [], []
    for _ in range(40):
        u0, u1, u2, u3 = (r.next_double() for _ in range(4))
        w1.append(0.40 + 0.55 * u0)
        l1.append(w1[-1] - (0.02 + 0.40 * u1))
        w2.append(0.30 + 0.65 * u2)
        l2.append(w2[-1] - (0.01 + 0.60 * u3))
    w1, l1, w2, l2 = map(np.array, (w1, l1, w2, l2))
    q = lambda x, p: float(np.quantile(x, p, method="linear"))
    emit_double_array(
        "kCalibrated",
        [
            q(w1, 0.25), q(l1, 0.10), q(w1 - l1, 0.10), q(w1 - l1, 0.95),
            q(w2, 0.25), q(l2, 0.10), q(w2 - l2, 0.10), q(w2 - l2, 0.95),
        ],
    )
    print()


def mix_section():
    print("// loudness-weighted mix of two fixed signals")
    x1 = np.array([1.0, 2.0, 3.0, 4.0])
    x2 = np.array([0.5, -0.25, 1.0, 0.75])
    g1 = 20 * math.log10(math.sqrt(float(np.mean(x1 ** 2))))
    g2 = 20 * math.log10(math.sqrt(float(np.mean(x2 ** 2))))
    p = 1.0 / (1.0 + 10.0 ** ((g1 - g2) / 20.0))
    mixed = (p * x1 + (1 - p) * x2) / math.sqrt(p * p + (1 - p) * (1 - p))
    emit_double("kMixP", p)
    emit_double_array("kMixOut", mixed)
    print()


def main():
    print("#pragma once")
    print("// Frozen reference values. Regenerate with:")
    print("//   python3 tests/tools/make_reference_values.py > tests/oracle_values.hpp")
    print()
    print("#include <cstdint>")
    print()
    print("namespace oracle {")
    print()
    rng_section()
    schedule_section()
    embedding_section()
    adamw_section()
    frechet_section()
    quantile_section()
    mix_section()
    print("}  // namespace oracle")


if __name__ == "__main__":
    main()
