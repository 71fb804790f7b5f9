#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "prefdiff/rng.hpp"

#include "oracle_values.hpp"

using namespace prefdiff;

TEST_CASE("u64 stream matches the mirrored implementation") {
    Rng rng(42);
    for (std::uint64_t expected : oracle::kU64Seed42) CHECK(rng.next_u64() == expected);
}

TEST_CASE("uniform doubles match the mirrored implementation bitwise") {
    Rng rng(1);
    for (double expected : oracle::kDoubleSeed1) CHECK(rng.next_double() == expected);
}

TEST_CASE("normal draws match the mirrored implementation bitwise") {
    Rng rng(7);
    for (double expected : oracle::kNormalSeed7) CHECK(rng.next_normal() == expected);
}

TEST_CASE("bounded ints match the mirrored implementation") {
    Rng rng(3);
    for (int expected : oracle::kIntSeed3Bound10) CHECK(rng.next_int(10) == expected);
}

TEST_CASE("seed derivation matches the mirrored implementation") {
    CHECK(derive_seed(1, "train") == oracle::kDeriveTrainFrom1);
    CHECK(derive_seed(123, std::uint64_t{5}) == oracle::kDeriveIdx5From123);
    CHECK(derive_seed(9, "") == oracle::kDeriveEmptyFrom9);
}

TEST_CASE("shuffle matches the mirrored Fisher-Yates") {
    std::vector<int> v(8);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(9);
    rng.shuffle(v);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == oracle::kShuffleSeed9N8[i]);
}

TEST_CASE("same seed reproduces the same sequence") {
    Rng a(555), b(555);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different named streams diverge") {
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("uniform doubles stay in [0, 1)") {
    Rng rng(1234);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("bounded ints stay in range and hit every value") {
    Rng rng(77);
    std::set<int> seen;
    for (int i = 0; i < 1000; ++i) {
        int v = rng.next_int(7);
        CHECK(v >= 0);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.next_int(1) == 0);
    CHECK_THROWS_AS(rng.next_int(0), std::invalid_argument);
    CHECK_THROWS_AS(rng.next_int(-3), std::invalid_argument);
}

TEST_CASE("normal draws have roughly standard moments") {
    Rng rng(2718);
    const int n = 50000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.next_normal();
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("normal_vector consumes exactly two uniforms per draw") {
    Rng a(31), b(31);
    std::vector<double> v = a.normal_vector(5);
    CHECK(v.size() == 5);
    for (int i = 0; i < 10; ++i) b.next_u64();
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("shuffle produces a permutation") {
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(4242);
    rng.shuffle(v);
    std::set<int> seen(v.begin(), v.end());
    CHECK(seen.size() == 100);
}
