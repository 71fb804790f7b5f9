#include <doctest.h>

#include <cmath>
#include <vector>

#include "prefdiff/augment.hpp"
#include "prefdiff/errors.hpp"

#include "oracle_values.hpp"

using namespace prefdiff;

TEST_CASE("pressure level is 20 log10 of the rms") {
    Sample x = {3.0, 4.0};
    CHECK(pressure_level(x) == doctest::Approx(10.0 * std::log10(12.5)).epsilon(1e-14));
    Sample unit = {1.0, 1.0, 1.0};
    CHECK(pressure_level(unit) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("pressure level rejects degenerate signals") {
    CHECK_THROWS_AS(pressure_level({}), NumericalError);
    CHECK_THROWS_AS(pressure_level({0.0, 0.0, 0.0}), NumericalError);
}

TEST_CASE("equal loudness gives p exactly one half") {
    Sample x1 = {0.3, -0.7, 0.2, 0.9};
    Sample x2 = {-0.3, 0.7, -0.2, -0.9};
    ConditionSpec c1{"a", {0, 1}};
    ConditionSpec c2{"b", {2}};
    MixResult m = mix(x1, x2, c1, c2);
    CHECK(m.p == 0.5);
}

TEST_CASE("the louder input gets the smaller weight") {
    Sample quiet = {0.1, -0.1, 0.1, -0.1};
    Sample loud = {1.0, -1.0, 1.0, -1.0};
    ConditionSpec c1{"a", {0}};
    ConditionSpec c2{"b", {1}};
    CHECK(mix(loud, quiet, c1, c2).p < 0.5);
    CHECK(mix(quiet, loud, c1, c2).p > 0.5);
}

TEST_CASE("mix matches the external recomputation") {
    Sample x1 = {1.0, 2.0, 3.0, 4.0};
    Sample x2 = {0.5, -0.25, 1.0, 0.75};
    ConditionSpec c1{"a", {0, 1}};
    ConditionSpec c2{"b", {2, 3}};
    MixResult m = mix(x1, x2, c1, c2);
    CHECK(m.p == doctest::Approx(oracle::kMixP).epsilon(1e-12));
    REQUIRE(m.mixed.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(m.mixed[i] == doctest::Approx(oracle::kMixOut[i]).epsilon(1e-12));
}

TEST_CASE("orthogonal equal-energy inputs conserve energy") {
    Sample x1 = {0.8, 0.0, -0.6, 0.0, 0.4, 0.0};
    Sample x2 = {0.0, 0.8, 0.0, -0.6, 0.0, 0.4};
    ConditionSpec c1{"a", {0}};
    ConditionSpec c2{"b", {1}};
    MixResult m = mix(x1, x2, c1, c2);
    double e1 = 0.0, em = 0.0;
    for (double v : x1) e1 += v * v;
    for (double v : m.mixed) em += v * v;
    CHECK(std::abs(em - e1) <= 1e-10);
}

TEST_CASE("merged conditions concatenate in order") {
    Sample x = {1.0, 1.0};
    ConditionSpec c1{"left", {3, 1}};
    ConditionSpec c2{"right", {5, 7}};
    MixResult m = mix(x, x, c1, c2);
    CHECK(m.merged_condition.id == "left+right");
    CHECK(m.merged_condition.events == std::vector<int>{3, 1, 5, 7});
    CHECK_FALSE(m.truncated);
}

TEST_CASE("merged conditions are capped and flagged") {
    Sample x = {1.0, 1.0};
    ConditionSpec c1{"a", {0, 1, 2}};
    ConditionSpec c2{"b", {3, 4}};
    MixResult m = mix(x, x, c1, c2, 4);
    CHECK(m.merged_condition.events == std::vector<int>{0, 1, 2, 3});
    CHECK(m.truncated);
}

TEST_CASE("mix rejects mismatched lengths") {
    Sample x1 = {1.0, 2.0};
    Sample x2 = {1.0, 2.0, 3.0};
    ConditionSpec c{"a", {0}};
    CHECK_THROWS(mix(x1, x2, c, c));
}
