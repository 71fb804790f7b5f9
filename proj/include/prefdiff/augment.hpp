#pragma once

#include "prefdiff/toyworld.hpp"

namespace prefdiff {

// 20 log10(rms(x)). Throws NumericalError on an all-zero signal.
double pressure_level(const Sample& x);

struct MixResult {
    Sample mixed;
    double p = 0.0;
    ConditionSpec merged_condition;
    bool truncated = false;  // merged events exceeded max_events
};

// p = 1 / (1 + 10^((G1 - G2)/20)); mixed = (p x1 + (1-p) x2) / sqrt(p^2 + (1-p)^2).
// Merged condition is c1's events followed by c2's, capped at max_events.
MixResult mix(const Sample& x1, const Sample& x2, const ConditionSpec& c1, const ConditionSpec& c2,
              int max_events = 4);

}  // namespace prefdiff
