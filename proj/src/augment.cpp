#include "prefdiff/augment.hpp"

#include <cmath>

#include "prefdiff/errors.hpp"

namespace prefdiff {

double pressure_level(const Sample& x) {
    if (x.empty()) throw NumericalError("pressure level of an empty signal is undefined");
    double sum_sq = 0.0;
    for (double v : x) sum_sq += v * v;
    if (sum_sq == 0.0) throw NumericalError("pressure level of an all-zero signal is undefined");
    double rms = std::sqrt(sum_sq / x.size());
    return 20.0 * std::log10(rms);
}

MixResult mix(const Sample& x1, const Sample& x2, const ConditionSpec& c1, const ConditionSpec& c2,
              int max_events) {
    if (x1.size() != x2.size()) throw ShapeError("mix inputs must share a dimension");
    double g1 = pressure_level(x1);
    double g2 = pressure_level(x2);
    MixResult res;
    res.p = 1.0 / (1.0 + std::pow(10.0, (g1 - g2) / 20.0));
    double q = 1.0 - res.p;
    double denom = std::sqrt(res.p * res.p + q * q);
    res.mixed.resize(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i)
        res.mixed[i] = (res.p * x1[i] + q * x2[i]) / denom;
    res.merged_condition.id = c1.id + "+" + c2.id;
    res.merged_condition.events = c1.events;
    res.merged_condition.events.insert(res.merged_condition.events.end(), c2.events.begin(),
                                       c2.events.end());
    if (static_cast<int>(res.merged_condition.events.size()) > max_events) {
        res.merged_condition.events.resize(max_events);
        res.truncated = true;
    }
    return res;
}

}  // namespace prefdiff
