#include "prefdiff/preference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "prefdiff/errors.hpp"
#include "prefdiff/parallel.hpp"

namespace prefdiff {

using json = nlohmann::ordered_json;

void FilterThresholds::validate() const {
    if (!(delta1_lo < delta1_hi)) throw ConfigError("scorer-1 gap bounds must satisfy lo < hi");
    if (!(delta2_lo < delta2_hi)) throw ConfigError("scorer-2 gap bounds must satisfy lo < hi");
}

bool passes_filter(const PairScores& s, const FilterThresholds& th) {
    double d1 = s.w1 - s.l1;
    double d2 = s.w2 - s.l2;
    return s.w1 >= th.alpha1 && s.l1 >= th.beta1 && s.w1 > s.l1 && d1 >= th.delta1_lo &&
           d1 <= th.delta1_hi && s.w2 >= th.alpha2 && s.l2 >= th.beta2 && s.w2 > s.l2 &&
           d2 >= th.delta2_lo && d2 <= th.delta2_hi;
}

std::vector<PreferencePair> apply_filter(const std::vector<PreferencePair>& pairs,
                                         const FilterThresholds& th) {
    std::vector<PreferencePair> kept;
    for (const auto& p : pairs)
        if (passes_filter(p.scores, th)) kept.push_back(p);
    return kept;
}

int winner_index(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("winner_index of an empty list");
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

std::vector<PreferencePair> strategy1(const ConditionSpec& cond, const ToyWorld& world,
                                      const Denoiser& model, const NoiseSchedule& schedule,
                                      const GuidanceConfig& guidance, Strategy1Variant variant,
                                      const std::vector<int>& step_counts, std::uint64_t seed,
                                      ForwardCoeff coeff) {
    const int n_candidates = 4;
    if (variant == Strategy1Variant::kStepCounts &&
        static_cast<int>(step_counts.size()) != n_candidates)
        throw ConfigError("step-count variant needs exactly 4 step counts");

    std::vector<Sample> candidates(n_candidates);
    std::vector<double> s1(n_candidates), s2(n_candidates);
    for (int i = 0; i < n_candidates; ++i) {
        GuidanceConfig g = guidance;
        if (variant == Strategy1Variant::kStepCounts) g.n_inference_steps = step_counts[i];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        candidates[i] = sample(schedule, model, &cond, g, rng, coeff);
        s1[i] = world.score(1, cond, candidates[i]);
        s2[i] = world.score(2, cond, candidates[i]);
    }
    int w = winner_index(s1);
    std::string tag = variant == Strategy1Variant::kStepCounts ? "S1.1" : "S1.2";
    std::vector<PreferencePair> out;
    for (int j = 0; j < n_candidates; ++j) {
        if (j == w) continue;
        PreferencePair p;
        p.id = cond.id + ":" + tag + ":" + std::to_string(j);
        p.strategy = tag;
        p.condition = cond;
        p.winner = candidates[w];
        p.loser = candidates[j];
        p.scores = {s1[w], s1[j], s2[w], s2[j]};
        p.sibling_scores1 = s1;
        out.push_back(std::move(p));
    }
    return out;
}

std::optional<PreferencePair> strategy23(const ConditionSpec& cond, const ToyWorld& world,
                                         const Denoiser& model, const NoiseSchedule& schedule,
                                         const GuidanceConfig& guidance, PerturbKind kind,
                                         std::uint64_t seed, ForwardCoeff coeff) {
    ConditionSpec perturbed =
        kind == PerturbKind::kEvent
            ? perturb_events(cond, world.config().vocab_size, derive_seed(seed, "perturb"))
            : perturb_temporal(cond, derive_seed(seed, "perturb"));
    Rng rng_a(derive_seed(seed, std::uint64_t{0}));
    Rng rng_b(derive_seed(seed, std::uint64_t{1}));
    Sample x = sample(schedule, model, &cond, guidance, rng_a, coeff);
    Sample x_perturbed = sample(schedule, model, &perturbed, guidance, rng_b, coeff);

    // Both generations are scored against the original condition; the
    // perturbed condition only shaped the loser's generation.
    double w1 = world.score(1, cond, x);
    double l1 = world.score(1, cond, x_perturbed);
    if (!(w1 > l1)) return std::nullopt;
    PreferencePair p;
    p.strategy = kind == PerturbKind::kEvent ? "S2" : "S3";
    p.id = cond.id + ":" + p.strategy;
    p.condition = cond;
    p.winner = std::move(x);
    p.loser = std::move(x_perturbed);
    p.scores = {w1, l1, world.score(2, cond, p.winner), world.score(2, cond, p.loser)};
    return p;
}

StrategyStats compute_stats(const std::string& tag, const std::vector<PreferencePair>& pairs) {
    StrategyStats st;
    st.strategy = tag;
    double sw = 0.0, sl = 0.0;
    for (const auto& p : pairs) {
        if (tag != "overall" && p.strategy != tag) continue;
        ++st.n;
        sw += p.scores.w1;
        sl += p.scores.l1;
    }
    if (st.n > 0) {
        st.avg_winner = sw / st.n;
        st.avg_loser = sl / st.n;
        st.avg_delta = st.avg_winner - st.avg_loser;
    }
    return st;
}

DatasetReport make_report(const std::vector<PreferencePair>& pairs, int candidates_total,
                          const FilterThresholds& th) {
    DatasetReport report;
    for (const char* tag : {"S1.1", "S1.2", "S2", "S3"})
        report.per_strategy.push_back(compute_stats(tag, pairs));
    report.overall = compute_stats("overall", pairs);
    report.candidates_total = candidates_total;
    report.thresholds_used = th;
    return report;
}

static json stats_to_json(const StrategyStats& st) {
    json j;
    j["strategy"] = st.strategy;
    j["n"] = st.n;
    j["avg_winner"] = st.avg_winner;
    j["avg_loser"] = st.avg_loser;
    j["avg_delta"] = st.avg_delta;
    return j;
}

std::string report_to_json(const DatasetReport& report) {
    json j;
    j["per_strategy"] = json::array();
    for (const auto& st : report.per_strategy) j["per_strategy"].push_back(stats_to_json(st));
    j["overall"] = stats_to_json(report.overall);
    j["candidates_total"] = report.candidates_total;
    const FilterThresholds& t = report.thresholds_used;
    j["thresholds"] = {{"alpha1", t.alpha1},       {"beta1", t.beta1},
                       {"delta1_lo", t.delta1_lo}, {"delta1_hi", t.delta1_hi},
                       {"alpha2", t.alpha2},       {"beta2", t.beta2},
                       {"delta2_lo", t.delta2_lo}, {"delta2_hi", t.delta2_hi}};
    return j.dump(2);
}

static double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile of an empty candidate pool");
    std::sort(values.begin(), values.end());
    double pos = q * (values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

FilterThresholds calibrate_thresholds(const std::vector<PreferencePair>& candidates,
                                      const QuantileSpec& q) {
    if (candidates.empty()) throw ConfigError("cannot calibrate thresholds on an empty pool");
    std::vector<double> w1, l1, d1, w2, l2, d2;
    for (const auto& p : candidates) {
        w1.push_back(p.scores.w1);
        l1.push_back(p.scores.l1);
        d1.push_back(p.scores.w1 - p.scores.l1);
        w2.push_back(p.scores.w2);
        l2.push_back(p.scores.l2);
        d2.push_back(p.scores.w2 - p.scores.l2);
    }
    FilterThresholds th;
    th.alpha1 = quantile(w1, q.q_alpha);
    th.beta1 = quantile(l1, q.q_beta);
    th.delta1_lo = quantile(d1, q.q_delta_lo);
    th.delta1_hi = quantile(d1, q.q_delta_hi);
    th.alpha2 = quantile(w2, q.q_alpha);
    th.beta2 = quantile(l2, q.q_beta);
    th.delta2_lo = quantile(d2, q.q_delta_lo);
    th.delta2_hi = quantile(d2, q.q_delta_hi);
    th.validate();
    return th;
}

static bool temporal_eligible(const ConditionSpec& cond) {
    if (cond.events.size() < 2) return false;
    for (std::size_t i = 1; i < cond.events.size(); ++i)
        if (cond.events[i] != cond.events.front()) return true;
    return false;
}

BuildResult build_dataset(const std::vector<ConditionSpec>& conditions, const ToyWorld& world,
                          const Denoiser& model, const NoiseSchedule& schedule,
                          const GuidanceConfig& guidance, const PrefsBuildConfig& cfg,
                          std::uint64_t seed, const std::string& out_path, ForwardCoeff coeff) {
    int n = static_cast<int>(conditions.size());
    std::vector<std::vector<PreferencePair>> per_condition(n);
    parallel_for(n, cfg.workers, [&](int i) {
        const ConditionSpec& cond = conditions[i];
        std::uint64_t cseed = derive_seed(seed, static_cast<std::uint64_t>(i));
        std::vector<PreferencePair>& out = per_condition[i];
        auto s11 = strategy1(cond, world, model, schedule, guidance, Strategy1Variant::kStepCounts,
                             cfg.s11_steps, derive_seed(cseed, "s11"), coeff);
        out.insert(out.end(), s11.begin(), s11.end());
        auto s12 = strategy1(cond, world, model, schedule, guidance, Strategy1Variant::kSeeds,
                             cfg.s11_steps, derive_seed(cseed, "s12"), coeff);
        out.insert(out.end(), s12.begin(), s12.end());
        if (auto p = strategy23(cond, world, model, schedule, guidance, PerturbKind::kEvent,
                                derive_seed(cseed, "s2"), coeff))
            out.push_back(std::move(*p));
        // Order perturbation needs two distinct events; thinner conditions
        // are already covered by the event perturbation above.
        if (temporal_eligible(cond))
            if (auto p = strategy23(cond, world, model, schedule, guidance, PerturbKind::kTemporal,
                                    derive_seed(cseed, "s3"), coeff))
                out.push_back(std::move(*p));
    });

    std::vector<PreferencePair> candidates;
    for (auto& group : per_condition)
        for (auto& p : group) candidates.push_back(std::move(p));

    FilterThresholds th = cfg.calibrate ? calibrate_thresholds(candidates, cfg.quantiles)
                                        : cfg.thresholds;
    th.validate();

    BuildResult result;
    result.pairs = apply_filter(candidates, th);
    result.report = make_report(result.pairs, static_cast<int>(candidates.size()), th);
    if (!out_path.empty()) write_pairs_jsonl(out_path, result.pairs);
    return result;
}

std::string pair_to_jsonl(const PreferencePair& pair) {
    json j;
    j["id"] = pair.id;
    j["strategy"] = pair.strategy;
    j["condition"] = {{"id", pair.condition.id}, {"events", pair.condition.events}};
    j["winner"] = pair.winner;
    j["loser"] = pair.loser;
    j["scores"] = {{"w1", pair.scores.w1},
                   {"l1", pair.scores.l1},
                   {"w2", pair.scores.w2},
                   {"l2", pair.scores.l2}};
    if (!pair.sibling_scores1.empty()) j["debug"] = {{"sibling_scores1", pair.sibling_scores1}};
    return j.dump();
}

PreferencePair pair_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    PreferencePair p;
    p.id = j.at("id").get<std::string>();
    p.strategy = j.at("strategy").get<std::string>();
    p.condition.id = j.at("condition").at("id").get<std::string>();
    p.condition.events = j.at("condition").at("events").get<std::vector<int>>();
    p.winner = j.at("winner").get<Sample>();
    p.loser = j.at("loser").get<Sample>();
    const auto& s = j.at("scores");
    p.scores = {s.at("w1").get<double>(), s.at("l1").get<double>(), s.at("w2").get<double>(),
                s.at("l2").get<double>()};
    if (j.contains("debug") && j["debug"].contains("sibling_scores1"))
        p.sibling_scores1 = j["debug"]["sibling_scores1"].get<std::vector<double>>();
    return p;
}

void write_pairs_jsonl(const std::string& path, const std::vector<PreferencePair>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& p : pairs) out << pair_to_jsonl(p) << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::vector<PreferencePair> read_pairs_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<PreferencePair> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        pairs.push_back(pair_from_jsonl(line));
    }
    return pairs;
}

}  // namespace prefdiff
