#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefdiff/diffusion.hpp"
#include "prefdiff/toyworld.hpp"

namespace prefdiff {

struct PairScores {
    double w1 = 0.0, l1 = 0.0, w2 = 0.0, l2 = 0.0;
};

struct PreferencePair {
    std::string id;
    std::string strategy;  // "S1.1", "S1.2", "S2", "S3"
    ConditionSpec condition;
    Sample winner;
    Sample loser;
    PairScores scores;
    std::vector<double> sibling_scores1;  // scorer-1 scores of all 4 candidates (S1 only)
};

struct FilterThresholds {
    double alpha1 = 0.45, beta1 = 0.40, delta1_lo = 0.05, delta1_hi = 0.35;
    double alpha2 = 0.60, beta2 = 0.0, delta2_lo = 0.08, delta2_hi = 0.70;

    void validate() const;  // delta_lo < delta_hi per scorer
};

// Keep iff for each scorer i: w_i >= alpha_i, l_i >= beta_i, w_i > l_i, and
// delta_lo_i <= w_i - l_i <= delta_hi_i.
bool passes_filter(const PairScores& scores, const FilterThresholds& th);
std::vector<PreferencePair> apply_filter(const std::vector<PreferencePair>& pairs,
                                         const FilterThresholds& th);

// Argmax with ties broken toward the lowest index.
int winner_index(const std::vector<double>& scores);

enum class Strategy1Variant { kStepCounts, kSeeds };  // "S1.1" / "S1.2"

// Four generations per condition; winner by scorer 1; three winner-vs-loser
// candidate pairs. kStepCounts varies the inference step count per
// candidate, kSeeds varies only the noise stream.
std::vector<PreferencePair> strategy1(const ConditionSpec& cond, const ToyWorld& world,
                                      const Denoiser& model, const NoiseSchedule& schedule,
                                      const GuidanceConfig& guidance, Strategy1Variant variant,
                                      const std::vector<int>& step_counts, std::uint64_t seed,
                                      ForwardCoeff coeff);

enum class PerturbKind { kEvent, kTemporal };  // "S2" / "S3"

// One generation from the condition and one from a perturbed condition, both
// scored against the original condition; emits a pair only when the faithful
// generation wins strictly under scorer 1.
std::optional<PreferencePair> strategy23(const ConditionSpec& cond, const ToyWorld& world,
                                         const Denoiser& model, const NoiseSchedule& schedule,
                                         const GuidanceConfig& guidance, PerturbKind kind,
                                         std::uint64_t seed, ForwardCoeff coeff);

struct StrategyStats {
    std::string strategy;
    int n = 0;
    double avg_winner = 0.0, avg_loser = 0.0, avg_delta = 0.0;
};

struct DatasetReport {
    std::vector<StrategyStats> per_strategy;  // fixed order S1.1, S1.2, S2, S3
    StrategyStats overall;                    // strategy = "overall"
    int candidates_total = 0;
    FilterThresholds thresholds_used;
};

StrategyStats compute_stats(const std::string& tag, const std::vector<PreferencePair>& pairs);
DatasetReport make_report(const std::vector<PreferencePair>& pairs, int candidates_total,
                          const FilterThresholds& th);
std::string report_to_json(const DatasetReport& report);

// Quantiles of the candidate pool's winner, loser, and gap distributions,
// applied per scorer. Produces thresholds with the same shape as the fixed
// defaults but matched to the pool at hand.
struct QuantileSpec {
    double q_alpha = 0.25;     // winner floor
    double q_beta = 0.10;      // loser floor
    double q_delta_lo = 0.10;  // gap floor
    double q_delta_hi = 0.95;  // gap ceiling
};

FilterThresholds calibrate_thresholds(const std::vector<PreferencePair>& candidates,
                                      const QuantileSpec& q);

struct PrefsBuildConfig {
    std::vector<int> s11_steps = {5, 10, 25, 50};
    FilterThresholds thresholds;      // used when calibrate == false
    bool calibrate = true;            // quantile-matched thresholds from the candidate pool
    QuantileSpec quantiles;
    int workers = 1;
};

struct BuildResult {
    std::vector<PreferencePair> pairs;  // filtered
    DatasetReport report;
};

// Runs all four strategies over the condition list, filters, and (when
// out_path is non-empty) writes the JSONL dataset.
BuildResult build_dataset(const std::vector<ConditionSpec>& conditions, const ToyWorld& world,
                          const Denoiser& model, const NoiseSchedule& schedule,
                          const GuidanceConfig& guidance, const PrefsBuildConfig& cfg,
                          std::uint64_t seed, const std::string& out_path, ForwardCoeff coeff);

std::string pair_to_jsonl(const PreferencePair& pair);
PreferencePair pair_from_jsonl(const std::string& line);
void write_pairs_jsonl(const std::string& path, const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> read_pairs_jsonl(const std::string& path);

}  // namespace prefdiff
