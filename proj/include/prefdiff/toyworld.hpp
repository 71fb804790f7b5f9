#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefdiff/rng.hpp"

namespace prefdiff {

// The toy analogue of the audio prior: a flat real vector of dimension D.
using Sample = std::vector<double>;

// An ordered list of event ids; the stand-in for a text prompt. Order is
// temporal: event i occupies slot i of the signal.
struct ConditionSpec {
    std::string id;
    std::vector<int> events;

    bool operator==(const ConditionSpec&) const = default;
};

std::string condition_to_json(const ConditionSpec& cond);
ConditionSpec condition_from_json(const std::string& text);

struct WorldConfig {
    int vocab_size = 8;   // K
    int sample_dim = 32;  // D
    int embed_dim = 16;   // E
    int n_slots = 4;
    double scorer_noise = 0.25;  // off-structure leakage in the sample projection
    std::uint64_t seed = 1;
};

// Fixed random map from conditions into R^E. Order-sensitive: each slot
// position applies its own mixing matrix, so [a,b] and [b,a] embed
// differently.
class CondFeaturizer {
  public:
    CondFeaturizer() = default;
    CondFeaturizer(std::uint64_t seed, int embed_dim, int vocab_size, int n_slots);

    std::vector<double> embed(const ConditionSpec& cond) const;
    int embed_dim() const { return embed_dim_; }
    int vocab_size() const { return vocab_size_; }
    int n_slots() const { return n_slots_; }

    // Per-event unit embeddings (E x K, row-major) and per-slot mixing
    // matrices (n_slots blocks of E x E). Exposed for the scorer build.
    const std::vector<double>& event_embeddings() const { return event_emb_; }
    const std::vector<double>& position_maps() const { return position_maps_; }

  private:
    int embed_dim_ = 0;
    int vocab_size_ = 0;
    int n_slots_ = 0;
    std::vector<double> event_emb_;
    std::vector<double> position_maps_;
};

// One half of the scorer pair. Projects conditions and samples into a shared
// E-dimensional space; score() is the cosine similarity of the two
// projections. The sample-side projection decodes slot contents back onto
// template coefficients, so a sample that renders its condition faithfully
// lands near the condition's own embedding; a seeded noise term keeps the
// scorer imperfect.
class AlignmentScorer {
  public:
    AlignmentScorer() = default;
    AlignmentScorer(std::uint64_t seed, const WorldConfig& cfg,
                    const std::vector<double>& template_pinv);

    std::vector<double> embed_condition(const ConditionSpec& cond) const;
    std::vector<double> embed_sample(const Sample& x) const;

    // Cosine similarity in [-1, 1]. Throws NumericalError on a zero-norm
    // embedding.
    double score(const ConditionSpec& cond, const Sample& x) const;

  private:
    WorldConfig cfg_;
    int slot_len_ = 0;
    CondFeaturizer cond_embedder_;
    std::vector<double> slot_maps_;   // n_slots blocks of E x slot_len
    std::vector<double> noise_proj_;  // E x D
};

// The synthetic generation task: event templates, ground-truth synthesis,
// a fixed scorer pair, and the condition featurizer seed used by the
// denoiser. All state is immutable after construction.
class ToyWorld {
  public:
    explicit ToyWorld(const WorldConfig& cfg);

    const WorldConfig& config() const { return cfg_; }
    int slot_len() const { return slot_len_; }

    // Template for event `k` placed in time slot `slot`, summed over events,
    // plus Gaussian noise of scale noise_scale.
    Sample synthesize_ground_truth(const ConditionSpec& cond, double noise_scale,
                                   std::uint64_t rng_seed) const;

    // scorer_id is 1 or 2.
    double score(int scorer_id, const ConditionSpec& cond, const Sample& x) const;
    const AlignmentScorer& scorer(int scorer_id) const;

    // Nearest-template readout of each slot ("silence" when the zero vector
    // is closer than any template). Returns the non-silent events in slot
    // order.
    std::vector<int> decode_events(const Sample& x) const;

    // Seed for the denoiser's condition featurizer; distinct from both
    // scorer streams.
    std::uint64_t featurizer_seed() const;

    const std::vector<double>& templates() const { return templates_; }

    // Random condition of 1..max_len distinct events.
    ConditionSpec random_condition(Rng& rng, int min_len = 1, int max_len = 4) const;
    std::vector<ConditionSpec> condition_pool(int n, std::uint64_t seed,
                                              const std::string& id_prefix, int min_len = 1,
                                              int max_len = 4) const;

  private:
    WorldConfig cfg_;
    int slot_len_ = 0;
    std::vector<double> templates_;      // K x slot_len, unit rows
    std::vector<double> template_pinv_;  // K x slot_len pseudo-inverse of the template basis
    AlignmentScorer scorer1_;
    AlignmentScorer scorer2_;
};

// Replaces exactly one event id with a uniformly chosen different id.
// Order preserved; result always differs from the input.
ConditionSpec perturb_events(const ConditionSpec& cond, int vocab_size, std::uint64_t rng_seed);

// A non-identity permutation of the event order; the event multiset is
// unchanged. Requires at least two distinct events (single-event or
// all-identical conditions must be routed to perturb_events instead).
ConditionSpec perturb_temporal(const ConditionSpec& cond, std::uint64_t rng_seed);

}  // namespace prefdiff
