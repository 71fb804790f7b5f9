#include "prefdiff/toyworld.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "prefdiff/errors.hpp"
#include "prefdiff/vecops.hpp"

namespace prefdiff {

using json = nlohmann::ordered_json;

std::string condition_to_json(const ConditionSpec& cond) {
    json j;
    j["id"] = cond.id;
    j["events"] = cond.events;
    return j.dump();
}

ConditionSpec condition_from_json(const std::string& text) {
    json j = json::parse(text);
    ConditionSpec cond;
    cond.id = j.at("id").get<std::string>();
    cond.events = j.at("events").get<std::vector<int>>();
    if (cond.events.empty()) throw ConfigError("condition has no events: " + cond.id);
    return cond;
}

CondFeaturizer::CondFeaturizer(std::uint64_t seed, int embed_dim, int vocab_size, int n_slots)
    : embed_dim_(embed_dim), vocab_size_(vocab_size), n_slots_(n_slots) {
    Rng rng(seed);
    event_emb_.assign(static_cast<std::size_t>(embed_dim) * vocab_size, 0.0);
    for (int k = 0; k < vocab_size; ++k) {
        std::vector<double> col = rng.normal_vector(embed_dim);
        double nrm = vec::norm(col);
        for (int r = 0; r < embed_dim; ++r) event_emb_[static_cast<std::size_t>(r) * vocab_size + k] = col[r] / nrm;
    }
    double scale = embed_dim > 0 ? 1.0 / std::sqrt(static_cast<double>(embed_dim)) : 0.0;
    position_maps_.resize(static_cast<std::size_t>(n_slots) * embed_dim * embed_dim);
    for (auto& v : position_maps_) v = rng.next_normal() * scale;
}

std::vector<double> CondFeaturizer::embed(const ConditionSpec& cond) const {
    if (cond.events.empty()) throw ConfigError("empty condition: " + cond.id);
    if (static_cast<int>(cond.events.size()) > n_slots_)
        throw ConfigError("condition exceeds slot count: " + cond.id);
    std::vector<double> out(embed_dim_, 0.0);
    for (std::size_t i = 0; i < cond.events.size(); ++i) {
        int ev = cond.events[i];
        if (ev < 0 || ev >= vocab_size_) throw ConfigError("event id out of vocabulary: " + cond.id);
        const double* p = position_maps_.data() + i * static_cast<std::size_t>(embed_dim_) * embed_dim_;
        for (int r = 0; r < embed_dim_; ++r) {
            double acc = 0.0;
            for (int c = 0; c < embed_dim_; ++c)
                acc += p[static_cast<std::size_t>(r) * embed_dim_ + c] *
                       event_emb_[static_cast<std::size_t>(c) * vocab_size_ + ev];
            out[r] += acc;
        }
    }
    return out;
}

AlignmentScorer::AlignmentScorer(std::uint64_t seed, const WorldConfig& cfg,
                                 const std::vector<double>& template_pinv)
    : cfg_(cfg), slot_len_(cfg.sample_dim / cfg.n_slots) {
    cond_embedder_ = CondFeaturizer(derive_seed(seed, "embed"), cfg.embed_dim, cfg.vocab_size,
                                    cfg.n_slots);

    // Slot map i sends raw slot content to template coefficients (via the
    // pseudo-inverse), then through the same event embedding + position map
    // the condition side uses. A faithful rendering of [e_0, e_1, ...] thus
    // projects onto the condition's own embedding.
    const int E = cfg.embed_dim;
    const int K = cfg.vocab_size;
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> U(cond_embedder_.event_embeddings().data(), E, K);
    Eigen::Map<const Mat> pinv(template_pinv.data(), K, slot_len_);
    slot_maps_.resize(static_cast<std::size_t>(cfg.n_slots) * E * slot_len_);
    for (int i = 0; i < cfg.n_slots; ++i) {
        Eigen::Map<const Mat> P(cond_embedder_.position_maps().data() +
                                    static_cast<std::size_t>(i) * E * E,
                                E, E);
        Eigen::Map<Mat> M(slot_maps_.data() + static_cast<std::size_t>(i) * E * slot_len_, E,
                          slot_len_);
        M = P * U * pinv;
    }

    Rng noise_rng(derive_seed(seed, "noise"));
    double scale = 1.0 / std::sqrt(static_cast<double>(cfg.sample_dim));
    noise_proj_.resize(static_cast<std::size_t>(E) * cfg.sample_dim);
    for (auto& v : noise_proj_) v = noise_rng.next_normal() * scale;
}

std::vector<double> AlignmentScorer::embed_condition(const ConditionSpec& cond) const {
    return cond_embedder_.embed(cond);
}

std::vector<double> AlignmentScorer::embed_sample(const Sample& x) const {
    if (static_cast<int>(x.size()) != cfg_.sample_dim)
        throw ShapeError("sample dimension mismatch in scorer");
    const int E = cfg_.embed_dim;
    std::vector<double> out(E, 0.0);
    for (int i = 0; i < cfg_.n_slots; ++i) {
        const double* M = slot_maps_.data() + static_cast<std::size_t>(i) * E * slot_len_;
        const double* xs = x.data() + static_cast<std::size_t>(i) * slot_len_;
        for (int r = 0; r < E; ++r) {
            double acc = 0.0;
            for (int c = 0; c < slot_len_; ++c) acc += M[static_cast<std::size_t>(r) * slot_len_ + c] * xs[c];
            out[r] += acc;
        }
    }
    for (int r = 0; r < E; ++r) {
        double acc = 0.0;
        for (int c = 0; c < cfg_.sample_dim; ++c)
            acc += noise_proj_[static_cast<std::size_t>(r) * cfg_.sample_dim + c] * x[c];
        out[r] += cfg_.scorer_noise * acc;
    }
    return out;
}

double AlignmentScorer::score(const ConditionSpec& cond, const Sample& x) const {
    std::vector<double> ec = embed_condition(cond);
    std::vector<double> es = embed_sample(x);
    double nc = vec::norm(ec);
    double ns = vec::norm(es);
    if (nc == 0.0 || ns == 0.0)
        throw NumericalError("zero-norm embedding while scoring condition " + cond.id);
    double cosine = vec::dot(ec, es) / (nc * ns);
    return std::clamp(cosine, -1.0, 1.0);
}

ToyWorld::ToyWorld(const WorldConfig& cfg) : cfg_(cfg) {
    if (cfg.n_slots < 1 || cfg.sample_dim % cfg.n_slots != 0)
        throw ConfigError("sample_dim must be a positive multiple of n_slots");
    slot_len_ = cfg.sample_dim / cfg.n_slots;
    if (cfg.vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (cfg.vocab_size > slot_len_)
        throw ConfigError("vocab_size must not exceed slot length (templates must stay independent)");
    if (cfg.embed_dim < 1) throw ConfigError("embed_dim must be >= 1");

    Rng trng(derive_seed(cfg.seed, "templates"));
    templates_.resize(static_cast<std::size_t>(cfg.vocab_size) * slot_len_);
    for (int k = 0; k < cfg.vocab_size; ++k) {
        std::vector<double> row = trng.normal_vector(slot_len_);
        double nrm = vec::norm(row);
        for (int c = 0; c < slot_len_; ++c)
            templates_[static_cast<std::size_t>(k) * slot_len_ + c] = row[c] / nrm;
    }

    // Left pseudo-inverse of the template basis (columns = templates).
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Mat T(slot_len_, cfg.vocab_size);
    for (int k = 0; k < cfg.vocab_size; ++k)
        for (int c = 0; c < slot_len_; ++c)
            T(c, k) = templates_[static_cast<std::size_t>(k) * slot_len_ + c];
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(T);
    if (cod.rank() < cfg.vocab_size)
        throw NumericalError("event templates are not linearly independent; change the world seed");
    Mat pinv = cod.pseudoInverse();
    template_pinv_.assign(pinv.data(), pinv.data() + pinv.size());

    scorer1_ = AlignmentScorer(derive_seed(cfg.seed, "scorer1"), cfg_, template_pinv_);
    scorer2_ = AlignmentScorer(derive_seed(cfg.seed, "scorer2"), cfg_, template_pinv_);
}

Sample ToyWorld::synthesize_ground_truth(const ConditionSpec& cond, double noise_scale,
                                         std::uint64_t rng_seed) const {
    if (cond.events.empty()) throw ConfigError("empty condition: " + cond.id);
    if (static_cast<int>(cond.events.size()) > cfg_.n_slots)
        throw ConfigError("condition exceeds slot count: " + cond.id);
    Sample out(cfg_.sample_dim, 0.0);
    for (std::size_t i = 0; i < cond.events.size(); ++i) {
        int ev = cond.events[i];
        if (ev < 0 || ev >= cfg_.vocab_size)
            throw ConfigError("event id out of vocabulary: " + cond.id);
        const double* tpl = templates_.data() + static_cast<std::size_t>(ev) * slot_len_;
        for (int c = 0; c < slot_len_; ++c) out[i * slot_len_ + c] += tpl[c];
    }
    if (noise_scale != 0.0) {
        Rng rng(rng_seed);
        for (auto& v : out) v += noise_scale * rng.next_normal();
    }
    return out;
}

const AlignmentScorer& ToyWorld::scorer(int scorer_id) const {
    if (scorer_id == 1) return scorer1_;
    if (scorer_id == 2) return scorer2_;
    throw ConfigError("scorer_id must be 1 or 2");
}

double ToyWorld::score(int scorer_id, const ConditionSpec& cond, const Sample& x) const {
    return scorer(scorer_id).score(cond, x);
}

std::vector<int> ToyWorld::decode_events(const Sample& x) const {
    if (static_cast<int>(x.size()) != cfg_.sample_dim)
        throw ShapeError("sample dimension mismatch in decoder");
    std::vector<int> events;
    for (int i = 0; i < cfg_.n_slots; ++i) {
        std::span<const double> slot(x.data() + static_cast<std::size_t>(i) * slot_len_,
                                     static_cast<std::size_t>(slot_len_));
        int best = -1;  // -1 = silence
        double best_dist = vec::dot(slot, slot);
        for (int k = 0; k < cfg_.vocab_size; ++k) {
            std::span<const double> tpl(templates_.data() + static_cast<std::size_t>(k) * slot_len_,
                                        static_cast<std::size_t>(slot_len_));
            double d = vec::squared_distance(slot, tpl);
            if (d < best_dist) {
                best_dist = d;
                best = k;
            }
        }
        if (best >= 0) events.push_back(best);
    }
    return events;
}

std::uint64_t ToyWorld::featurizer_seed() const { return derive_seed(cfg_.seed, "cond-features"); }

ConditionSpec ToyWorld::random_condition(Rng& rng, int min_len, int max_len) const {
    max_len = std::min(max_len, std::min(cfg_.n_slots, cfg_.vocab_size));
    min_len = std::min(min_len, max_len);
    int len = min_len + rng.next_int(max_len - min_len + 1);
    // Partial Fisher-Yates over the vocabulary: distinct events.
    std::vector<int> ids(cfg_.vocab_size);
    for (int k = 0; k < cfg_.vocab_size; ++k) ids[k] = k;
    ConditionSpec cond;
    for (int i = 0; i < len; ++i) {
        int j = i + rng.next_int(cfg_.vocab_size - i);
        std::swap(ids[i], ids[j]);
        cond.events.push_back(ids[i]);
    }
    return cond;
}

std::vector<ConditionSpec> ToyWorld::condition_pool(int n, std::uint64_t seed,
                                                    const std::string& id_prefix, int min_len,
                                                    int max_len) const {
    Rng rng(seed);
    std::vector<ConditionSpec> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i) {
        ConditionSpec cond = random_condition(rng, min_len, max_len);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%05d", i);
        cond.id = id_prefix + buf;
        pool.push_back(std::move(cond));
    }
    return pool;
}

ConditionSpec perturb_events(const ConditionSpec& cond, int vocab_size, std::uint64_t rng_seed) {
    if (vocab_size < 2) throw ConfigError("perturb_events needs a vocabulary of at least 2");
    if (cond.events.empty()) throw ConfigError("empty condition: " + cond.id);
    Rng rng(rng_seed);
    ConditionSpec out = cond;
    int pos = rng.next_int(static_cast<int>(cond.events.size()));
    int old = cond.events[pos];
    int repl = rng.next_int(vocab_size - 1);
    if (repl >= old) ++repl;
    out.events[pos] = repl;
    return out;
}

ConditionSpec perturb_temporal(const ConditionSpec& cond, std::uint64_t rng_seed) {
    if (cond.events.size() < 2)
        throw ConfigError("temporal perturbation needs >= 2 events (route condition " + cond.id +
                          " to event perturbation instead)");
    bool all_equal = std::all_of(cond.events.begin(), cond.events.end(),
                                 [&](int e) { return e == cond.events.front(); });
    if (all_equal)
        throw ConfigError("temporal perturbation needs >= 2 distinct events (condition " +
                          cond.id + ")");
    Rng rng(rng_seed);
    ConditionSpec out = cond;
    do {
        out.events = cond.events;
        rng.shuffle(out.events);
    } while (out.events == cond.events);
    return out;
}

}  // namespace prefdiff
