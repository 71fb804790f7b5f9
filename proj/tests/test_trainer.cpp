#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "prefdiff/errors.hpp"
#include "prefdiff/rng.hpp"
#include "prefdiff/schedule.hpp"
#include "prefdiff/toyworld.hpp"
#include "prefdiff/trainer.hpp"

#include "oracle_values.hpp"

using namespace prefdiff;

namespace {

DenoiserArch tiny_arch() {
    DenoiserArch arch;
    arch.sample_dim = 6;
    arch.hidden = {8};
    arch.time_embed_dim = 4;
    arch.cond_embed_dim = 4;
    arch.vocab_size = 3;
    arch.n_slots = 2;
    arch.cond_seed = 5;
    return arch;
}

std::vector<LabeledSample> tiny_data(int n, int sample_dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledSample> data;
    for (int i = 0; i < n; ++i) {
        ConditionSpec cond{"d" + std::to_string(i), {static_cast<int>(rng.next_int(3))}};
        data.emplace_back(cond, rng.normal_vector(sample_dim));
    }
    return data;
}

std::vector<PreferencePair> tiny_pairs(int n, int sample_dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PreferencePair> pairs;
    for (int i = 0; i < n; ++i) {
        PreferencePair p;
        p.id = "p" + std::to_string(i);
        p.strategy = "S2";
        p.condition = ConditionSpec{"c" + std::to_string(i),
                                    {static_cast<int>(rng.next_int(3)), static_cast<int>(rng.next_int(3))}};
        p.winner = rng.normal_vector(sample_dim);
        p.loser = rng.normal_vector(sample_dim);
        pairs.push_back(p);
    }
    return pairs;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("the optimizer reproduces two externally computed update steps") {
    std::vector<double> params = {1.0, -2.0, 0.5};
    AdamState state;
    state.m.assign(3, 0.0);
    state.v.assign(3, 0.0);
    AdamParams opt;
    opt.weight_decay = 0.01;

    adamw_step(params, state, {0.1, -0.2, 0.3}, 0.01, opt);
    for (int i = 0; i < 3; ++i)
        CHECK(params[i] == doctest::Approx(oracle::kAdamStep1[i]).epsilon(1e-12));
    CHECK(state.t == 1);

    adamw_step(params, state, {0.05, 0.05, -0.1}, 0.01, opt);
    for (int i = 0; i < 3; ++i)
        CHECK(params[i] == doctest::Approx(oracle::kAdamStep2[i]).epsilon(1e-12));
    CHECK(state.t == 2);
}

TEST_CASE("the optimizer rejects shape mismatches and zero lr is a no-op on zero decay") {
    std::vector<double> params = {1.0, 2.0};
    AdamState state;
    state.m.assign(2, 0.0);
    state.v.assign(2, 0.0);
    CHECK_THROWS_AS(adamw_step(params, state, {0.1}, 0.01, AdamParams{}), ShapeError);

    std::vector<double> before = params;
    adamw_step(params, state, {0.3, -0.7}, 0.0, AdamParams{});
    CHECK(params == before);
    CHECK(state.t == 1);
}

TEST_CASE("gradient accumulation splits reproduce the full-batch update bitwise") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::vector<LabeledSample> data = tiny_data(16, arch.sample_dim, 21);

    TrainConfig base;
    base.epochs = 2;
    base.lr = 5e-3;
    base.seed = 31;
    base.cond_dropout = 0.2;
    base.augment_prob = 0.5;

    TrainConfig whole = base;
    whole.batch_size = 8;
    whole.grad_accum = 1;
    TrainConfig split = base;
    split.batch_size = 2;
    split.grad_accum = 4;

    TrainOutcome a = train_reference(whole, arch, data, schedule);
    TrainOutcome b = train_reference(split, arch, data, schedule);
    CHECK(a.step_count == b.step_count);
    REQUIRE(a.model.params().size() == b.model.params().size());
    for (std::size_t i = 0; i < a.model.params().size(); ++i)
        CHECK(a.model.params()[i] == b.model.params()[i]);
    CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("zero epochs return the seeded initialization untouched") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 99;

    TrainOutcome out = train_reference(cfg, arch, tiny_data(4, arch.sample_dim, 1), schedule);
    Denoiser fresh = Denoiser::init_random(arch, derive_seed(cfg.seed, "init"));
    CHECK(out.step_count == 0);
    CHECK(out.model.params() == fresh.params());
}

TEST_CASE("zero learning rate leaves parameters fixed through a full run") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 0.0;
    cfg.seed = 12;
    TrainOutcome out = train_reference(cfg, arch, tiny_data(8, arch.sample_dim, 2), schedule);
    Denoiser fresh = Denoiser::init_random(arch, derive_seed(cfg.seed, "init"));
    CHECK(out.step_count > 0);
    CHECK(out.model.params() == fresh.params());
}

TEST_CASE("pretraining is reproducible and seed-sensitive") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::vector<LabeledSample> data = tiny_data(8, arch.sample_dim, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.grad_accum = 1;
    cfg.seed = 7;

    TrainOutcome a = train_reference(cfg, arch, data, schedule);
    TrainOutcome b = train_reference(cfg, arch, data, schedule);
    CHECK(a.model.params() == b.model.params());
    CHECK(a.first_loss == b.first_loss);

    cfg.seed = 8;
    TrainOutcome c = train_reference(cfg, arch, data, schedule);
    CHECK(a.model.params() != c.model.params());
}

TEST_CASE("pretraining lowers the noise-prediction loss on a learnable task") {
    DenoiserArch arch = tiny_arch();
    arch.hidden = {24};
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::vector<LabeledSample> data = tiny_data(32, arch.sample_dim, 4);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.lr = 3e-3;
    cfg.batch_size = 8;
    cfg.grad_accum = 1;
    cfg.seed = 5;
    cfg.augment_prob = 0.0;
    cfg.cond_dropout = 0.1;
    TrainOutcome out = train_reference(cfg, arch, data, schedule);
    CHECK(out.final_loss < out.first_loss);
}

TEST_CASE("training validates its inputs") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    TrainConfig cfg;

    CHECK_THROWS_AS(train_reference(cfg, arch, {}, schedule), ConfigError);

    std::vector<LabeledSample> bad = tiny_data(2, arch.sample_dim + 1, 1);
    CHECK_THROWS_AS(train_reference(cfg, arch, bad, schedule), ShapeError);

    TrainConfig negative = cfg;
    negative.epochs = -1;
    CHECK_THROWS_AS(train_reference(negative, arch, tiny_data(2, arch.sample_dim, 1), schedule),
                    ConfigError);
    TrainConfig zero_batch = cfg;
    zero_batch.batch_size = 0;
    CHECK_THROWS_AS(train_reference(zero_batch, arch, tiny_data(2, arch.sample_dim, 1), schedule),
                    ConfigError);

    CHECK_THROWS_AS(train_sft(cfg, {}, schedule, Denoiser::init_random(arch, 1)), ConfigError);
    CHECK_THROWS_AS(
        train_dpo(cfg, {}, schedule, Denoiser::init_random(arch, 1), Denoiser::init_random(arch, 1)),
        ConfigError);

    DenoiserArch other = arch;
    other.hidden = {12};
    CHECK_THROWS_AS(train_dpo(cfg, tiny_pairs(2, arch.sample_dim, 1), schedule,
                              Denoiser::init_random(arch, 1), Denoiser::init_random(other, 1)),
                    ConfigError);
}

TEST_CASE("supervised fine-tuning fits the winners only") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::vector<PreferencePair> pairs = tiny_pairs(8, arch.sample_dim, 6);
    Denoiser init = Denoiser::init_random(arch, 44);

    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.lr = 2e-3;
    cfg.batch_size = 4;
    cfg.grad_accum = 1;
    cfg.seed = 13;
    TrainOutcome out = train_sft(cfg, pairs, schedule, init);
    CHECK(out.step_count == 8);
    CHECK(out.model.params() != init.params());

    TrainOutcome again = train_sft(cfg, pairs, schedule, init);
    CHECK(out.model.params() == again.model.params());
}

TEST_CASE("preference fine-tuning moves the policy and freezes the reference") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::vector<PreferencePair> pairs = tiny_pairs(8, arch.sample_dim, 9);
    Denoiser ref = Denoiser::init_random(arch, 55);
    std::vector<double> ref_before = ref.params();

    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.lr = 2e-3;
    cfg.batch_size = 2;
    cfg.grad_accum = 2;
    cfg.seed = 17;
    cfg.dpo.beta = 0.5;
    TrainOutcome out = train_dpo(cfg, pairs, schedule, ref, ref);
    CHECK(ref.params() == ref_before);
    CHECK(out.model.params() != ref.params());
    CHECK(out.step_count == 6);

    TrainOutcome again = train_dpo(cfg, pairs, schedule, ref, ref);
    CHECK(out.model.params() == again.model.params());
}

TEST_CASE("the metrics log records a linear learning-rate decay") {
    DenoiserArch arch = tiny_arch();
    NoiseSchedule schedule = build_linear_schedule(8, 1e-3, 0.05);
    std::string path = "trainer_metrics_tmp.csv";
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 1e-2;
    cfg.batch_size = 4;
    cfg.grad_accum = 1;
    cfg.seed = 23;
    cfg.metrics_path = path;
    train_reference(cfg, arch, tiny_data(8, arch.sample_dim, 10), schedule);

    std::vector<std::string> lines = read_lines(path);
    std::remove(path.c_str());
    REQUIRE(lines.size() == 5);  // header + 4 optimizer steps
    CHECK(lines[0] == "step,phase,loss,lr,margin");
    std::vector<double> lrs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string step, phase, loss, lr, margin;
        std::getline(row, step, ',');
        std::getline(row, phase, ',');
        std::getline(row, loss, ',');
        std::getline(row, lr, ',');
        std::getline(row, margin, ',');
        CHECK(phase == "reference");
        CHECK(std::stod(loss) > 0.0);
        lrs.push_back(std::stod(lr));
    }
    CHECK(lrs[0] == doctest::Approx(1e-2).epsilon(1e-12));
    for (std::size_t i = 1; i < lrs.size(); ++i) {
        CHECK(lrs[i] < lrs[i - 1]);
        CHECK(lrs[i] - (lrs[0] * (1.0 - static_cast<double>(i) / 4.0)) ==
              doctest::Approx(0.0).epsilon(1e-15));
    }

    TrainConfig empty = cfg;
    empty.epochs = 0;
    empty.metrics_path = path;
    train_reference(empty, arch, tiny_data(4, arch.sample_dim, 11), schedule);
    std::vector<std::string> header_only = read_lines(path);
    std::remove(path.c_str());
    REQUIRE(header_only.size() == 1);
    CHECK(header_only[0] == "step,phase,loss,lr,margin");
}
