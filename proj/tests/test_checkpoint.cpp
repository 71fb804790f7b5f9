#include <doctest.h>

#include <cstdio>
#include <limits>
#include <fstream>
#include <string>
#include <vector>

#include "prefdiff/checkpoint.hpp"
#include "prefdiff/denoiser.hpp"
#include "prefdiff/errors.hpp"

using namespace prefdiff;

namespace {

DenoiserArch small_arch() {
    DenoiserArch arch;
    arch.sample_dim = 4;
    arch.hidden = {6};
    arch.time_embed_dim = 4;
    arch.cond_embed_dim = 6;
    arch.vocab_size = 5;
    arch.n_slots = 2;
    arch.cond_seed = 11;
    return arch;
}

CheckpointHeader header_for(const Denoiser& model) {
    CheckpointHeader h;
    h.arch = model.arch();
    h.n_steps = 50;
    h.beta_start = 1e-4;
    h.beta_end = 0.02;
    h.coeff = ForwardCoeff::kSqrt;
    h.seed = 99;
    h.phase = "reference";
    h.step_count = 1234;
    return h;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("checkpoint round-trips parameters bitwise") {
    Denoiser model = Denoiser::init_random(small_arch(), 7);
    TempFile f("ckpt_roundtrip.bin");
    save_checkpoint(f.path, model, header_for(model));
    auto [loaded, h] = load_checkpoint(f.path);
    CHECK(loaded.params() == model.params());
    CHECK(loaded.arch() == model.arch());
    CHECK(h.n_steps == 50);
    CHECK(h.beta_start == 1e-4);
    CHECK(h.beta_end == 0.02);
    CHECK(h.coeff == ForwardCoeff::kSqrt);
    CHECK(h.seed == 99);
    CHECK(h.phase == "reference");
    CHECK(h.step_count == 1234);
    CHECK(h.format_version == 1);
}

TEST_CASE("save rejects a header whose architecture disagrees") {
    Denoiser model = Denoiser::init_random(small_arch(), 7);
    CheckpointHeader h = header_for(model);
    h.arch.hidden = {8};
    TempFile f("ckpt_archmismatch.bin");
    CHECK_THROWS_AS(save_checkpoint(f.path, model, h), ConfigError);
}

TEST_CASE("save rejects non-finite parameters") {
    Denoiser model = Denoiser::init_random(small_arch(), 7);
    model.params()[3] = std::numeric_limits<double>::quiet_NaN();
    TempFile f("ckpt_nan.bin");
    CHECK_THROWS_AS(save_checkpoint(f.path, model, header_for(model)), NumericalError);
}

TEST_CASE("loading a missing file fails") {
    CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint.bin"), IoError);
}

TEST_CASE("loading a non-checkpoint file fails") {
    TempFile f("ckpt_garbage.bin");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << "this is not a checkpoint at all, just text padding";
    }
    CHECK_THROWS_AS(load_checkpoint(f.path), IoError);
}

TEST_CASE("a truncated checkpoint fails cleanly") {
    Denoiser model = Denoiser::init_random(small_arch(), 7);
    TempFile f("ckpt_trunc_src.bin");
    save_checkpoint(f.path, model, header_for(model));
    std::ifstream in(f.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    for (std::size_t keep : {bytes.size() - 9, bytes.size() / 2, std::size_t{12}}) {
        TempFile t("ckpt_trunc.bin");
        {
            std::ofstream out(t.path, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(keep));
        }
        CHECK_THROWS_AS(load_checkpoint(t.path), IoError);
    }
}

TEST_CASE("a corrupted magic fails cleanly") {
    Denoiser model = Denoiser::init_random(small_arch(), 7);
    TempFile f("ckpt_badmagic.bin");
    save_checkpoint(f.path, model, header_for(model));
    {
        std::fstream io(f.path, std::ios::binary | std::ios::in | std::ios::out);
        io.seekp(0);
        io.put('X');
    }
    CHECK_THROWS_AS(load_checkpoint(f.path), IoError);
}

TEST_CASE("saving twice produces byte-identical files") {
    Denoiser model = Denoiser::init_random(small_arch(), 21);
    TempFile a("ckpt_a.bin"), b("ckpt_b.bin");
    save_checkpoint(a.path, model, header_for(model));
    save_checkpoint(b.path, model, header_for(model));
    std::ifstream fa(a.path, std::ios::binary), fb(b.path, std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
    CHECK(!ba.empty());
}
