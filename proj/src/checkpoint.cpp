#include "prefdiff/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "prefdiff/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace prefdiff {

using json = nlohmann::ordered_json;

static constexpr char kMagic[8] = {'P', 'D', 'C', 'K', 'P', 'T', '0', '1'};
static constexpr int kFormatVersion = 1;

static json header_to_json(const CheckpointHeader& h) {
    json j;
    j["format_version"] = h.format_version;
    j["arch"] = {{"sample_dim", h.arch.sample_dim},
                 {"hidden", h.arch.hidden},
                 {"time_embed_dim", h.arch.time_embed_dim},
                 {"cond_embed_dim", h.arch.cond_embed_dim},
                 {"vocab_size", h.arch.vocab_size},
                 {"n_slots", h.arch.n_slots},
                 {"cond_seed", h.arch.cond_seed},
                 {"nonlinearity", h.arch.nonlinearity}};
    j["n_steps"] = h.n_steps;
    j["beta_start"] = h.beta_start;
    j["beta_end"] = h.beta_end;
    j["forward_coeff"] = to_string(h.coeff);
    j["seed"] = h.seed;
    j["phase"] = h.phase;
    j["step_count"] = h.step_count;
    return j;
}

static CheckpointHeader header_from_json(const json& j) {
    CheckpointHeader h;
    h.format_version = j.at("format_version").get<int>();
    const json& a = j.at("arch");
    h.arch.sample_dim = a.at("sample_dim").get<int>();
    h.arch.hidden = a.at("hidden").get<std::vector<int>>();
    h.arch.time_embed_dim = a.at("time_embed_dim").get<int>();
    h.arch.cond_embed_dim = a.at("cond_embed_dim").get<int>();
    h.arch.vocab_size = a.at("vocab_size").get<int>();
    h.arch.n_slots = a.at("n_slots").get<int>();
    h.arch.cond_seed = a.at("cond_seed").get<std::uint64_t>();
    h.arch.nonlinearity = a.at("nonlinearity").get<std::string>();
    h.n_steps = j.at("n_steps").get<int>();
    h.beta_start = j.at("beta_start").get<double>();
    h.beta_end = j.at("beta_end").get<double>();
    h.coeff = forward_coeff_from_string(j.at("forward_coeff").get<std::string>());
    h.seed = j.at("seed").get<std::uint64_t>();
    h.phase = j.at("phase").get<std::string>();
    h.step_count = j.at("step_count").get<std::int64_t>();
    return h;
}

void save_checkpoint(const std::string& path, const Denoiser& model,
                     const CheckpointHeader& header) {
    if (header.arch != model.arch())
        throw ConfigError("checkpoint header arch does not match the model");
    for (double v : model.params())
        if (!std::isfinite(v)) throw NumericalError("refusing to save non-finite parameters");
    std::string head = header_to_json(header).dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    std::uint64_t head_len = head.size();
    out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    std::uint64_t count = model.params().size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(model.params().data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::pair<Denoiser, CheckpointHeader> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint file: " + path);
    std::uint64_t head_len = 0;
    if (!in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len)) || head_len > (1u << 20))
        throw IoError("corrupt checkpoint header length: " + path);
    std::string head(head_len, '\0');
    if (!in.read(head.data(), static_cast<std::streamsize>(head_len)))
        throw IoError("truncated checkpoint header: " + path);
    json j;
    try {
        j = json::parse(head);
    } catch (const json::exception& e) {
        throw IoError("corrupt checkpoint header: " + std::string(e.what()));
    }
    CheckpointHeader header;
    try {
        header = header_from_json(j);
    } catch (const json::exception& e) {
        throw IoError("checkpoint header missing fields: " + std::string(e.what()));
    }
    if (header.format_version != kFormatVersion)
        throw IoError("unsupported checkpoint format version " +
                      std::to_string(header.format_version));
    std::uint64_t count = 0;
    if (!in.read(reinterpret_cast<char*>(&count), sizeof(count)))
        throw IoError("truncated checkpoint: " + path);
    Denoiser model(header.arch);
    if (count != model.params().size())
        throw IoError("checkpoint parameter count does not match its architecture");
    if (!in.read(reinterpret_cast<char*>(model.params().data()),
                 static_cast<std::streamsize>(count * sizeof(double))))
        throw IoError("truncated checkpoint parameters: " + path);
    return {std::move(model), header};
}

}  // namespace prefdiff
