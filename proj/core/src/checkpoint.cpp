#include <destrike/errors.hpp>
#include <destrike/models.hpp>

#include "json_io.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace destrike {

namespace fs = std::filesystem;
using detail::json;

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'S', 'T', 'R', 'K', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little, "checkpoint payload is little-endian");

template <typename U>
void put(std::string& buf, U v) {
    char bytes[sizeof(U)];
    std::memcpy(bytes, &v, sizeof(U));
    buf.append(bytes, sizeof(U));
}

template <typename U>
U take(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(U) > buf.size()) throw FormatError("checkpoint truncated");
    U v;
    std::memcpy(&v, buf.data() + pos, sizeof(U));
    pos += sizeof(U);
    return v;
}

std::uint32_t crc32_of(const char* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<nn::Parameter<float>*> all_tensors(Model& model) {
    auto tensors = model.parameters();
    for (auto* b : model.buffers()) tensors.push_back(b);
    return tensors;
}

}  // namespace

namespace detail {

json to_json(const ModelConfig& c) {
    return json{{"arch", to_string(c.arch)},
                {"input_height", c.input_height},
                {"input_width", c.input_width},
                {"channels", c.channels},
                {"outer_kernel", c.outer_kernel},
                {"growth_rate", c.growth_rate},
                {"dense_layers", c.dense_layers},
                {"batch_norm", c.batch_norm},
                {"head", c.head == HeadActivation::sigmoid ? "sigmoid" : "identity"},
                {"bn_momentum", c.bn_momentum},
                {"bn_eps", c.bn_eps}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    const auto arch = parse_arch(j.at("arch").get<std::string>());
    if (!arch) throw FormatError("unknown architecture " + j.at("arch").dump());
    c.arch = *arch;
    c.input_height = j.at("input_height").get<int>();
    c.input_width = j.at("input_width").get<int>();
    c.channels = j.at("channels").get<std::vector<int>>();
    c.outer_kernel = j.at("outer_kernel").get<int>();
    c.growth_rate = j.at("growth_rate").get<int>();
    c.dense_layers = j.at("dense_layers").get<int>();
    c.batch_norm = j.at("batch_norm").get<bool>();
    const std::string head = j.at("head").get<std::string>();
    if (head != "sigmoid" && head != "identity") throw FormatError("unknown head " + head);
    c.head = head == "sigmoid" ? HeadActivation::sigmoid : HeadActivation::identity;
    c.bn_momentum = j.at("bn_momentum").get<double>();
    c.bn_eps = j.at("bn_eps").get<double>();
    return c;
}

}  // namespace detail

void save_checkpoint(Model& model, const CheckpointInfo& info, const fs::path& path) {
    const auto tensors = all_tensors(model);
    json table = json::array();
    for (const auto* t : tensors) table.push_back({{"name", t->name}, {"size", t->value.size()}});
    const json header{{"config", detail::to_json(model.config())},
                      {"init_seed", model.init_seed()},
                      {"run_seed", info.run_seed},
                      {"epoch", info.epoch},
                      {"tensors", table}};
    const std::string header_text = header.dump();

    std::string buf(kMagic.begin(), kMagic.end());
    put<std::uint32_t>(buf, kCheckpointVersion);
    put<std::uint64_t>(buf, header_text.size());
    buf += header_text;
    for (const auto* t : tensors) {
        buf.append(reinterpret_cast<const char*>(t->value.data()), t->value.size() * sizeof(float));
    }
    put<std::uint32_t>(buf, crc32_of(buf.data(), buf.size()));

    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

LoadedModel load_checkpoint(const fs::path& path, std::optional<ArchName> expected_arch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::string where = " (" + path.string() + ")";
    if (buf.size() < kMagic.size() + 16 || !std::equal(kMagic.begin(), kMagic.end(), buf.begin())) {
        throw FormatError("not a checkpoint" + where);
    }
    const std::size_t payload_end = buf.size() - sizeof(std::uint32_t);
    std::size_t crc_pos = payload_end;
    const auto stored_crc = take<std::uint32_t>(buf, crc_pos);
    if (crc32_of(buf.data(), payload_end) != stored_crc) {
        throw FormatError("checkpoint checksum mismatch" + where);
    }

    std::size_t pos = kMagic.size();
    const auto version = take<std::uint32_t>(buf, pos);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + where);
    }
    const auto header_len = take<std::uint64_t>(buf, pos);
    if (header_len > payload_end - pos) throw FormatError("checkpoint truncated" + where);
    json header;
    ModelConfig config;
    CheckpointInfo info;
    std::uint64_t init_seed = 0;
    try {
        header = json::parse(buf.substr(pos, header_len));
        config = detail::model_config_from_json(header.at("config"));
        init_seed = header.at("init_seed").get<std::uint64_t>();
        info.run_seed = header.at("run_seed").get<std::uint64_t>();
        info.epoch = header.at("epoch").get<int>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad checkpoint header: ") + e.what() + where);
    }
    pos += header_len;

    if (expected_arch && *expected_arch != config.arch) {
        throw FormatError("checkpoint holds a " + std::string(to_string(config.arch)) + " model, expected " +
                          std::string(to_string(*expected_arch)) + where);
    }

    Model model(config, init_seed);
    const auto tensors = all_tensors(model);
    const json& table = header.at("tensors");
    if (table.size() != tensors.size()) throw FormatError("checkpoint tensor table mismatch" + where);
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        auto& t = *tensors[i];
        if (table[i].at("name").get<std::string>() != t.name ||
            table[i].at("size").get<std::size_t>() != t.value.size()) {
            throw FormatError("checkpoint tensor " + t.name + " does not match the architecture" + where);
        }
        const std::size_t bytes = t.value.size() * sizeof(float);
        if (pos + bytes > payload_end) throw FormatError("checkpoint truncated" + where);
        std::memcpy(t.value.data(), buf.data() + pos, bytes);
        pos += bytes;
    }
    if (pos != payload_end) throw FormatError("trailing bytes in checkpoint" + where);
    return {std::move(model), info};
}

}  // namespace destrike
