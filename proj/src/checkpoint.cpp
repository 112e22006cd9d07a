#include <zlib.h>

#include <cstring>
#include <fstream>

#include "calliper/model.hpp"
#include "json.hpp"

namespace calliper {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'L', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& buf, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    put_u32(buf, bits);
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) throw TruncatedFileError("checkpoint truncated");
    const auto b = [&](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]));
    };
    std::uint32_t v = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    pos += 4;
    return v;
}

float get_f32(const std::string& buf, std::size_t& pos) {
    std::uint32_t bits = get_u32(buf, pos);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

std::uint32_t crc_of(const std::string& buf, std::size_t len) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(len)));
}

}  // namespace

void save_checkpoint(const CalliperModel& model, const std::filesystem::path& path) {
    model.validate();
    nlohmann::json header;
    header["version"] = kFormatVersion;
    header["pe"] = {{"r_min", model.pe.r_min}, {"r_max", model.pe.r_max},
                    {"scales", model.pe.scales}};
    header["dims"] = {{"d", model.dims.d},
                      {"d_t", model.dims.d_t},
                      {"hidden", model.dims.hidden},
                      {"residual_blocks", model.dims.residual_blocks}};
    header["log_tau"] = model.log_tau;
    header["normalize"] = model.normalize;
    const std::string header_text = header.dump();

    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(header_text.size()));
    buf.append(header_text);
    for (const auto& layer : model.fcnet.layers) {
        for (float w : layer.weight.data) put_f32(buf, w);
        for (float b : layer.bias) put_f32(buf, b);
    }
    for (float w : model.projection.data) put_f32(buf, w);
    put_u32(buf, crc_of(buf, buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("short write to checkpoint: " + path.string());
}

CalliperModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw BadMagicError("not a checkpoint file: " + path.string());
    }
    std::size_t pos = 4;
    const std::uint32_t version = get_u32(buf, pos);
    if (version != kFormatVersion) {
        throw UnsupportedVersionError("checkpoint version " + std::to_string(version) +
                                      " not supported");
    }
    const std::uint32_t header_len = get_u32(buf, pos);
    if (pos + header_len > buf.size()) throw TruncatedFileError("checkpoint header truncated");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(buf.substr(pos, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw TruncatedFileError(std::string("checkpoint header unreadable: ") + e.what());
    }
    pos += header_len;

    CalliperModel model;
    try {
        model.pe.r_min = header.at("pe").at("r_min").get<double>();
        model.pe.r_max = header.at("pe").at("r_max").get<double>();
        model.pe.scales = header.at("pe").at("scales").get<std::size_t>();
        model.dims.d = header.at("dims").at("d").get<std::size_t>();
        model.dims.d_t = header.at("dims").at("d_t").get<std::size_t>();
        model.dims.hidden = header.at("dims").at("hidden").get<std::size_t>();
        model.dims.residual_blocks = header.at("dims").at("residual_blocks").get<std::size_t>();
        model.log_tau = header.at("log_tau").get<float>();
        model.normalize = header.at("normalize").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw TruncatedFileError(std::string("checkpoint header incomplete: ") + e.what());
    }

    // Array layout is fully determined by the header.
    auto read_layer = [&](std::size_t rows, std::size_t cols, bool residual) {
        DenseLayer<float> layer;
        layer.weight = MatF(rows, cols);
        for (auto& w : layer.weight.data) w = get_f32(buf, pos);
        layer.bias.resize(cols);
        for (auto& b : layer.bias) b = get_f32(buf, pos);
        layer.residual = residual;
        return layer;
    };
    const std::size_t pe_dim = model.pe.output_dim();
    model.fcnet.layers.push_back(read_layer(pe_dim, model.dims.hidden, false));
    for (std::size_t i = 0; i < model.dims.residual_blocks; ++i) {
        model.fcnet.layers.push_back(read_layer(model.dims.hidden, model.dims.hidden, true));
    }
    model.fcnet.layers.push_back(read_layer(model.dims.hidden, model.dims.d, false));
    model.projection = MatF(model.dims.d_t, model.dims.d);
    for (auto& w : model.projection.data) w = get_f32(buf, pos);

    if (pos + 4 != buf.size()) {
        throw TruncatedFileError(pos + 4 > buf.size() ? "checkpoint parameter section truncated"
                                                      : "trailing bytes after checkpoint CRC");
    }
    const std::uint32_t stored_crc = get_u32(buf, pos);
    if (stored_crc != crc_of(buf, buf.size() - 4)) {
        throw ChecksumMismatchError("checkpoint CRC mismatch: " + path.string());
    }
    model.validate();
    return model;
}

}  // namespace calliper
