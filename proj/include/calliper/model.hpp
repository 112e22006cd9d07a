#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "calliper/grid_pe.hpp"
#include "calliper/matrix.hpp"
#include "calliper/mlp.hpp"

namespace calliper {

inline constexpr const char* kVersion = "0.1.0";

struct ModelDims {
    std::size_t d = 128;            // location/text embedding dimension
    std::size_t d_t = 0;            // text-encoder output dimension
    std::size_t hidden = 256;       // FC-Net hidden width
    std::size_t residual_blocks = 2;
};

// Everything needed to embed a coordinate: Grid PE config, FC-Net weights,
// the text projection and the temperature. Immutable during inference.
struct CalliperModel {
    GridPeConfig pe;
    MlpF fcnet;        // 4S -> hidden -> ... -> d
    MatF projection;   // d_t x d, no bias
    float log_tau = 0.0f;
    ModelDims dims;
    bool normalize = true;  // L2-normalize embeddings (matches training)

    double tau() const { return std::exp(static_cast<double>(log_tau)); }

    void validate() const;
};

CalliperModel make_model(const GridPeConfig& pe, const ModelDims& dims, double tau,
                         bool normalize, std::uint64_t init_seed);

// Rows are FC-Net(grid_pe(coord)); optionally L2-normalized.
MatF encode_locations(const CalliperModel& model, std::span<const Coord> coords, bool normalize);
inline MatF encode_locations(const CalliperModel& model, std::span<const Coord> coords) {
    return encode_locations(model, coords, model.normalize);
}

// Bias-free linear map of provider vectors into the location space.
MatF project_text(const CalliperModel& model, const MatF& text_vectors, bool normalize);

// Binary checkpoint, bit-exact round trip:
//   "CLLP" | u32 version | u32 header_len | JSON header |
//   float32 LE arrays (fcnet weights+biases in layer order, then projection) |
//   u32 CRC32 of all preceding bytes.
void save_checkpoint(const CalliperModel& model, const std::filesystem::path& path);
CalliperModel load_checkpoint(const std::filesystem::path& path);

}  // namespace calliper
