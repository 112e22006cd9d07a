#pragma once

#include <filesystem>
#include <string>

#include "calliper/grid_pe.hpp"
#include "calliper/model.hpp"
#include "calliper/poi.hpp"
#include "calliper/probe.hpp"
#include "calliper/trainer.hpp"

namespace calliper {

// Whole-pipeline configuration, mirrored by the `[section] key = value`
// config file. Every field has a default; unknown sections or keys are
// rejected. `canonical_config_text` emits a byte-stable form that parses
// back to the same config (canonicalization is idempotent).
struct RunConfig {
    GridPeConfig pe;

    struct Fcnet {
        std::size_t hidden = 256;
        std::size_t residual_blocks = 2;
        std::size_t dim = 128;
    } fcnet;

    TrainerConfig trainer;
    std::uint64_t model_seed = 0;  // parameter initialization
    std::uint64_t data_seed = 0;   // splits and synthetic data

    ProbeConfig probe;
    SplitRatio ratio;

    struct Paths {
        std::string poi;
        std::string embeddings;
        std::string checkpoint;
        std::string dataset;
        std::string report;
        std::string log;
    } paths;

    ModelDims model_dims(std::size_t d_t) const {
        return ModelDims{fcnet.dim, d_t, fcnet.hidden, fcnet.residual_blocks};
    }
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string canonical_config_text(const RunConfig& config);

}  // namespace calliper
