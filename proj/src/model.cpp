#include "calliper/model.hpp"

#include "calliper/rng.hpp"

namespace calliper {

void CalliperModel::validate() const {
    pe.validate();
    fcnet.validate();
    if (fcnet.in_dim() != pe.output_dim()) {
        throw ShapeMismatchError("model: fcnet input dim " + std::to_string(fcnet.in_dim()) +
                                 " vs PE output dim " + std::to_string(pe.output_dim()));
    }
    if (fcnet.out_dim() != dims.d) {
        throw ShapeMismatchError("model: fcnet output dim " + std::to_string(fcnet.out_dim()) +
                                 " vs d " + std::to_string(dims.d));
    }
    if (projection.rows != dims.d_t || projection.cols != dims.d) {
        throw ShapeMismatchError("model: projection is " + std::to_string(projection.rows) + "x" +
                                 std::to_string(projection.cols) + ", want " +
                                 std::to_string(dims.d_t) + "x" + std::to_string(dims.d));
    }
    if (!std::isfinite(tau()) || tau() <= 0.0) {
        throw ConfigInvalidError("model: temperature must be positive");
    }
}

CalliperModel make_model(const GridPeConfig& pe, const ModelDims& dims, double tau,
                         bool normalize, std::uint64_t init_seed) {
    pe.validate();
    if (dims.d == 0 || dims.d_t == 0 || dims.hidden == 0) {
        throw ConfigInvalidError("make_model: dims must be positive");
    }
    if (!(tau > 0.0)) throw ConfigInvalidError("make_model: tau must be positive");
    CalliperModel model;
    model.pe = pe;
    model.dims = dims;
    model.normalize = normalize;
    model.log_tau = static_cast<float>(std::log(tau));
    Rng rng = make_rng(init_seed, /*stream=*/1);
    model.fcnet =
        make_fcnet<float>(pe.output_dim(), dims.hidden, dims.d, dims.residual_blocks, rng);
    model.projection = MatF(dims.d_t, dims.d);
    const double bound = std::sqrt(6.0 / static_cast<double>(dims.d_t));
    for (auto& w : model.projection.data) w = static_cast<float>(rng.uniform(-bound, bound));
    return model;
}

MatF encode_locations(const CalliperModel& model, std::span<const Coord> coords, bool normalize) {
    model.validate();
    MatF out(coords.size(), model.dims.d);
    // Row at a time: BLAS accumulation order varies with the batch shape, and
    // an embedding must depend on its coordinate only, not on what else was
    // in the batch.
    for (std::size_t i = 0; i < coords.size(); ++i) {
        try {
            MatF pe = grid_pe_batch<float>(std::span<const Coord>(&coords[i], 1), model.pe);
            MatF row = mlp_forward(model.fcnet, pe);
            if (normalize) l2_normalize_rows(row, "location embedding");
            std::copy(row.row(0).begin(), row.row(0).end(), out.row(i).begin());
        } catch (const NonFiniteError& e) {
            throw NonFiniteError("coordinate index " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

MatF project_text(const CalliperModel& model, const MatF& text_vectors, bool normalize) {
    if (text_vectors.cols != model.dims.d_t) {
        throw ShapeMismatchError("project_text: input cols " + std::to_string(text_vectors.cols) +
                                 " vs d_t " + std::to_string(model.dims.d_t));
    }
    MatF out = matmul(text_vectors, model.projection);
    ensure_finite(out, "text projection");
    if (normalize) l2_normalize_rows(out, "text embeddings");
    return out;
}

}  // namespace calliper
