#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "calliper/adam.hpp"
#include "calliper/info_nce.hpp"
#include "calliper/model.hpp"
#include "calliper/poi.hpp"

namespace calliper {

struct TrainerConfig {
    std::size_t batch_size = 1024;
    std::size_t epochs = 63;
    double lr = 1e-3;
    double tau = 0.07;
    bool tau_learnable = false;
    bool normalize_embeddings = true;
    // Ablation: build batches with at most one pair per distinct prompt.
    // Duplicate prompts are soft false negatives; by default they stay in.
    bool dedup_within_batch = false;
    std::uint64_t seed = 0;
    std::size_t log_every = 1;  // epochs between stderr progress lines; 0 = quiet

    void validate() const {
        if (batch_size < 2) throw ConfigInvalidError("trainer: batch_size must be >= 2");
        if (epochs < 1) throw ConfigInvalidError("trainer: epochs must be >= 1");
        if (!(lr > 0.0)) throw ConfigInvalidError("trainer: lr must be positive");
        if (!(tau > 0.0)) throw ConfigInvalidError("trainer: tau must be positive");
    }
};

struct TrainLogEntry {
    std::size_t epoch = 0;       // 1-based
    double mean_loss = 0.0;      // per-pair mean over the epoch
    double wall_seconds = 0.0;
    double top1_retrieval_acc = 0.0;
};

// One optimization step's worth of gradients for the trainable parameters
// (FC-Net, projection, optionally log-tau). Templated so the gradient checks
// can run the identical code path in double.
template <class T>
struct ContrastiveGrads {
    double loss = 0.0;
    double top1_accuracy = 0.0;
    Mlp<T> fcnet;
    Mat<T> projection;
    double log_tau = 0.0;
};

// Forward both towers over one batch and backpropagate the bidirectional
// InfoNCE loss. Text vectors are inputs, never parameters.
template <class T>
ContrastiveGrads<T> contrastive_batch_grads(const GridPeConfig& pe, const Mlp<T>& fcnet,
                                            const Mat<T>& projection, double log_tau,
                                            bool normalize, std::span<const Coord> coords,
                                            const Mat<T>& text_vectors) {
    if (coords.size() != text_vectors.rows) {
        throw ShapeMismatchError("contrastive batch: coords vs text rows");
    }
    ContrastiveGrads<T> grads;
    grads.fcnet = fcnet.zeros_like();
    grads.projection = Mat<T>(projection.rows, projection.cols);

    Mat<T> pe_batch = grid_pe_batch<T>(coords, pe);
    MlpTape<T> tape;
    Mat<T> z_loc = mlp_forward(fcnet, pe_batch, &tape);
    Mat<T> z_text = matmul(text_vectors, projection);
    ensure_finite(z_text, "text projection");

    std::vector<T> loc_norms, text_norms;
    if (normalize) {
        loc_norms = l2_normalize_rows(z_loc, "location embeddings");
        text_norms = l2_normalize_rows(z_text, "text embeddings");
    }

    const double tau = std::exp(log_tau);
    InfoNceResult<T> loss = info_nce_loss(z_loc, z_text, tau);
    grads.loss = loss.loss;
    grads.top1_accuracy = loss.top1_accuracy;
    grads.log_tau = loss.grad_log_tau;

    Mat<T> g_loc = std::move(loss.grad_left);
    Mat<T> g_text = std::move(loss.grad_right);
    if (normalize) {
        g_loc = l2_normalize_rows_backward(z_loc, std::span<const T>(loc_norms), g_loc);
        g_text = l2_normalize_rows_backward(z_text, std::span<const T>(text_norms), g_text);
    }
    mlp_backward(fcnet, tape, g_loc, grads.fcnet);
    grads.projection = matmul(text_vectors, g_text, /*trans_a=*/true);
    return grads;
}

// Full pre-training loop: seeded shuffle each epoch, full batches (a final
// short batch is kept when it still has >= 2 pairs), Adam updates, one log
// entry per epoch. Deterministic for a fixed config.
std::vector<TrainLogEntry> train(std::span<const TrainingPair> pairs, CalliperModel& model,
                                 const TrainerConfig& config);

void write_training_log(const std::filesystem::path& path,
                        std::span<const TrainLogEntry> entries);

}  // namespace calliper
