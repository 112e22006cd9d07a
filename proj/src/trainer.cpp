#include "calliper/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_set>

#include "calliper/csv.hpp"
#include "calliper/rng.hpp"

namespace calliper {

namespace {

constexpr double kLogTauMin = -4.605170185988091;  // ln 0.01
constexpr double kLogTauMax = 4.605170185988092;   // ln 100

// Slices the shuffled order into batches. In dedup mode each batch takes at
// most one pair per distinct prompt, spilling the rest into later batches
// until only unbatchable duplicates remain. Batches of fewer than 2 pairs
// are dropped (their loss is degenerate).
std::vector<std::vector<std::size_t>> make_batches(std::span<const TrainingPair> pairs,
                                                   const std::vector<std::size_t>& order,
                                                   std::size_t batch_size, bool dedup) {
    std::vector<std::vector<std::size_t>> batches;
    if (!dedup) {
        for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, order.size());
            batches.emplace_back(order.begin() + begin, order.begin() + end);
        }
    } else {
        std::vector<std::size_t> remaining = order;
        while (!remaining.empty()) {
            std::vector<std::size_t> batch;
            std::vector<std::size_t> leftover;
            std::unordered_set<std::string_view> prompts;
            for (std::size_t idx : remaining) {
                if (batch.size() < batch_size && prompts.insert(pairs[idx].prompt).second) {
                    batch.push_back(idx);
                } else {
                    leftover.push_back(idx);
                }
            }
            if (batch.size() < 2) break;
            batches.push_back(std::move(batch));
            remaining = std::move(leftover);
        }
    }
    while (!batches.empty() && batches.back().size() < 2) batches.pop_back();
    return batches;
}

}  // namespace

std::vector<TrainLogEntry> train(std::span<const TrainingPair> pairs, CalliperModel& model,
                                 const TrainerConfig& config) {
    config.validate();
    model.validate();
    if (pairs.empty()) throw ConfigInvalidError("train: no training pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].text_embedding.size() != model.dims.d_t) {
            throw ShapeMismatchError("train: pair " + std::to_string(i) + " has d_t " +
                                     std::to_string(pairs[i].text_embedding.size()) +
                                     ", model wants " + std::to_string(model.dims.d_t));
        }
    }

    model.log_tau = static_cast<float>(std::log(config.tau));
    model.normalize = config.normalize_embeddings;

    // Parameter and gradient views in a fixed order for Adam.
    std::vector<std::span<float>> params;
    for (auto& layer : model.fcnet.layers) {
        params.emplace_back(layer.weight.data);
        params.emplace_back(layer.bias);
    }
    params.emplace_back(model.projection.data);
    if (config.tau_learnable) params.emplace_back(&model.log_tau, 1);

    Adam<float> optimizer(AdamConfig{.lr = config.lr});
    optimizer.init(params);

    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<TrainLogEntry> log;
    log.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        Rng rng = make_rng(config.seed, /*stream=*/1000 + epoch);
        rng.shuffle(order);

        const auto batches =
            make_batches(pairs, order, config.batch_size, config.dedup_within_batch);
        double loss_sum = 0.0;
        double acc_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t batch_no = 0; batch_no < batches.size(); ++batch_no) {
            const auto& batch = batches[batch_no];
            const std::size_t n = batch.size();
            std::vector<Coord> coords(n);
            MatF text(n, model.dims.d_t);
            for (std::size_t k = 0; k < n; ++k) {
                const TrainingPair& pair = pairs[batch[k]];
                coords[k] = pair.location;
                std::copy(pair.text_embedding.begin(), pair.text_embedding.end(),
                          text.row(k).begin());
            }

            ContrastiveGrads<float> grads;
            try {
                grads = contrastive_batch_grads<float>(model.pe, model.fcnet, model.projection,
                                                       model.log_tau, config.normalize_embeddings,
                                                       coords, text);
            } catch (const NonFiniteError& e) {
                throw NonFiniteError("epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_no) + ": " + e.what());
            }
            loss_sum += grads.loss * static_cast<double>(n);
            acc_sum += grads.top1_accuracy * static_cast<double>(n);
            seen += n;

            std::vector<std::span<const float>> grad_views;
            for (auto& layer : grads.fcnet.layers) {
                grad_views.emplace_back(layer.weight.data);
                grad_views.emplace_back(layer.bias);
            }
            grad_views.emplace_back(grads.projection.data);
            const float log_tau_grad = static_cast<float>(grads.log_tau);
            if (config.tau_learnable) grad_views.emplace_back(&log_tau_grad, 1);
            optimizer.update(params, grad_views);
            if (config.tau_learnable) {
                model.log_tau = std::clamp(model.log_tau, static_cast<float>(kLogTauMin),
                                           static_cast<float>(kLogTauMax));
            }
        }
        const auto epoch_end = std::chrono::steady_clock::now();

        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.mean_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        entry.top1_retrieval_acc = seen ? acc_sum / static_cast<double>(seen) : 0.0;
        entry.wall_seconds = std::chrono::duration<double>(epoch_end - epoch_start).count();
        log.push_back(entry);

        if (config.log_every > 0 && (epoch % config.log_every == 0 || epoch == config.epochs)) {
            std::fprintf(stderr, "epoch %zu/%zu  loss %.4f  top1 %.3f  %.2fs\n", epoch,
                         config.epochs, entry.mean_loss, entry.top1_retrieval_acc,
                         entry.wall_seconds);
        }
    }
    return log;
}

void write_training_log(const std::filesystem::path& path,
                        std::span<const TrainLogEntry> entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open training log for writing: " + path.string());
    out << "epoch,mean_loss,wall_seconds,top1_acc\n";
    for (const auto& e : entries) {
        out << e.epoch << ',' << format_double(e.mean_loss) << ',' << format_double(e.wall_seconds)
            << ',' << format_double(e.top1_retrieval_acc) << '\n';
    }
}

}  // namespace calliper
