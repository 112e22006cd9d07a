#pragma once

#include <cstdint>
#include <vector>

#include "calliper/matrix.hpp"
#include "calliper/metrics.hpp"
#include "calliper/mlp.hpp"
#include "calliper/model.hpp"
#include "calliper/poi.hpp"

namespace calliper {

enum class HeadKind { Linear, MlpOneHidden };
enum class TaskKind { Classification, Distribution };

struct ProbeConfig {
    HeadKind head = HeadKind::Linear;
    std::size_t hidden = 128;  // MlpOneHidden only
    double lr = 1e-3;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;  // early stop when validation stalls this long
    std::size_t batch_size = 32;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string config_digest_extra;  // folded into the report digest

    void validate() const {
        if (patience < 1) throw ConfigInvalidError("probe: patience must be >= 1");
        if (seeds.empty()) throw ConfigInvalidError("probe: need at least one seed");
        if (max_epochs < 1) throw ConfigInvalidError("probe: max_epochs must be >= 1");
        if (!(lr > 0.0)) throw ConfigInvalidError("probe: lr must be positive");
    }
};

// A trained downstream head over frozen embeddings. Classification heads
// train with cross-entropy, distribution heads with MSE on softmax outputs;
// both predict through a final softmax.
struct ProbeHead {
    MlpF net;
    TaskKind task = TaskKind::Classification;
    std::size_t best_epoch = 0;       // epoch whose weights were kept
    std::size_t epochs_run = 0;       // epochs actually executed
    double best_val_metric = 0.0;     // F1 (classification) or L1 (distribution)
};

ProbeHead train_probe(const MatF& embeddings, const LabeledPointSet& dataset,
                      const ProbeConfig& config, std::uint64_t seed);

// Softmax probabilities, one row per embedding row.
MatF probe_predict(const ProbeHead& head, const MatF& embeddings);

std::vector<int> probe_predict_classes(const ProbeHead& head, const MatF& embeddings);

// Trains one probe per seed on the train/val splits, evaluates each on the
// test split and aggregates mean +- std per metric.
MetricsReport run_experiment(const MatF& embeddings, const LabeledPointSet& dataset,
                             const ProbeConfig& config);

// Same, with embeddings taken from a frozen checkpointed model.
MetricsReport run_experiment(const CalliperModel& model, const LabeledPointSet& dataset,
                             const ProbeConfig& config);

}  // namespace calliper
