#include "calliper/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "calliper/adam.hpp"
#include "calliper/rng.hpp"

namespace calliper {

namespace {

// Row-wise softmax with max subtraction.
MatF softmax_rows(const MatF& logits) {
    MatF out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        float row_max = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) row_max = std::max(row_max, logits(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp(static_cast<double>(logits(i, j)) - row_max);
            out(i, j) = static_cast<float>(e);
            denom += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) {
            out(i, j) = static_cast<float>(out(i, j) / denom);
        }
    }
    return out;
}

MatF gather_rows(const MatF& m, std::span<const std::size_t> idx) {
    MatF out(idx.size(), m.cols);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::copy(m.row(idx[k]).begin(), m.row(idx[k]).end(), out.row(k).begin());
    }
    return out;
}

// Loss gradient w.r.t. logits for one batch (already divided by batch size).
MatF loss_grad_logits(TaskKind task, const MatF& probs, const MatF& targets_dist,
                      std::span<const int> targets_cls) {
    const auto n = static_cast<float>(probs.rows);
    MatF g(probs.rows, probs.cols);
    if (task == TaskKind::Classification) {
        for (std::size_t i = 0; i < probs.rows; ++i) {
            for (std::size_t j = 0; j < probs.cols; ++j) {
                const float onehot = (static_cast<int>(j) == targets_cls[i]) ? 1.0f : 0.0f;
                g(i, j) = (probs(i, j) - onehot) / n;
            }
        }
    } else {
        // d/dz of |softmax(z) - y|^2: chain 2(p - y)/n through the softmax.
        for (std::size_t i = 0; i < probs.rows; ++i) {
            double inner = 0.0;
            std::vector<double> gp(probs.cols);
            for (std::size_t j = 0; j < probs.cols; ++j) {
                gp[j] = 2.0 * (probs(i, j) - targets_dist(i, j)) / n;
                inner += gp[j] * probs(i, j);
            }
            for (std::size_t j = 0; j < probs.cols; ++j) {
                g(i, j) = static_cast<float>(probs(i, j) * (gp[j] - inner));
            }
        }
    }
    return g;
}

double validation_metric(TaskKind task, const ProbeHead& head, const MatF& val_embeddings,
                         const LabeledPointSet& dataset,
                         std::span<const std::size_t> val_idx) {
    if (task == TaskKind::Classification) {
        std::vector<int> pred = probe_predict_classes(head, val_embeddings);
        std::vector<int> truth(val_idx.size());
        for (std::size_t k = 0; k < val_idx.size(); ++k) truth[k] = dataset.class_labels[val_idx[k]];
        return classification_metrics(pred, truth, static_cast<int>(dataset.num_classes())).f1;
    }
    MatF probs = probe_predict(head, val_embeddings);
    MatD truth(val_idx.size(), dataset.distributions.cols);
    for (std::size_t k = 0; k < val_idx.size(); ++k) {
        for (std::size_t j = 0; j < truth.cols; ++j) {
            truth(k, j) = dataset.distributions(val_idx[k], j);
        }
    }
    return distribution_metrics(cast_matrix<float, double>(probs), truth).l1;
}

}  // namespace

ProbeHead train_probe(const MatF& embeddings, const LabeledPointSet& dataset,
                      const ProbeConfig& config, std::uint64_t seed) {
    config.validate();
    dataset.validate();
    if (embeddings.rows != dataset.size()) {
        throw ShapeMismatchError("train_probe: embedding rows vs dataset size");
    }
    const auto train_idx = dataset.indices_of(Split::Train);
    const auto val_idx = dataset.indices_of(Split::Val);
    if (train_idx.empty()) throw EmptySplitError("train split is empty");
    if (val_idx.empty()) throw EmptySplitError("validation split is empty");

    const TaskKind task =
        dataset.is_distribution() ? TaskKind::Distribution : TaskKind::Classification;
    const std::size_t out_dim = dataset.num_classes();
    if (out_dim < 2) throw ConfigInvalidError("train_probe: need at least 2 classes");

    ProbeHead head;
    head.task = task;
    Rng init_rng = make_rng(seed, /*stream=*/20);
    if (config.head == HeadKind::Linear) {
        // Zero init, as for a logistic-regression probe.
        DenseLayer<float> layer;
        layer.weight = MatF(embeddings.cols, out_dim);
        layer.bias.assign(out_dim, 0.0f);
        head.net.layers.push_back(std::move(layer));
    } else {
        head.net = make_fcnet<float>(embeddings.cols, config.hidden, out_dim,
                                     /*residual_blocks=*/0, init_rng);
    }

    std::vector<std::span<float>> params;
    for (auto& layer : head.net.layers) {
        params.emplace_back(layer.weight.data);
        params.emplace_back(layer.bias);
    }
    Adam<float> optimizer(AdamConfig{.lr = config.lr});
    optimizer.init(params);

    const MatF val_embeddings = gather_rows(embeddings, val_idx);
    const bool higher_better = (task == TaskKind::Classification);

    MlpF best_net = head.net;
    double best_metric = higher_better ? -1e300 : 1e300;
    std::size_t best_epoch = 0;
    std::size_t stale = 0;

    std::vector<std::size_t> order = train_idx;
    std::size_t epochs_run = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        epochs_run = epoch;
        Rng rng = make_rng(seed, /*stream=*/3000 + epoch);
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            std::span<const std::size_t> batch_idx(order.data() + begin, end - begin);
            MatF x = gather_rows(embeddings, batch_idx);
            MlpTape<float> tape;
            MatF logits = mlp_forward(head.net, x, &tape);
            MatF probs = softmax_rows(logits);

            MatF targets_dist;
            std::vector<int> targets_cls;
            if (task == TaskKind::Distribution) {
                targets_dist = MatF(batch_idx.size(), out_dim);
                for (std::size_t k = 0; k < batch_idx.size(); ++k) {
                    std::copy(dataset.distributions.row(batch_idx[k]).begin(),
                              dataset.distributions.row(batch_idx[k]).end(),
                              targets_dist.row(k).begin());
                }
            } else {
                targets_cls.resize(batch_idx.size());
                for (std::size_t k = 0; k < batch_idx.size(); ++k) {
                    targets_cls[k] = dataset.class_labels[batch_idx[k]];
                }
            }
            MatF g = loss_grad_logits(task, probs, targets_dist, targets_cls);
            MlpF grads = head.net.zeros_like();
            mlp_backward(head.net, tape, g, grads);
            std::vector<std::span<const float>> grad_views;
            for (auto& layer : grads.layers) {
                grad_views.emplace_back(layer.weight.data);
                grad_views.emplace_back(layer.bias);
            }
            optimizer.update(params, grad_views);
        }

        const double metric = validation_metric(task, head, val_embeddings, dataset, val_idx);
        const bool improved = higher_better ? metric > best_metric : metric < best_metric;
        if (improved) {
            best_metric = metric;
            best_net = head.net;
            best_epoch = epoch;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    head.net = std::move(best_net);
    head.best_epoch = best_epoch;
    head.epochs_run = epochs_run;
    head.best_val_metric = best_metric;
    return head;
}

MatF probe_predict(const ProbeHead& head, const MatF& embeddings) {
    return softmax_rows(mlp_forward(head.net, embeddings));
}

std::vector<int> probe_predict_classes(const ProbeHead& head, const MatF& embeddings) {
    MatF probs = probe_predict(head, embeddings);
    std::vector<int> out(probs.rows);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < probs.cols; ++j) {
            if (probs(i, j) > probs(i, argmax)) argmax = j;
        }
        out[i] = static_cast<int>(argmax);
    }
    return out;
}

MetricsReport run_experiment(const MatF& embeddings, const LabeledPointSet& dataset,
                             const ProbeConfig& config) {
    config.validate();
    const auto test_idx = dataset.indices_of(Split::Test);
    if (test_idx.empty()) throw EmptySplitError("test split is empty");
    const MatF test_embeddings = gather_rows(embeddings, test_idx);

    MetricsReport report;
    report.task = dataset.is_distribution() ? "distribution" : "classification";
    report.head = config.head == HeadKind::Linear ? "linear" : "mlp";
    report.seeds = config.seeds;

    std::map<std::string, std::vector<double>> values;
    for (std::uint64_t seed : config.seeds) {
        ProbeHead head = train_probe(embeddings, dataset, config, seed);
        if (dataset.is_distribution()) {
            MatF probs = probe_predict(head, test_embeddings);
            MatD truth(test_idx.size(), dataset.distributions.cols);
            for (std::size_t k = 0; k < test_idx.size(); ++k) {
                for (std::size_t j = 0; j < truth.cols; ++j) {
                    truth(k, j) = dataset.distributions(test_idx[k], j);
                }
            }
            const auto m = distribution_metrics(cast_matrix<float, double>(probs), truth);
            values["L1"].push_back(m.l1);
            values["Chebyshev"].push_back(m.chebyshev);
            values["KL"].push_back(m.kl);
        } else {
            std::vector<int> pred = probe_predict_classes(head, test_embeddings);
            std::vector<int> truth(test_idx.size());
            for (std::size_t k = 0; k < test_idx.size(); ++k) {
                truth[k] = dataset.class_labels[test_idx[k]];
            }
            const auto m =
                classification_metrics(pred, truth, static_cast<int>(dataset.num_classes()));
            values["Precision"].push_back(m.precision);
            values["Recall"].push_back(m.recall);
            values["F1"].push_back(m.f1);
        }
    }
    for (const auto& [name, vals] : values) report.metrics[name] = mean_std(vals);

    std::string digest_input = report.task + "|" + report.head + "|" +
                               std::to_string(config.lr) + "|" +
                               std::to_string(config.max_epochs) + "|" +
                               std::to_string(config.patience) + "|" + config.config_digest_extra;
    for (auto s : config.seeds) digest_input += "," + std::to_string(s);
    char digest[17];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(digest_input)));
    report.config_digest = digest;
    return report;
}

MetricsReport run_experiment(const CalliperModel& model, const LabeledPointSet& dataset,
                             const ProbeConfig& config) {
    MatF embeddings = encode_locations(model, dataset.points);
    return run_experiment(embeddings, dataset, config);
}

}  // namespace calliper
