#include "calliper/metrics.hpp"

#include <cmath>

#include "calliper/errors.hpp"
#include "json.hpp"

namespace calliper {

ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> truth, int num_classes) {
    if (pred.size() != truth.size()) {
        throw ShapeMismatchError("classification_metrics: pred/truth length mismatch");
    }
    if (num_classes <= 0) throw LabelOutOfRangeError("num_classes must be positive");
    std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes) {
            throw LabelOutOfRangeError("label outside [0, " + std::to_string(num_classes) +
                                       ") at index " + std::to_string(i));
        }
        if (pred[i] == truth[i]) {
            tp[pred[i]] += 1.0;
        } else {
            fp[pred[i]] += 1.0;
            fn[truth[i]] += 1.0;
        }
    }
    ClassificationMetrics m;
    for (int c = 0; c < num_classes; ++c) {
        const double p = tp[c] + fp[c] > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        const double r = tp[c] + fn[c] > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        m.precision += p;
        m.recall += r;
        m.f1 += f;
    }
    m.precision /= num_classes;
    m.recall /= num_classes;
    m.f1 /= num_classes;
    return m;
}

DistributionMetrics distribution_metrics(const MatD& pred, const MatD& truth) {
    if (pred.rows != truth.rows || pred.cols != truth.cols) {
        throw ShapeMismatchError("distribution_metrics: shape mismatch");
    }
    if (pred.rows == 0) return {};
    constexpr double kEps = 1e-8;
    DistributionMetrics m;
    for (std::size_t i = 0; i < pred.rows; ++i) {
        double pred_sum = 0.0, truth_sum = 0.0;
        for (std::size_t k = 0; k < pred.cols; ++k) {
            if (pred(i, k) < 0.0 || truth(i, k) < 0.0 || !std::isfinite(pred(i, k)) ||
                !std::isfinite(truth(i, k))) {
                throw NotADistributionError(i, "negative or non-finite probability");
            }
            pred_sum += pred(i, k);
            truth_sum += truth(i, k);
        }
        if (std::fabs(pred_sum - 1.0) > 1e-6 || std::fabs(truth_sum - 1.0) > 1e-6) {
            throw NotADistributionError(i, "row does not sum to 1");
        }
        double l1 = 0.0, cheb = 0.0, kl = 0.0;
        double clamped_sum = 0.0;
        bool clamped = false;
        for (std::size_t k = 0; k < pred.cols; ++k) {
            const double diff = std::fabs(pred(i, k) - truth(i, k));
            l1 += diff;
            cheb = std::max(cheb, diff);
            clamped |= pred(i, k) < kEps;
            clamped_sum += std::max(pred(i, k), kEps);
        }
        // Renormalize only when the clamp moved mass; otherwise KL(p,p)
        // stays exactly zero.
        for (std::size_t k = 0; k < pred.cols; ++k) {
            const double y = truth(i, k);
            if (y > 0.0) {
                const double q =
                    clamped ? std::max(pred(i, k), kEps) / clamped_sum : pred(i, k);
                kl += y * std::log(y / q);
            }
        }
        m.l1 += l1;
        m.chebyshev += cheb;
        m.kl += kl;
    }
    const double n = static_cast<double>(pred.rows);
    m.l1 /= n;
    m.chebyshev /= n;
    m.kl /= n;
    return m;
}

MetricStat mean_std(std::span<const double> values) {
    MetricStat s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["head"] = head;
    j["seeds"] = seeds;
    nlohmann::json metrics_json = nlohmann::json::object();
    for (const auto& [name, stat] : metrics) {
        metrics_json[name] = {{"mean", stat.mean}, {"std", stat.std}};
    }
    j["metrics"] = metrics_json;
    j["config_digest"] = config_digest;
    return j.dump(2) + "\n";
}

}  // namespace calliper
