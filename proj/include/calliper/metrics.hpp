#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "calliper/matrix.hpp"

namespace calliper {

struct ClassificationMetrics {
    double precision = 0.0;  // macro
    double recall = 0.0;
    double f1 = 0.0;
};

// Macro-averaged precision/recall/F1 over all `num_classes` classes, with
// 0/0 defined as 0 for every per-class ratio.
ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> truth, int num_classes);

struct DistributionMetrics {
    double l1 = 0.0;         // mean over rows of sum_k |pred - truth|
    double chebyshev = 0.0;  // mean over rows of max_k |pred - truth|
    double kl = 0.0;         // mean over rows of sum_k truth * ln(truth/pred)
};

// Rows must each sum to 1 within 1e-6. For KL the prediction is clamped to
// >= 1e-8 and renormalized; 0 * ln(0/x) is taken as 0.
DistributionMetrics distribution_metrics(const MatD& pred, const MatD& truth);

struct MetricStat {
    double mean = 0.0;
    double std = 0.0;
};

// Per-seed aggregate of a downstream experiment.
struct MetricsReport {
    std::string task;  // "classification" | "distribution"
    std::string head;  // "linear" | "mlp"
    std::vector<std::uint64_t> seeds;
    std::map<std::string, MetricStat> metrics;
    std::string config_digest;

    std::string to_json() const;
};

MetricStat mean_std(std::span<const double> values);

}  // namespace calliper
