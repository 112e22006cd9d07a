#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "calliper/errors.hpp"

namespace calliper {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a flat list of parameter tensors.
template <class T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void init(const std::vector<std::span<T>>& params) {
        m_.clear();
        v_.clear();
        for (const auto& p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
        step_ = 0;
    }

    // Moments are kept in double regardless of T so a float run and its
    // double shadow share the same update rule.
    void update(const std::vector<std::span<T>>& params,
                const std::vector<std::span<const T>>& grads) {
        if (params.size() != m_.size() || grads.size() != params.size()) {
            throw ShapeMismatchError("adam: parameter/gradient list mismatch");
        }
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t t = 0; t < params.size(); ++t) {
            auto p = params[t];
            auto g = grads[t];
            if (p.size() != m_[t].size() || g.size() != p.size()) {
                throw ShapeMismatchError("adam: tensor size mismatch");
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double gi = static_cast<double>(g[i]);
                m_[t][i] = cfg_.beta1 * m_[t][i] + (1.0 - cfg_.beta1) * gi;
                v_[t][i] = cfg_.beta2 * v_[t][i] + (1.0 - cfg_.beta2) * gi * gi;
                const double mhat = m_[t][i] / bc1;
                const double vhat = v_[t][i] / bc2;
                p[i] -= static_cast<T>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
    }

    std::int64_t step() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace calliper
