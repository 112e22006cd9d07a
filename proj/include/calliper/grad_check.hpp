#pragma once

#include <functional>
#include <span>
#include <vector>

namespace calliper {

// A scalar-valued map with its analytic gradient, both evaluable in double.
struct DiffFn {
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct GradCheckReport {
    bool pass = true;
    std::size_t worst_index = 0;
    double worst_error = 0.0;  // |analytic - numeric| / max(1, |analytic|, |numeric|)
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central finite differences with h = 1e-5 * max(1, |x_i|), compared
// componentwise against the analytic gradient at `point`.
GradCheckReport grad_check(const DiffFn& f, std::span<const double> point, double rtol);

}  // namespace calliper
