#include "calliper/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace calliper {

GradCheckReport grad_check(const DiffFn& f, std::span<const double> point, double rtol) {
    std::vector<double> x(point.begin(), point.end());
    const std::vector<double> analytic = f.gradient(x);
    GradCheckReport report;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x[i]));
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f.value(x);
        x[i] = orig - h;
        const double fm = f.value(x);
        x[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
        const double err = std::fabs(analytic[i] - numeric) / denom;
        if (err > report.worst_error) {
            report.worst_error = err;
            report.worst_index = i;
            report.worst_analytic = analytic[i];
            report.worst_numeric = numeric;
        }
    }
    report.pass = report.worst_error <= rtol;
    return report;
}

}  // namespace calliper
