#include "memsim/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace memsim {

std::vector<double> diff1(const std::vector<double>& f, double h) {
    const size_t n = f.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

std::vector<double> diff2(const std::vector<double>& f, double h) {
    const size_t n = f.size();
    std::vector<double> d(n);
    const double h2 = h * h;
    for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    d[0] = (f[0] - 2.0 * f[1] + f[2]) / h2;
    d[n - 1] = (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) / h2;
    return d;
}

double trapezoid(const std::vector<double>& f, double h) {
    double s = 0.5 * (f.front() + f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

double discrete_norm(const GridFunction1D& f, int order, double q) {
    if (order < 0 || order > 2) throw std::invalid_argument("order must be in {0,1,2}");
    if (!(q >= 2.0)) throw std::invalid_argument("q must be in [2,inf)");
    ensure_finite(f.values, "discrete_norm input");

    const double h = f.grid->hx;
    auto power_integral = [&](const std::vector<double>& g) {
        std::vector<double> p(g.size());
        for (size_t i = 0; i < g.size(); ++i) p[i] = std::pow(std::abs(g[i]), q);
        return trapezoid(p, h);
    };

    double total = power_integral(f.values);
    if (order >= 1) total += power_integral(diff1(f.values, h));
    if (order >= 2) total += power_integral(diff2(f.values, h));
    return std::pow(total, 1.0 / q);
}

}  // namespace memsim
