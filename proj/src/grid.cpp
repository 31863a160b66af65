#include "memsim/grid.hpp"

#include <cmath>

namespace memsim {

GridPtr make_grid(int nx, int nz) {
    auto check = [](int n, const char* name) {
        if (n < 9 || n % 2 == 0) {
            throw std::invalid_argument(std::string(name) + " must be odd >= 9");
        }
    };
    check(nx, "nx");
    check(nz, "nz");

    auto g = std::make_shared<Grid>();
    g->nx = nx;
    g->nz = nz;
    g->hx = 2.0 / (nx - 1);
    g->hz = 1.0 / (nz - 1);
    g->x.resize(static_cast<size_t>(nx));
    g->zp.resize(static_cast<size_t>(nz));
    const int c = (nx - 1) / 2;
    for (int i = 0; i < nx; ++i) {
        g->x[static_cast<size_t>(i)] = static_cast<double>(i - c) / c;
    }
    for (int j = 0; j < nz; ++j) {
        g->zp[static_cast<size_t>(j)] = static_cast<double>(j) / (nz - 1);
    }
    return g;
}

void ensure_finite(const std::vector<double>& v, const std::string& what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error("non-finite value in " + what);
        }
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace memsim
