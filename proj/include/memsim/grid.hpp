// Uniform tensor grid on the fixed rectangle Omega = (-1,1) x (0,1) and the
// discrete function containers used throughout the library.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

struct Grid {
    int nx = 0;          // node count in x over [-1,1], odd, >= 9
    int nz = 0;          // node count in z' over [0,1], odd, >= 9
    double hx = 0.0;     // 2/(nx-1)
    double hz = 0.0;     // 1/(nz-1)
    std::vector<double> x;   // x_0 = -1, x_{nx-1} = +1, x mid = 0 exactly
    std::vector<double> zp;  // z'_0 = 0, z'_{nz-1} = 1

    int center_index() const { return (nx - 1) / 2; }
    int mirror(int i) const { return nx - 1 - i; }
};

using GridPtr = std::shared_ptr<const Grid>;

// Nodes are built as (i-c)/c with integer c=(nx-1)/2 so that x=0 lands on a
// node and mirrored coordinates negate exactly in floating point.
GridPtr make_grid(int nx, int nz);

enum class Role { displacement, forcing, residual };

struct GridFunction1D {
    GridPtr grid;
    std::vector<double> values;
    Role role = Role::displacement;

    GridFunction1D() = default;
    GridFunction1D(GridPtr g, double fill = 0.0, Role r = Role::displacement)
        : grid(std::move(g)), values(grid->nx, fill), role(r) {}

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

// Scalar field on the fixed rectangle, row-major over x columns: (i,j) with
// i in [0,nx) and j in [0,nz).
struct Field2D {
    GridPtr grid;
    std::vector<double> values;

    Field2D() = default;
    explicit Field2D(GridPtr g, double fill = 0.0)
        : grid(std::move(g)),
          values(static_cast<size_t>(grid->nx) * grid->nz, fill) {}

    double& at(int i, int j) { return values[static_cast<size_t>(i) * grid->nz + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * grid->nz + j]; }
};

// Throws std::runtime_error naming `what` if any entry is NaN/Inf.
void ensure_finite(const std::vector<double>& v, const std::string& what);

double max_abs(const std::vector<double>& v);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace memsim
