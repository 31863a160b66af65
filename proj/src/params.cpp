#include "memsim/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace memsim {

namespace {
void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

void Params::validate() const {
    require(std::isfinite(eps) && eps > 0.0 && eps <= 1.0, "eps must be in (0,1]");
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(mu) && mu >= 0.0, "mu must be >= 0");
    require(std::isfinite(kappa) && kappa > 0.0 && kappa < 0.5, "kappa must be in (0,1/2)");
    require(std::isfinite(q) && q >= 2.0, "q must be in [2,inf)");
    require(std::isfinite(dt) && dt >= 0.0, "dt must be >= 0");
    require(std::isfinite(t_end) && t_end > 0.0, "t_end must be > 0");
    require(std::isfinite(gap_tol) && gap_tol > 0.0 && gap_tol < 1.0, "gap_tol must be in (0,1)");
    require(std::isfinite(norm_cap) && norm_cap > 0.0, "norm_cap must be > 0");
    require(std::isfinite(lin_tol) && lin_tol > 0.0, "lin_tol must be > 0");
    require(sample_every >= 1, "sample_every must be >= 1");
}

double Params::default_dt(double hx) const {
    return 0.25 * hx * hx / std::max({1.0, lambda, mu});
}

}  // namespace memsim
