#include "fwa/sca.hpp"

#include "fwa/common.hpp"

#include <algorithm>
#include <cmath>

namespace fwa::sca {
namespace {

double clamp01(double z) { return std::clamp(z, 0.0, 1.0); }

double derivative(const std::function<double(double)>& f, double z) {
    // Central difference with the stencil clipped to the box.
    const double h = 1e-6;
    double lo = std::max(0.0, z - h);
    double hi = std::min(1.0, z + h);
    if (hi <= lo) return 0.0;
    return (f(hi) - f(lo)) / (hi - lo);
}

} // namespace

double proximal_value(double z, double anchor, const std::function<double(double)>& objective,
                      double rho) {
    FWA_CHECK(rho > 0.0, "proximal penalty must be positive");
    double diff = z - anchor;
    return objective(z) + 0.5 * rho * diff * diff;
}

double sca_step(double anchor, const Problem& p) {
    FWA_CHECK(p.rho > 0.0, "proximal penalty must be positive");
    double grad = derivative(p.objective, anchor);
    return clamp01(anchor - grad / p.rho);
}

Result solve(double z0, const Problem& p) {
    Result res;
    double z = clamp01(z0);
    double f = p.objective(z);
    res.trace.iters.push_back({0, z, f, f, 0.0});

    for (int it = 1; it <= p.max_iters; ++it) {
        double next = sca_step(z, p);
        double step = std::abs(next - z);
        double f_next = p.objective(next);
        res.trace.iters.push_back({it, next, f_next, proximal_value(next, z, p.objective, p.rho), step});
        z = next;
        f = f_next;
        if (step < p.tol) {
            res.converged = true;
            break;
        }
    }

    res.z_relaxed = z;
    res.objective_relaxed = f;

    // Round with repair: try the thresholded branch first, fall back to the
    // other when infeasible, and keep the better objective when both work.
    int primary = z >= 0.5 ? 1 : 0;
    int secondary = 1 - primary;
    auto feas_primary = p.binary_infeasibility ? p.binary_infeasibility(primary) : std::nullopt;
    auto feas_secondary = p.binary_infeasibility ? p.binary_infeasibility(secondary) : std::nullopt;
    double f_primary = p.objective(static_cast<double>(primary));
    double f_secondary = p.objective(static_cast<double>(secondary));

    if (!feas_primary.has_value() && !feas_secondary.has_value()) {
        res.z_binary = f_secondary < f_primary ? secondary : primary;
    } else if (!feas_primary.has_value()) {
        res.z_binary = primary;
    } else if (!feas_secondary.has_value()) {
        res.z_binary = secondary;
    } else {
        throw InvariantError("no feasible storage decision: z=" + std::to_string(primary) + ": " +
                             *feas_primary + "; z=" + std::to_string(secondary) + ": " + *feas_secondary);
    }
    res.objective_binary = p.objective(static_cast<double>(res.z_binary));
    return res;
}

} // namespace fwa::sca
