#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fwa::sca {

/// One small-timescale problem over the relaxed storage decision z in [0,1].
/// The objective closes over the tick's flow plans; constraint checking for
/// the rounded binary point reports the violated bound (nullopt = feasible).
struct Problem {
    std::function<double(double)> objective;
    std::function<std::optional<std::string>(int)> binary_infeasibility;
    double rho = 1.0;
    double tol = 1e-6;
    int max_iters = 500;
};

struct IterRecord {
    int iter = 0;
    double z = 0.0;
    double objective = 0.0;
    double proximal = 0.0;
    double step = 0.0;
};

struct Trace {
    std::vector<IterRecord> iters;
};

struct Result {
    double z_relaxed = 0.0;
    int z_binary = 0;
    double objective_relaxed = 0.0;
    double objective_binary = 0.0;
    bool converged = false;
    Trace trace;
};

/// Quadratic-proximal upper bound: F(z) + (rho/2) * ||z - anchor||^2;
/// equals F exactly at the anchor.
double proximal_value(double z, double anchor, const std::function<double(double)>& objective,
                      double rho);

/// One majorization-minimization step: projected-gradient minimizer of the
/// proximal function over the box [0,1].
double sca_step(double anchor, const Problem& p);

/// Iterates sca_step from z0 until the step norm falls below tol or the
/// iteration cap, then rounds to binary with a feasibility-and-objective
/// repair over both branches. Throws when neither branch is feasible.
Result solve(double z0, const Problem& p);

} // namespace fwa::sca
