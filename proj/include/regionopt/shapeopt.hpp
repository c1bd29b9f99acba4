#pragma once

#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "regionopt/grid.hpp"
#include "regionopt/levelset.hpp"
#include "regionopt/pde.hpp"

namespace regionopt {

/// An objective of the form  data term + alpha * length + beta * area.
struct ObjectiveValue {
    double total;
    double data_term;    ///< int y0 p(., 0) for the harvest problem
    double length_term;  ///< alpha * region_length
    double area_term;    ///< beta * region_area
};

/// J(phi) = int y0 p_phi(., 0) + alpha int delta_eps(phi)|grad phi| + beta int H_eps(phi).
ObjectiveValue evaluate_J(const LevelSetFunction& phi, const ControlProblemParams& params);
/// Same, reusing an adjoint already computed for phi.
ObjectiveValue evaluate_J(const LevelSetFunction& phi, const SpaceTimeField& p, const ControlProblemParams& params);

/// Non-curvature part of the descent speed:
///   -beta + L * int_0^T (1 + p) H_eps(1 + p) r dt
/// with composite Simpson in time.
ScalarField descent_velocity(const LevelSetFunction& phi, const SpaceTimeField& p, const SpaceTimeField& r,
                             const ControlProblemParams& params);

enum class StopReason {
    ObjectiveConverged,  ///< |J(n+1) - J(n)| < eps1
    ObjectiveIncreased,  ///< J(n+1) >= J(n), after any backtracking
    LevelSetConverged,   ///< ||phi(n+1) - phi(n)||_L2 < eps2
    IterationBudget,
};

std::string_view to_string(StopReason reason);

/// One objective evaluation of the descent loop.
struct TraceRecord {
    int iteration;         ///< 1-based evaluation counter
    double objective;
    double data_term;
    double length_term;
    double area_term;
    double region_area;    ///< int H_eps(phi)
    double region_length;  ///< int delta_eps(phi)|grad phi|
    double phi_change;     ///< ||phi_new - phi||_L2 of the step taken after this evaluation; NaN if none
    double step;           ///< theta used to produce the evaluated phi (0 for the initial guess)
    bool accepted;
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;
    StopReason stop_reason = StopReason::IterationBudget;
    int best_iteration = 0;
};

struct DescentOptions {
    int max_iter = 200;
    /// Halve theta and retry when the objective increases; off in paper mode.
    bool backtracking = true;
    int max_backtracks = 5;
    /// Signed-distance reinitialization every k accepted steps; 0 disables.
    int reinit_every = 0;
    double eta = 1e-8;
    /// Called with every evaluated iterate (1-based evaluation counter).
    std::function<void(int, const LevelSetFunction&)> on_evaluate;
};

struct OptimizationResult {
    LevelSetFunction best;
    OptimizationTrace trace;
};

/// L2 norm by Simpson quadrature of the squared nodal difference.
double l2_distance(const ScalarField& a, const ScalarField& b);

/// Generic gated descent loop shared by the harvest and eradication problems.
///
///   0. objective_prev = 1e6, n = 0
///   1. evaluate phi(n)
///   2. stop if |change| < eps1 or the objective did not decrease
///      (with backtracking: halve theta and redo step 4 from the last accepted
///      iterate, at most max_backtracks times, before stopping)
///   3. velocity at the accepted iterate
///   4. phi(n+1) from one semi-implicit step
///   5. stop if ||phi(n+1) - phi(n)||_L2 < eps2, else repeat
///
/// `velocity` is always called right after `evaluate` on the same phi, so it
/// may reuse state captured by `evaluate`. Returns the lowest-objective iterate.
struct DescentProblem {
    std::function<ObjectiveValue(const LevelSetFunction&)> evaluate;
    std::function<ScalarField(const LevelSetFunction&)> velocity;
    Mollifier mollifier;
    double curvature_weight;  ///< implicit alpha passed to evolve_phi
    double theta0;
    double eps1;
    double eps2;
};

OptimizationResult run_descent(const LevelSetFunction& phi0, const DescentProblem& problem,
                               const DescentOptions& options);

/// Harvest-region optimization for the params of Section-2 type problems.
OptimizationResult optimize_region(const LevelSetFunction& phi0, const ControlProblemParams& params,
                                   const DescentOptions& options = {});

/// trace.csv: header plus one row per evaluation, 17 significant digits.
void write_trace_csv(std::ostream& out, const OptimizationTrace& trace);

}  // namespace regionopt
