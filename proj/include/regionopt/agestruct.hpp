#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "regionopt/banded.hpp"
#include "regionopt/grid.hpp"
#include "regionopt/levelset.hpp"
#include "regionopt/shapeopt.hpp"

namespace regionopt {

/// Age-structured pest model on the unit square
///
///   y_t + y_a - d Lap y + mu(a) y + M(P) y + u y = 0,   P(x, t) = int_0^A y da,
///   y(x, 0, t) = int_0^A beta(a) y(x, a, t) da,        y(x, a, 0) = y0(x, a),
///
/// with Neumann walls and M(s) = m s. Ages run over Na cells of width
/// da = A / Na and time is stepped with dt = da, so one time step moves every
/// cohort exactly one age cell. The last age node a = A is absorbing.
struct AgeModelParams {
    int spatial_n = 20;          ///< spatial intervals per side (even, >= 4)
    double max_age = 1.0;        ///< A
    int age_steps = 20;          ///< Na
    std::function<double(double)> fertility_rate;  ///< beta(a) >= 0
    std::function<double(double)> mortality;       ///< mu(a) >= 0; may be +inf at a = A
    double logistic_slope = 0.0; ///< m in M(s) = m s
    double diffusion = 1.0;      ///< d >= 0
    double max_effort = 1.0;     ///< L >= 0
    double horizon = 1.0;        ///< T, an integer multiple of da
    std::function<double(double, double, double)> initial_density;  ///< y0(x1, x2, a) >= 0

    double age_step() const { return max_age / age_steps; }
    double age(int l) const { return l * age_step(); }
    /// Number of time steps K = T / da.
    int time_steps() const;
    /// Spatial grid (its time axis is unused by the age solvers).
    GridSpec spatial_grid() const;

    /// Checks everything except initial_density (not needed by the Lotka and
    /// eigenvalue analysis). Throws std::invalid_argument naming the violated condition.
    void validate() const;
};

/// y(x, a_l, t_k) for l = 0..Na, k = 0..K over the nodes of a spatial grid.
class AgeTimeField {
public:
    AgeTimeField(const GridSpec& space, int age_steps, int time_steps);

    const GridSpec& grid() const { return grid_; }
    int age_steps() const { return age_steps_; }
    int time_steps() const { return time_steps_; }

    std::span<const double> level(int k, int l) const;
    std::span<double> level(int k, int l);
    ScalarField slice(int k, int l) const;

    double min() const;

private:
    std::size_t offset(int k, int l) const;

    GridSpec grid_;
    int age_steps_;
    int time_steps_;
    std::vector<double> values_;
};

/// Net reproduction at growth exponent r:
///   sum over age nodes (trapezoid) of beta(a) exp(-int_0^a mu - r a).
/// Survival is accumulated by the trapezoid rule and drops to zero from the
/// first node where mu is not finite.
double lotka_function(const AgeModelParams& model, double r);

/// Root r* of lotka_function(r) = 1 by bracketing and bisection.
/// Throws SolverError when beta vanishes on the age grid or no bracket exists.
double lotka_root(const AgeModelParams& model);

/// Interior-node matrix of v -> -d Lap v + L chi v with the Neumann copy
/// closure, chi the sharp indicator of {phi > 0}. Symmetric.
BandedMatrix eigen_operator(const LevelSetFunction& phi, double d, double L);

struct Eigenpair {
    double value;
    std::vector<double> vector;  ///< unit 2-norm, interior ordering
    double residual;             ///< ||A v - value v||_2
    int iterations;
};

/// Smallest eigenpair of eigen_operator by shifted inverse power iteration,
/// stopped when the residual falls below 1e-8 max(|value|, 1).
/// Throws ConvergenceError after 10^4 iterations.
Eigenpair principal_eigenpair(const LevelSetFunction& phi, double d, double L);
double principal_eigenvalue(const LevelSetFunction& phi, double d, double L);

enum class Verdict { Eradicable, NotEradicable, Indeterminate };
std::string_view to_string(Verdict v);

struct EradicabilityReport {
    double r_star;
    double lambda1;
    double margin;  ///< lambda1 - r_star
    Verdict verdict;
    double tolerance;
};

EradicabilityReport eradicability_verdict(const LevelSetFunction& phi, const AgeModelParams& model,
                                          double tolerance = 1e-6);

/// Marches the model with a given effort field u(x) >= 0 held fixed in time.
/// Each step shifts the cohorts one age cell, solves diffusion and reaction
/// implicitly per age level with M(P) lagged at the previous time, and closes
/// with the trapezoid renewal integral. Throws SolverError on a negative density.
AgeTimeField solve_age_structured(const AgeModelParams& model, const ScalarField& effort);

/// u = L on {phi > 0} when control_on, else no harvesting.
AgeTimeField solve_age_structured(const LevelSetFunction& phi, const AgeModelParams& model, bool control_on);

/// P(t_k) = int int y da dx for k = 0..K (trapezoid in age, Simpson in space).
std::vector<double> total_population(const AgeTimeField& y, double age_step);

/// Psi = int int y(x, a, T) + alpha length + beta area under effort L H_eps(phi).
ObjectiveValue evaluate_psi(const LevelSetFunction& phi, const AgeModelParams& model, double length_weight,
                            double area_weight, const Mollifier& m);

/// Adjoint of the population at time T for the given state and effort:
///   r(T) = terminal_value for a < A,  r(A, t) = 0,
/// stepped backward along characteristics with implicit diffusion and the
/// nonlocal terms int r y da and r(x, 0, t) lagged from the later level.
AgeTimeField solve_eradication_adjoint(const AgeTimeField& y, const AgeModelParams& model, const ScalarField& effort,
                                       double terminal_value = 1.0);

/// Sign of the shape-gradient bracket for the eradication region.
enum class SignPolicy {
    /// delta(phi)[alpha curv - beta + L int int r y], curvature implicit.
    Descent,
    /// delta(phi)[-alpha curv + beta - L int int r y], all explicit.
    AsPrinted,
};
std::string_view to_string(SignPolicy p);

struct EradicationDescent {
    double length_weight = 0.0;
    double area_weight = 0.0;
    Mollifier mollifier{1.0};
    double theta0 = 0.05;
    double eps1 = 1e-3;
    double eps2 = 1e-3;
    SignPolicy policy = SignPolicy::Descent;
};

/// L int_0^A int_0^T r y dt da at every node (trapezoid in age and time).
ScalarField eradication_sensitivity(const AgeTimeField& r, const AgeTimeField& y, const AgeModelParams& model);

OptimizationResult optimize_eradication_region(const LevelSetFunction& phi0, const AgeModelParams& model,
                                               const EradicationDescent& descent, const DescentOptions& options = {});

}  // namespace regionopt
