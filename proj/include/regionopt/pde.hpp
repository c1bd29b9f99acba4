#pragma once

#include <optional>
#include <span>
#include <vector>

#include "regionopt/banded.hpp"
#include "regionopt/grid.hpp"
#include "regionopt/levelset.hpp"

namespace regionopt {

/// Data of the regional harvesting problem
///
///   y_t - d Lap y = a(x) y - H(phi) u y   in the unit square,  Neumann walls,
///
/// together with the penalty weights and descent settings used to choose the
/// harvesting region.
struct ControlProblemParams {
    GridSpec grid;
    double diffusion;            ///< d > 0
    ScalarField growth_rate;     ///< a(x)
    ScalarField initial_density; ///< y0(x) >= 0, not identically zero
    double max_effort;           ///< L > 0, admissible controls satisfy 0 <= u <= L
    double length_weight;        ///< alpha >= 0
    double area_weight;          ///< beta >= 0
    Mollifier mollifier;
    double eps1 = 1e-3;          ///< objective-change tolerance
    double eps2 = 1e-3;          ///< level-set-change tolerance
    double theta0 = 0.05;        ///< descent step

    /// Structural checks shared by every solver: matching grids, d > 0,
    /// L >= 0, nonnegative weights and y0, positive tolerances.
    /// Throws std::invalid_argument naming the violated condition.
    void validate() const;
    /// The modelling hypotheses on top of validate(): L > 0 and max y0 > 0.
    void validate_hypotheses() const;
};

/// lambda = d dt / h^2
double step_lambda(const ControlProblemParams& params);

/// Matrix of one implicit step of the Neumann scheme on the (n-1)^2 interior
/// nodes, rows enumerated q = (i-2)(n-1) + (j-1). Row q has diagonal
/// 1 + c lambda + reaction[q-1], where c in {2, 3, 4} counts the interior
/// neighbours, and -lambda toward each interior neighbour. The boundary ring
/// is eliminated by the copy rule v(1,j) = v(2,j) etc. The rhs is left zero.
///
/// Requires n >= 3 (a 2x2 interior block, all corner rows).
BandedSystem assemble_step_matrix(int n, double lambda, std::span<const double> reaction);

/// Same, with lambda from the params and reaction read from the interior nodes of `reaction`.
BandedSystem assemble_step_matrix(const ControlProblemParams& params, const ScalarField& reaction);

/// Marches the Neumann scheme one level at a time: interior values from the
/// step matrix, boundary ring by the copy rule. The LU factorization is reused
/// while the reaction coefficients stay bitwise identical between calls.
class ImplicitStepper {
public:
    ImplicitStepper(const GridSpec& grid, double lambda);

    /// `reaction` and `rhs` are indexed by interior row; `out` is a full level.
    void step(const std::vector<double>& reaction, const std::vector<double>& rhs, std::span<double> out);

private:
    GridSpec grid_;
    double lambda_;
    std::vector<double> reaction_;
    std::optional<BandedLU> lu_;
};

/// Backward adjoint of the harvesting problem with the bang-bang law
/// substituted through the mollified Heaviside:
///
///   p_t + d Lap p = -a p + L H_eps(phi) (1 + p) H_eps(1 + p),   p(T) = 0,
///
/// marched k = M..1 with the nonlinear source lagged at level k+1.
SpaceTimeField solve_adjoint(const LevelSetFunction& phi, const ControlProblemParams& params);

/// Forward sensitivity system driving the shape derivative:
///
///   r_t - d Lap r = [a - L H_eps(phi) H_eps(1+p) - L H_eps(phi) (1+p) delta_eps(1+p)] r,
///   r(0) = y0,
///
/// marched k = 1..M with the coefficient taken from p at level k+1.
SpaceTimeField solve_sensitivity(const LevelSetFunction& phi, const SpaceTimeField& p,
                                 const ControlProblemParams& params);

/// State equation with the region indicator mollified, H_eps(phi), and the
/// given effort u(x, t) in [0, L]. Implicit Euler, control taken at the new
/// level. Throws std::invalid_argument for inadmissible controls and
/// SolverError if a negative density appears.
SpaceTimeField solve_forward(const LevelSetFunction& phi, const SpaceTimeField& control,
                             const ControlProblemParams& params);

/// As above with an additional source f(x, t) on the right-hand side
/// (manufactured-solution testing). Nonnegativity is not enforced here.
SpaceTimeField solve_forward(const LevelSetFunction& phi, const SpaceTimeField& control,
                             const ControlProblemParams& params, const SpaceTimeField& forcing);

/// u = L where 1 + p >= 0, else 0. The tie 1 + p = 0 resolves to L.
SpaceTimeField bang_bang_control(const SpaceTimeField& p, const ControlProblemParams& params);

/// u = L H_eps(1 + p): the smooth control implied by the adjoint equation.
SpaceTimeField mollified_control(const SpaceTimeField& p, const ControlProblemParams& params);

/// Discrete check of  harvest = -int y0 p(., 0)  for a region.
struct DualityReport {
    double adjoint_term;            ///< int y0 p(., 0)
    double harvest_mollified;       ///< int int H_eps(phi) u y,  u = L H_eps(1+p)
    double harvest_sharp;           ///< same with the bang-bang control
    double discrepancy_mollified;   ///< |harvest_mollified + adjoint_term| / |adjoint_term|
    double discrepancy_sharp;
};

DualityReport duality_check(const LevelSetFunction& phi, const ControlProblemParams& params);

/// Simpson integral of each time level.
std::vector<double> total_mass(const SpaceTimeField& y);

}  // namespace regionopt
