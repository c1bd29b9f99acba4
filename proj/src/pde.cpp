#include "regionopt/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regionopt/errors.hpp"

namespace regionopt {

void ControlProblemParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("ControlProblemParams: " + what); };
    if (!(growth_rate.grid() == grid)) fail("growth rate a is not on the problem grid");
    if (!(initial_density.grid() == grid)) fail("initial density y0 is not on the problem grid");
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) fail("diffusion d must be positive");
    if (!(max_effort >= 0.0) || !std::isfinite(max_effort)) fail("maximal effort L must be nonnegative");
    if (!(length_weight >= 0.0)) fail("length weight alpha must be nonnegative");
    if (!(area_weight >= 0.0)) fail("area weight beta must be nonnegative");
    if (initial_density.min() < 0.0) fail("initial density y0 must be nonnegative");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) fail("convergence tolerances eps1, eps2 must be positive");
    if (!(theta0 > 0.0)) fail("descent step theta0 must be positive");
}

void ControlProblemParams::validate_hypotheses() const
{
    validate();
    if (!(max_effort > 0.0)) throw std::invalid_argument("ControlProblemParams: maximal effort L must be positive");
    if (!(initial_density.max() > 0.0)) {
        throw std::invalid_argument("ControlProblemParams: initial density y0 must not vanish identically");
    }
}

double step_lambda(const ControlProblemParams& params)
{
    return params.diffusion * params.grid.dt() / (params.grid.h() * params.grid.h());
}

BandedSystem assemble_step_matrix(int n, double lambda, std::span<const double> reaction)
{
    if (n < 3) throw std::invalid_argument("assemble_step_matrix: need N >= 3, got N = " + std::to_string(n));
    const std::size_t m = static_cast<std::size_t>(n - 1);
    const std::size_t dim = m * m;
    if (reaction.size() != dim) throw std::invalid_argument("assemble_step_matrix: reaction size mismatch");

    BandedSystem sys{BandedMatrix(dim, m, m), std::vector<double>(dim, 0.0)};
    auto row_of = [m](int i, int j) { return static_cast<std::size_t>(i - 2) * m + static_cast<std::size_t>(j - 2); };
    for (int i = 2; i <= n; ++i) {
        for (int j = 2; j <= n; ++j) {
            const std::size_t q = row_of(i, j);
            int neighbours = 0;
            auto couple = [&](int ni, int nj) {
                if (ni < 2 || ni > n || nj < 2 || nj > n) return;
                sys.matrix.at(q, row_of(ni, nj)) = -lambda;
                ++neighbours;
            };
            couple(i - 1, j);
            couple(i + 1, j);
            couple(i, j - 1);
            couple(i, j + 1);
            sys.matrix.at(q, q) = 1.0 + neighbours * lambda + reaction[q];
        }
    }
    return sys;
}

BandedSystem assemble_step_matrix(const ControlProblemParams& params, const ScalarField& reaction)
{
    const GridSpec& g = params.grid;
    if (!(reaction.grid() == g)) throw std::invalid_argument("assemble_step_matrix: grid mismatch");
    std::vector<double> interior(g.interior_count());
    for (int i = 2; i <= g.n(); ++i) {
        for (int j = 2; j <= g.n(); ++j) interior[g.interior_index(i, j)] = reaction(i, j);
    }
    return assemble_step_matrix(g.n(), step_lambda(params), interior);
}

ImplicitStepper::ImplicitStepper(const GridSpec& grid, double lambda) : grid_(grid), lambda_(lambda) {}

void ImplicitStepper::step(const std::vector<double>& reaction, const std::vector<double>& rhs, std::span<double> out)
{
    if (!lu_ || reaction != reaction_) {
        reaction_ = reaction;
        lu_.emplace(assemble_step_matrix(grid_.n(), lambda_, reaction_).matrix);
    }
    const auto x = lu_->solve(rhs);
    for (int i = 2; i <= grid_.n(); ++i) {
        for (int j = 2; j <= grid_.n(); ++j) out[grid_.node_index(i, j)] = x[grid_.interior_index(i, j)];
    }
    complete_neumann_copy(grid_, out);
}

namespace {

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what)
{
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

SpaceTimeField march_forward(const LevelSetFunction& phi, const SpaceTimeField& control,
                             const ControlProblemParams& params, const SpaceTimeField* forcing)
{
    params.validate();
    const GridSpec& g = params.grid;
    require_same_grid(phi.grid(), g, "solve_forward");
    require_same_grid(control.grid(), g, "solve_forward");
    if (forcing) require_same_grid(forcing->grid(), g, "solve_forward");
    const double L = params.max_effort;
    for (double u : control.values()) {
        if (!(u >= 0.0) || u > L) {
            throw std::invalid_argument("solve_forward: control must satisfy 0 <= u <= L (got " + std::to_string(u) + ")");
        }
    }

    const double dt = g.dt();
    const ScalarField region = heaviside_field(phi, params.mollifier);
    SpaceTimeField y(g);
    y.set_level(1, params.initial_density);

    ImplicitStepper march(g, step_lambda(params));
    std::vector<double> reaction(g.interior_count());
    std::vector<double> rhs(g.interior_count());
    for (int k = 1; k <= g.m(); ++k) {
        for (int i = 2; i <= g.n(); ++i) {
            for (int j = 2; j <= g.n(); ++j) {
                const std::size_t q = g.interior_index(i, j);
                reaction[q] = dt * (-params.growth_rate(i, j) + region(i, j) * control(i, j, k + 1));
                rhs[q] = y(i, j, k) + (forcing ? dt * (*forcing)(i, j, k + 1) : 0.0);
            }
        }
        march.step(reaction, rhs, y.level(k + 1));
        if (!forcing) {
            for (double v : y.level(k + 1)) {
                if (v < 0.0) {
                    throw SolverError("solve_forward: negative density at time level " + std::to_string(k + 1) +
                                      " (time step too large for the growth rate?)");
                }
            }
        }
    }
    return y;
}

}  // namespace

SpaceTimeField solve_adjoint(const LevelSetFunction& phi, const ControlProblemParams& params)
{
    params.validate();
    const GridSpec& g = params.grid;
    require_same_grid(phi.grid(), g, "solve_adjoint");
    const double dt = g.dt();
    const double L = params.max_effort;
    const Mollifier& m = params.mollifier;
    const ScalarField region = heaviside_field(phi, m);

    SpaceTimeField p(g);  // p at level M+1 is zero
    ImplicitStepper march(g, step_lambda(params));
    std::vector<double> reaction(g.interior_count());
    for (int i = 2; i <= g.n(); ++i) {
        for (int j = 2; j <= g.n(); ++j) reaction[g.interior_index(i, j)] = -dt * params.growth_rate(i, j);
    }
    std::vector<double> rhs(g.interior_count());
    for (int k = g.m(); k >= 1; --k) {
        for (int i = 2; i <= g.n(); ++i) {
            for (int j = 2; j <= g.n(); ++j) {
                const double next = p(i, j, k + 1);
                const double source = L * region(i, j) * (1.0 + next) * heaviside_mollified(1.0 + next, m);
                rhs[g.interior_index(i, j)] = next - dt * source;
            }
        }
        march.step(reaction, rhs, p.level(k));
    }
    return p;
}

SpaceTimeField solve_sensitivity(const LevelSetFunction& phi, const SpaceTimeField& p,
                                 const ControlProblemParams& params)
{
    params.validate();
    const GridSpec& g = params.grid;
    require_same_grid(phi.grid(), g, "solve_sensitivity");
    require_same_grid(p.grid(), g, "solve_sensitivity");
    const double dt = g.dt();
    const double L = params.max_effort;
    const Mollifier& m = params.mollifier;
    const ScalarField region = heaviside_field(phi, m);

    SpaceTimeField r(g);
    r.set_level(1, params.initial_density);
    ImplicitStepper march(g, step_lambda(params));
    std::vector<double> reaction(g.interior_count());
    std::vector<double> rhs(g.interior_count());
    for (int k = 1; k <= g.m(); ++k) {
        for (int i = 2; i <= g.n(); ++i) {
            for (int j = 2; j <= g.n(); ++j) {
                const std::size_t q = g.interior_index(i, j);
                const double s = 1.0 + p(i, j, k + 1);
                const double coupling =
                    L * region(i, j) * heaviside_mollified(s, m) + L * region(i, j) * s * delta_mollified(s, m);
                reaction[q] = dt * (-params.growth_rate(i, j) + coupling);
                rhs[q] = r(i, j, k);
            }
        }
        march.step(reaction, rhs, r.level(k + 1));
    }
    return r;
}

SpaceTimeField solve_forward(const LevelSetFunction& phi, const SpaceTimeField& control,
                             const ControlProblemParams& params)
{
    return march_forward(phi, control, params, nullptr);
}

SpaceTimeField solve_forward(const LevelSetFunction& phi, const SpaceTimeField& control,
                             const ControlProblemParams& params, const SpaceTimeField& forcing)
{
    return march_forward(phi, control, params, &forcing);
}

SpaceTimeField bang_bang_control(const SpaceTimeField& p, const ControlProblemParams& params)
{
    const GridSpec& g = p.grid();
    SpaceTimeField u(g);
    for (int k = 1; k <= g.m() + 1; ++k) {
        auto src = p.level(k);
        auto dst = u.level(k);
        for (std::size_t n = 0; n < src.size(); ++n) dst[n] = 1.0 + src[n] >= 0.0 ? params.max_effort : 0.0;
    }
    return u;
}

SpaceTimeField mollified_control(const SpaceTimeField& p, const ControlProblemParams& params)
{
    const GridSpec& g = p.grid();
    SpaceTimeField u(g);
    for (int k = 1; k <= g.m() + 1; ++k) {
        auto src = p.level(k);
        auto dst = u.level(k);
        for (std::size_t n = 0; n < src.size(); ++n) {
            dst[n] = params.max_effort * heaviside_mollified(1.0 + src[n], params.mollifier);
        }
    }
    return u;
}

namespace {

double harvest(const LevelSetFunction& phi, const SpaceTimeField& u, const SpaceTimeField& y,
               const ControlProblemParams& params)
{
    const GridSpec& g = params.grid;
    const ScalarField region = heaviside_field(phi, params.mollifier);
    SpaceTimeField rate(g);
    for (int k = 1; k <= g.m() + 1; ++k) {
        auto uk = u.level(k);
        auto yk = y.level(k);
        auto out = rate.level(k);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] = region.values()[n] * uk[n] * yk[n];
    }
    return space_time_integral(rate);
}

}  // namespace

DualityReport duality_check(const LevelSetFunction& phi, const ControlProblemParams& params)
{
    const SpaceTimeField p = solve_adjoint(phi, params);
    ScalarField weighted = p.slice(1);
    for (std::size_t n = 0; n < weighted.values().size(); ++n) {
        weighted.values()[n] *= params.initial_density.values()[n];
    }
    DualityReport rep{};
    rep.adjoint_term = simpson_integral_2d(weighted);

    const SpaceTimeField u_smooth = mollified_control(p, params);
    rep.harvest_mollified = harvest(phi, u_smooth, solve_forward(phi, u_smooth, params), params);
    const SpaceTimeField u_sharp = bang_bang_control(p, params);
    rep.harvest_sharp = harvest(phi, u_sharp, solve_forward(phi, u_sharp, params), params);

    const double scale = std::abs(rep.adjoint_term);
    auto relative = [scale](double gap) {
        if (scale > 0.0) return gap / scale;
        return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };
    rep.discrepancy_mollified = relative(std::abs(rep.harvest_mollified + rep.adjoint_term));
    rep.discrepancy_sharp = relative(std::abs(rep.harvest_sharp + rep.adjoint_term));
    return rep;
}

std::vector<double> total_mass(const SpaceTimeField& y)
{
    const GridSpec& g = y.grid();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.m() + 1));
    for (int k = 1; k <= g.m() + 1; ++k) out.push_back(simpson_integral_2d(g, y.level(k)));
    return out;
}

}  // namespace regionopt
