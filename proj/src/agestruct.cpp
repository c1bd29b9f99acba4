#include "regionopt/agestruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "regionopt/errors.hpp"
#include "regionopt/pde.hpp"

namespace regionopt {

int AgeModelParams::time_steps() const
{
    const double ratio = horizon / age_step();
    const double k = std::round(ratio);
    if (!(k >= 1.0) || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument("AgeModelParams: horizon T must be a positive integer multiple of the age step A/Na");
    }
    return static_cast<int>(k);
}

GridSpec AgeModelParams::spatial_grid() const
{
    return GridSpec(spatial_n, 2, 1.0);
}

void AgeModelParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("AgeModelParams: " + what); };
    (void)spatial_grid();
    if (!(max_age > 0.0) || !std::isfinite(max_age)) fail("maximal age A must be positive");
    if (age_steps < 2) fail("age steps Na must be at least 2");
    if (!fertility_rate) fail("fertility rate beta(a) is not set");
    if (!mortality) fail("mortality mu(a) is not set");
    if (!(logistic_slope >= 0.0) || !std::isfinite(logistic_slope)) fail("logistic slope m must be nonnegative");
    if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) fail("diffusion d must be nonnegative");
    if (!(max_effort >= 0.0) || !std::isfinite(max_effort)) fail("maximal effort L must be nonnegative");
    (void)time_steps();
    for (int l = 0; l <= age_steps; ++l) {
        const double a = age(l);
        const double b = fertility_rate(a);
        if (!(b >= 0.0) || !std::isfinite(b)) fail("fertility rate must be finite and nonnegative, beta(" + std::to_string(a) + ") = " + std::to_string(b));
        const double mu = mortality(a);
        if (!(mu >= 0.0)) fail("mortality must be nonnegative, mu(" + std::to_string(a) + ") = " + std::to_string(mu));
        if (l < age_steps && !std::isfinite(mu)) fail("mortality must be finite below the maximal age");
    }
}

// ---------------------------------------------------------------------------

AgeTimeField::AgeTimeField(const GridSpec& space, int age_steps, int time_steps)
    : grid_(space),
      age_steps_(age_steps),
      time_steps_(time_steps),
      values_(static_cast<std::size_t>(age_steps + 1) * static_cast<std::size_t>(time_steps + 1) * space.node_count(),
              0.0)
{
    if (age_steps < 1 || time_steps < 1) throw std::invalid_argument("AgeTimeField: need at least one age and time step");
}

std::size_t AgeTimeField::offset(int k, int l) const
{
    if (k < 0 || k > time_steps_ || l < 0 || l > age_steps_) {
        throw std::out_of_range("AgeTimeField: level (k = " + std::to_string(k) + ", l = " + std::to_string(l) +
                                ") out of range");
    }
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(age_steps_ + 1) + static_cast<std::size_t>(l)) *
           grid_.node_count();
}

std::span<const double> AgeTimeField::level(int k, int l) const
{
    return std::span<const double>(values_).subspan(offset(k, l), grid_.node_count());
}

std::span<double> AgeTimeField::level(int k, int l)
{
    return std::span<double>(values_).subspan(offset(k, l), grid_.node_count());
}

ScalarField AgeTimeField::slice(int k, int l) const
{
    auto v = level(k, l);
    return ScalarField(grid_, std::vector<double>(v.begin(), v.end()));
}

double AgeTimeField::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------

namespace {

/// exp(-int_0^{a_l} mu) at every age node, cumulative trapezoid.
std::vector<double> survival(const AgeModelParams& model)
{
    const int na = model.age_steps;
    const double da = model.age_step();
    std::vector<double> s(static_cast<std::size_t>(na + 1), 0.0);
    double integral = 0.0;
    double prev = model.mortality(0.0);
    s[0] = std::isfinite(prev) ? 1.0 : 0.0;
    for (int l = 1; l <= na; ++l) {
        const double mu = model.mortality(model.age(l));
        if (!std::isfinite(mu) || !std::isfinite(prev)) break;
        integral += 0.5 * da * (prev + mu);
        s[static_cast<std::size_t>(l)] = std::exp(-integral);
        prev = mu;
    }
    return s;
}

/// Trapezoid over age of f(l), one value per node.
template <class F>
void age_trapezoid(int na, double da, std::span<double> out, F&& level_value)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (int l = 0; l <= na; ++l) {
        const double w = (l == 0 || l == na) ? 0.5 * da : da;
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += w * level_value(l, n);
    }
}

void require_spatial_match(const GridSpec& g, const AgeModelParams& model, const char* what)
{
    if (g.n() != model.spatial_n) {
        throw std::invalid_argument(std::string(what) + ": field has N = " + std::to_string(g.n()) +
                                    " but the model uses N = " + std::to_string(model.spatial_n));
    }
}

std::vector<double> interior_of(const GridSpec& g, std::span<const double> level)
{
    std::vector<double> out(g.interior_count());
    for (int i = 2; i <= g.n(); ++i) {
        for (int j = 2; j <= g.n(); ++j) out[g.interior_index(i, j)] = level[g.node_index(i, j)];
    }
    return out;
}

}  // namespace

double lotka_function(const AgeModelParams& model, double r)
{
    const std::vector<double> s = survival(model);
    const int na = model.age_steps;
    const double da = model.age_step();
    double sum = 0.0;
    for (int l = 0; l <= na; ++l) {
        const double a = model.age(l);
        const double w = (l == 0 || l == na) ? 0.5 * da : da;
        const double sl = s[static_cast<std::size_t>(l)];
        if (sl == 0.0) continue;
        sum += w * model.fertility_rate(a) * sl * std::exp(-r * a);
    }
    return sum;
}

double lotka_root(const AgeModelParams& model)
{
    model.validate();
    auto f = [&](double r) { return lotka_function(model, r) - 1.0; };

    bool any_fertile = false;
    const std::vector<double> s = survival(model);
    for (int l = 0; l <= model.age_steps; ++l) {
        if (model.fertility_rate(model.age(l)) > 0.0 && s[static_cast<std::size_t>(l)] > 0.0 && l > 0) any_fertile = true;
    }
    if (!any_fertile) {
        throw SolverError("lotka_root: no reproduction after age 0 on the age grid (net reproduction vanishes for every r)");
    }

    double lo = -1.0;
    double hi = 1.0;
    for (int n = 0; f(hi) > 0.0; ++n) {
        if (n > 60) throw SolverError("lotka_root: cannot bracket the root from above");
        lo = hi;
        hi *= 2.0;
    }
    for (int n = 0; f(lo) < 0.0; ++n) {
        if (n > 60) throw SolverError("lotka_root: cannot bracket the root from below");
        hi = lo;
        lo *= 2.0;
    }
    for (int n = 0; n < 400; ++n) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = f(mid);
        if (v == 0.0) return mid;
        if (v > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double root = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
    if (!(std::abs(f(root)) <= 1e-10)) {
        throw SolverError("lotka_root: bisection stalled with residual " + std::to_string(f(root)));
    }
    return root;
}

// ---------------------------------------------------------------------------

BandedMatrix eigen_operator(const LevelSetFunction& phi, double d, double L)
{
    if (!(d >= 0.0) || !(L >= 0.0)) throw std::invalid_argument("eigen_operator: d and L must be nonnegative");
    const GridSpec& g = phi.grid();
    std::vector<double> diag(g.interior_count());
    for (int i = 2; i <= g.n(); ++i) {
        for (int j = 2; j <= g.n(); ++j) diag[g.interior_index(i, j)] = (phi.inside(i, j) ? L : 0.0) - 1.0;
    }
    // assemble_step_matrix puts 1 + c lambda + reaction on the diagonal; the -1 above cancels the identity.
    return assemble_step_matrix(g.n(), d / (g.h() * g.h()), diag).matrix;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

}  // namespace

Eigenpair principal_eigenpair(const LevelSetFunction& phi, double d, double L)
{
    const BandedMatrix a = eigen_operator(phi, d, L);
    const std::size_t n = a.size();

    auto shifted = [&](double sigma) {
        BandedMatrix s = a;
        for (std::size_t q = 0; q < n; ++q) s.at(q, q) -= sigma;
        return BandedLU(s, 0.0);
    };
    std::optional<BandedLU> lu;
    try {
        lu.emplace(shifted(-1e-12));
    } catch (const SolverError&) {
        lu.emplace(shifted(-1e-8 * std::max(1.0, a.norm_inf())));
    }

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    constexpr int kMaxIterations = 10000;
    double value = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= kMaxIterations; ++it) {
        std::vector<double> x = lu->solve(v);
        const double norm = std::sqrt(dot(x, x));
        if (!(norm > 0.0) || !std::isfinite(norm)) throw SolverError("principal_eigenpair: inverse iteration broke down");
        for (std::size_t q = 0; q < n; ++q) v[q] = x[q] / norm;
        const std::vector<double> av = a.multiply(v);
        value = dot(v, av);
        double r2 = 0.0;
        for (std::size_t q = 0; q < n; ++q) r2 += (av[q] - value * v[q]) * (av[q] - value * v[q]);
        residual = std::sqrt(r2);
        if (residual <= 1e-8 * std::max(std::abs(value), 1.0)) return Eigenpair{value, v, residual, it};
    }
    throw ConvergenceError("principal_eigenpair: no convergence after " + std::to_string(kMaxIterations) +
                           " inverse iterations (residual " + std::to_string(residual) + ")");
}

double principal_eigenvalue(const LevelSetFunction& phi, double d, double L)
{
    return principal_eigenpair(phi, d, L).value;
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::Eradicable: return "Eradicable";
    case Verdict::NotEradicable: return "NotEradicable";
    case Verdict::Indeterminate: return "Indeterminate";
    }
    return "unknown";
}

EradicabilityReport eradicability_verdict(const LevelSetFunction& phi, const AgeModelParams& model, double tolerance)
{
    require_spatial_match(phi.grid(), model, "eradicability_verdict");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("eradicability_verdict: tolerance must be nonnegative");
    EradicabilityReport rep{};
    rep.r_star = lotka_root(model);
    rep.lambda1 = principal_eigenvalue(phi, model.diffusion, model.max_effort);
    rep.margin = rep.lambda1 - rep.r_star;
    rep.tolerance = tolerance;
    if (rep.margin > tolerance) {
        rep.verdict = Verdict::Eradicable;
    } else if (rep.margin < -tolerance) {
        rep.verdict = Verdict::NotEradicable;
    } else {
        rep.verdict = Verdict::Indeterminate;
    }
    return rep;
}

// ---------------------------------------------------------------------------

AgeTimeField solve_age_structured(const AgeModelParams& model, const ScalarField& effort)
{
    model.validate();
    if (!model.initial_density) throw std::invalid_argument("solve_age_structured: initial density y0(x, a) is not set");
    const GridSpec g = model.spatial_grid();
    require_spatial_match(effort.grid(), model, "solve_age_structured");
    if (effort.min() < 0.0) throw std::invalid_argument("solve_age_structured: effort must be nonnegative");

    const int na = model.age_steps;
    const int nk = model.time_steps();
    const double da = model.age_step();
    const std::size_t nodes = g.node_count();

    AgeTimeField y(g, na, nk);
    for (int l = 0; l < na; ++l) {
        const double a = model.age(l);
        auto lvl = y.level(0, l);
        for (int i = 1; i <= g.n() + 1; ++i) {
            for (int j = 1; j <= g.n() + 1; ++j) {
                const double v = model.initial_density(g.x(i), g.x(j), a);
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    throw std::invalid_argument("solve_age_structured: initial density must be finite and nonnegative");
                }
                lvl[g.node_index(i, j)] = v;
            }
        }
    }

    std::vector<double> mu(static_cast<std::size_t>(na + 1)), beta(static_cast<std::size_t>(na + 1));
    for (int l = 0; l <= na; ++l) {
        mu[static_cast<std::size_t>(l)] = l < na ? model.mortality(model.age(l)) : 0.0;
        beta[static_cast<std::size_t>(l)] = model.fertility_rate(model.age(l));
    }
    const double renewal_denominator = 1.0 - 0.5 * da * beta[0];
    if (!(renewal_denominator > 0.0)) {
        throw SolverError("solve_age_structured: renewal condition unsolvable (A/Na * beta(0) / 2 >= 1); refine the age grid");
    }

    const double lambda = model.diffusion * da / (g.h() * g.h());
    std::vector<ImplicitStepper> steppers;
    steppers.reserve(static_cast<std::size_t>(na));
    for (int l = 0; l < na; ++l) steppers.emplace_back(g, lambda);

    const std::vector<double> u_interior = interior_of(g, effort.values());
    std::vector<double> pop(nodes);
    std::vector<double> reaction(g.interior_count());
    for (int k = 0; k < nk; ++k) {
        age_trapezoid(na, da, pop, [&](int l, std::size_t n) { return y.level(k, l)[n]; });
        const std::vector<double> pop_interior = interior_of(g, pop);
        for (int l = 1; l < na; ++l) {
            for (std::size_t q = 0; q < reaction.size(); ++q) {
                reaction[q] = da * (mu[static_cast<std::size_t>(l)] + model.logistic_slope * pop_interior[q] + u_interior[q]);
            }
            steppers[static_cast<std::size_t>(l)].step(reaction, interior_of(g, y.level(k, l - 1)), y.level(k + 1, l));
        }
        auto newborn = y.level(k + 1, 0);
        for (std::size_t n = 0; n < nodes; ++n) {
            double s = 0.0;
            for (int l = 1; l < na; ++l) s += beta[static_cast<std::size_t>(l)] * y.level(k + 1, l)[n];
            newborn[n] = da * s / renewal_denominator;
        }
        for (int l = 0; l <= na; ++l) {
            for (double v : y.level(k + 1, l)) {
                if (v < 0.0) {
                    throw SolverError("solve_age_structured: negative density at time step " + std::to_string(k + 1) +
                                      ", age level " + std::to_string(l));
                }
            }
        }
    }
    return y;
}

AgeTimeField solve_age_structured(const LevelSetFunction& phi, const AgeModelParams& model, bool control_on)
{
    require_spatial_match(phi.grid(), model, "solve_age_structured");
    ScalarField effort(model.spatial_grid());
    if (control_on) {
        const ScalarField chi = sharp_indicator(phi);
        effort = ScalarField(model.spatial_grid(), std::vector<double>(chi.values().begin(), chi.values().end()));
        effort *= model.max_effort;
    }
    return solve_age_structured(model, effort);
}

std::vector<double> total_population(const AgeTimeField& y, double age_step)
{
    const GridSpec& g = y.grid();
    std::vector<double> out;
    std::vector<double> pop(g.node_count());
    for (int k = 0; k <= y.time_steps(); ++k) {
        age_trapezoid(y.age_steps(), age_step, pop, [&](int l, std::size_t n) { return y.level(k, l)[n]; });
        out.push_back(simpson_integral_2d(g, pop));
    }
    return out;
}

namespace {

ScalarField mollified_effort(const LevelSetFunction& phi, const AgeModelParams& model, const Mollifier& m)
{
    require_spatial_match(phi.grid(), model, "mollified effort");
    const ScalarField h = heaviside_field(phi, m);
    ScalarField effort(model.spatial_grid(), std::vector<double>(h.values().begin(), h.values().end()));
    effort *= model.max_effort;
    return effort;
}

ObjectiveValue psi_from_state(const LevelSetFunction& phi, const AgeTimeField& y, const AgeModelParams& model,
                              double length_weight, double area_weight, const Mollifier& m)
{
    ObjectiveValue v{};
    v.data_term = total_population(y, model.age_step()).back();
    v.length_term = length_weight * region_length(phi, m);
    v.area_term = area_weight * region_area(phi, m);
    v.total = v.data_term + v.length_term + v.area_term;
    return v;
}

}  // namespace

ObjectiveValue evaluate_psi(const LevelSetFunction& phi, const AgeModelParams& model, double length_weight,
                            double area_weight, const Mollifier& m)
{
    const AgeTimeField y = solve_age_structured(model, mollified_effort(phi, model, m));
    return psi_from_state(phi, y, model, length_weight, area_weight, m);
}

AgeTimeField solve_eradication_adjoint(const AgeTimeField& y, const AgeModelParams& model, const ScalarField& effort,
                                       double terminal_value)
{
    model.validate();
    const GridSpec g = model.spatial_grid();
    require_spatial_match(y.grid(), model, "solve_eradication_adjoint");
    require_spatial_match(effort.grid(), model, "solve_eradication_adjoint");
    const int na = model.age_steps;
    const int nk = model.time_steps();
    if (y.age_steps() != na || y.time_steps() != nk) {
        throw std::invalid_argument("solve_eradication_adjoint: state does not match the model's age/time grid");
    }
    const double da = model.age_step();
    const std::size_t nodes = g.node_count();

    AgeTimeField r(g, na, nk);
    for (int l = 0; l < na; ++l) {
        auto lvl = r.level(nk, l);
        std::fill(lvl.begin(), lvl.end(), terminal_value);
    }

    const double lambda = model.diffusion * da / (g.h() * g.h());
    std::vector<ImplicitStepper> steppers;
    steppers.reserve(static_cast<std::size_t>(na));
    for (int l = 0; l < na; ++l) steppers.emplace_back(g, lambda);

    const std::vector<double> u_interior = interior_of(g, effort.values());
    std::vector<double> pop(nodes), coupling(nodes);
    std::vector<double> reaction(g.interior_count()), rhs(g.interior_count());
    for (int k = nk - 1; k >= 0; --k) {
        age_trapezoid(na, da, pop, [&](int l, std::size_t n) { return y.level(k, l)[n]; });
        age_trapezoid(na, da, coupling,
                      [&](int l, std::size_t n) { return r.level(k + 1, l)[n] * y.level(k + 1, l)[n]; });
        const std::vector<double> pop_interior = interior_of(g, pop);
        const std::vector<double> coupling_interior = interior_of(g, coupling);
        const std::vector<double> newborn_next = interior_of(g, r.level(k + 1, 0));
        for (int l = 0; l < na; ++l) {
            const double mu = model.mortality(model.age(l));
            const double beta = model.fertility_rate(model.age(l));
            const std::vector<double> older = interior_of(g, r.level(k + 1, l + 1));
            for (std::size_t q = 0; q < reaction.size(); ++q) {
                reaction[q] = da * (mu + model.logistic_slope * pop_interior[q] + u_interior[q]);
                rhs[q] = older[q] - da * model.logistic_slope * coupling_interior[q] + da * beta * newborn_next[q];
            }
            steppers[static_cast<std::size_t>(l)].step(reaction, rhs, r.level(k, l));
        }
    }
    return r;
}

std::string_view to_string(SignPolicy p)
{
    return p == SignPolicy::Descent ? "descent" : "as-printed";
}

ScalarField eradication_sensitivity(const AgeTimeField& r, const AgeTimeField& y, const AgeModelParams& model)
{
    const GridSpec& g = y.grid();
    const int na = y.age_steps();
    const int nk = y.time_steps();
    const double da = model.age_step();
    ScalarField out(g);
    auto values = out.values();
    for (int k = 0; k <= nk; ++k) {
        const double wt = (k == 0 || k == nk) ? 0.5 * da : da;
        for (int l = 0; l <= na; ++l) {
            const double wa = (l == 0 || l == na) ? 0.5 * da : da;
            auto rl = r.level(k, l);
            auto yl = y.level(k, l);
            for (std::size_t n = 0; n < values.size(); ++n) values[n] += wt * wa * rl[n] * yl[n];
        }
    }
    out *= model.max_effort;
    return out;
}

OptimizationResult optimize_eradication_region(const LevelSetFunction& phi0, const AgeModelParams& model,
                                               const EradicationDescent& descent, const DescentOptions& options)
{
    model.validate();
    require_spatial_match(phi0.grid(), model, "optimize_eradication_region");
    if (!(descent.length_weight >= 0.0) || !(descent.area_weight >= 0.0)) {
        throw std::invalid_argument("optimize_eradication_region: penalty weights must be nonnegative");
    }

    struct State {
        std::optional<AgeTimeField> y;
        std::optional<ScalarField> effort;
    };
    auto state = std::make_shared<State>();
    const Mollifier m = descent.mollifier;

    DescentProblem problem{
        [&model, &descent, m, state](const LevelSetFunction& phi) {
            state->effort = mollified_effort(phi, model, m);
            state->y = solve_age_structured(model, *state->effort);
            return psi_from_state(phi, *state->y, model, descent.length_weight, descent.area_weight, m);
        },
        [&model, &descent, state, &options](const LevelSetFunction& phi) {
            const AgeTimeField r = solve_eradication_adjoint(*state->y, model, *state->effort);
            ScalarField gain = eradication_sensitivity(r, *state->y, model);
            const GridSpec g = model.spatial_grid();
            ScalarField v(g);
            if (descent.policy == SignPolicy::Descent) {
                for (std::size_t n = 0; n < v.values().size(); ++n) v.values()[n] = -descent.area_weight + gain.values()[n];
                return ScalarField(phi.grid(), std::vector<double>(v.values().begin(), v.values().end()));
            }
            const ScalarField curv = curvature_divergence(phi.field(), options.eta);
            for (std::size_t n = 0; n < v.values().size(); ++n) {
                v.values()[n] = -descent.length_weight * curv.values()[n] + descent.area_weight - gain.values()[n];
            }
            return ScalarField(phi.grid(), std::vector<double>(v.values().begin(), v.values().end()));
        },
        m,
        descent.policy == SignPolicy::Descent ? descent.length_weight : 0.0,
        descent.theta0,
        descent.eps1,
        descent.eps2,
    };
    return run_descent(phi0, problem, options);
}

}  // namespace regionopt
