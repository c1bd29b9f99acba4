#include "regionopt/shapeopt.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "regionopt/field_io.hpp"

namespace regionopt {

ObjectiveValue evaluate_J(const LevelSetFunction& phi, const SpaceTimeField& p, const ControlProblemParams& params)
{
    ScalarField weighted = p.slice(1);
    for (std::size_t n = 0; n < weighted.values().size(); ++n) {
        weighted.values()[n] *= params.initial_density.values()[n];
    }
    ObjectiveValue v{};
    v.data_term = simpson_integral_2d(weighted);
    v.length_term = params.length_weight * region_length(phi, params.mollifier);
    v.area_term = params.area_weight * region_area(phi, params.mollifier);
    v.total = v.data_term + v.length_term + v.area_term;
    return v;
}

ObjectiveValue evaluate_J(const LevelSetFunction& phi, const ControlProblemParams& params)
{
    return evaluate_J(phi, solve_adjoint(phi, params), params);
}

ScalarField descent_velocity(const LevelSetFunction& phi, const SpaceTimeField& p, const SpaceTimeField& r,
                             const ControlProblemParams& params)
{
    const GridSpec& g = params.grid;
    if (!(phi.grid() == g) || !(p.grid() == g) || !(r.grid() == g)) {
        throw std::invalid_argument("descent_velocity: grid mismatch");
    }
    const Mollifier& m = params.mollifier;
    ScalarField out(g);
    std::vector<double> samples(static_cast<std::size_t>(g.m() + 1));
    for (int i = 1; i <= g.n() + 1; ++i) {
        for (int j = 1; j <= g.n() + 1; ++j) {
            for (int k = 1; k <= g.m() + 1; ++k) {
                const double s = 1.0 + p(i, j, k);
                samples[static_cast<std::size_t>(k - 1)] = s * heaviside_mollified(s, m) * r(i, j, k);
            }
            out(i, j) = -params.area_weight + params.max_effort * simpson_1d(samples, g.dt());
        }
    }
    return out;
}

std::string_view to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::ObjectiveConverged: return "objective converged";
    case StopReason::ObjectiveIncreased: return "objective increased";
    case StopReason::LevelSetConverged: return "level set converged";
    case StopReason::IterationBudget: return "iteration budget";
    }
    return "unknown";
}

double l2_distance(const ScalarField& a, const ScalarField& b)
{
    ScalarField d = a - b;
    for (double& v : d.values()) v *= v;
    return std::sqrt(simpson_integral_2d(d));
}

OptimizationResult run_descent(const LevelSetFunction& phi0, const DescentProblem& problem,
                               const DescentOptions& options)
{
    if (options.max_iter < 1) throw std::invalid_argument("run_descent: max_iter must be >= 1");
    if (!problem.evaluate || !problem.velocity) throw std::invalid_argument("run_descent: missing callbacks");

    OptimizationTrace trace;
    double accepted_objective = 1e6;
    double best_objective = std::numeric_limits<double>::infinity();
    std::optional<LevelSetFunction> best;

    LevelSetFunction accepted = phi0;
    LevelSetFunction candidate = phi0;
    std::optional<ScalarField> accepted_velocity;
    double theta = problem.theta0;
    double step_used = 0.0;
    int backtracks = 0;
    int accepted_steps = 0;

    auto take_step = [&](TraceRecord& rec) {
        LevelSetFunction next =
            evolve_phi(accepted, *accepted_velocity, theta, problem.mollifier, problem.curvature_weight, options.eta);
        if (options.reinit_every > 0 && (accepted_steps % options.reinit_every) == 0) next = reinitialize(next);
        rec.phi_change = l2_distance(next.field(), accepted.field());
        step_used = theta;
        candidate = std::move(next);
        return rec.phi_change < problem.eps2;
    };

    for (int n = 1;; ++n) {
        const ObjectiveValue obj = problem.evaluate(candidate);
        if (options.on_evaluate) options.on_evaluate(n, candidate);

        TraceRecord rec{};
        rec.iteration = n;
        rec.objective = obj.total;
        rec.data_term = obj.data_term;
        rec.length_term = obj.length_term;
        rec.area_term = obj.area_term;
        rec.region_area = region_area(candidate, problem.mollifier);
        rec.region_length = region_length(candidate, problem.mollifier);
        rec.phi_change = std::numeric_limits<double>::quiet_NaN();
        rec.step = step_used;
        rec.accepted = obj.total < accepted_objective;

        if (obj.total < best_objective) {
            best_objective = obj.total;
            best = candidate;
            trace.best_iteration = n;
        }

        if (!rec.accepted) {
            const bool can_retry = options.backtracking && accepted_velocity && backtracks < options.max_backtracks;
            if (!can_retry) {
                trace.records.push_back(rec);
                trace.stop_reason = StopReason::ObjectiveIncreased;
                break;
            }
            if (n >= options.max_iter) {
                trace.records.push_back(rec);
                trace.stop_reason = StopReason::IterationBudget;
                break;
            }
            ++backtracks;
            theta *= 0.5;
            const bool converged = take_step(rec);
            trace.records.push_back(rec);
            if (converged) {
                trace.stop_reason = StopReason::LevelSetConverged;
                break;
            }
            continue;
        }

        const double change = std::abs(obj.total - accepted_objective);
        accepted_objective = obj.total;
        accepted = candidate;
        backtracks = 0;
        ++accepted_steps;
        if (change < problem.eps1) {
            trace.records.push_back(rec);
            trace.stop_reason = StopReason::ObjectiveConverged;
            break;
        }
        if (n >= options.max_iter) {
            trace.records.push_back(rec);
            trace.stop_reason = StopReason::IterationBudget;
            break;
        }
        accepted_velocity = problem.velocity(accepted);
        const bool converged = take_step(rec);
        trace.records.push_back(rec);
        if (converged) {
            trace.stop_reason = StopReason::LevelSetConverged;
            break;
        }
    }

    return OptimizationResult{best.value_or(phi0), std::move(trace)};
}

OptimizationResult optimize_region(const LevelSetFunction& phi0, const ControlProblemParams& params,
                                   const DescentOptions& options)
{
    params.validate();
    if (!(phi0.grid() == params.grid)) throw std::invalid_argument("optimize_region: grid mismatch");

    auto adjoint = std::make_shared<std::optional<SpaceTimeField>>();
    DescentProblem problem{
        [&params, adjoint](const LevelSetFunction& phi) {
            *adjoint = solve_adjoint(phi, params);
            return evaluate_J(phi, **adjoint, params);
        },
        [&params, adjoint](const LevelSetFunction& phi) {
            const SpaceTimeField& p = **adjoint;
            const SpaceTimeField r = solve_sensitivity(phi, p, params);
            return descent_velocity(phi, p, r, params);
        },
        params.mollifier,
        params.length_weight,
        params.theta0,
        params.eps1,
        params.eps2,
    };
    return run_descent(phi0, problem, options);
}

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace)
{
    out << "iteration,objective,data_term,length_term,area_term,region_area,region_length,phi_change,step,"
           "accepted,stop_reason\n";
    for (std::size_t n = 0; n < trace.records.size(); ++n) {
        const TraceRecord& r = trace.records[n];
        out << r.iteration << ',' << format_real(r.objective) << ',' << format_real(r.data_term) << ','
            << format_real(r.length_term) << ',' << format_real(r.area_term) << ',' << format_real(r.region_area)
            << ',' << format_real(r.region_length) << ',' << format_real(r.phi_change) << ','
            << format_real(r.step) << ',' << (r.accepted ? 1 : 0) << ',';
        if (n + 1 == trace.records.size()) out << to_string(trace.stop_reason);
        out << '\n';
    }
}

}  // namespace regionopt
