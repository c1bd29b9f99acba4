#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "regionopt/shapeopt.hpp"

using namespace regionopt;

namespace {

/// Re-derives the stop reason and the monotonicity contract from the trace alone.
void check_trace_contract(const OptimizationTrace& trace, double eps1, double eps2, int max_iter)
{
    REQUIRE_FALSE(trace.records.empty());
    double last_accepted = 1e6;
    double previous_accepted = 1e6;
    for (const TraceRecord& rec : trace.records) {
        CHECK(rec.accepted == (rec.objective < last_accepted));
        if (rec.accepted) {
            previous_accepted = last_accepted;
            last_accepted = rec.objective;
        }
    }
    const TraceRecord& last = trace.records.back();
    CHECK(static_cast<int>(trace.records.size()) <= max_iter);
    switch (trace.stop_reason) {
    case StopReason::ObjectiveConverged:
        CHECK(last.accepted);
        CHECK(std::abs(last.objective - previous_accepted) < eps1);
        break;
    case StopReason::ObjectiveIncreased:
        CHECK_FALSE(last.accepted);
        break;
    case StopReason::LevelSetConverged:
        CHECK(last.phi_change < eps2);
        break;
    case StopReason::IterationBudget:
        CHECK(static_cast<int>(trace.records.size()) == max_iter);
        break;
    }
    for (std::size_t n = 0; n + 1 < trace.records.size(); ++n) CHECK(trace.records[n].phi_change >= eps2);

    double best = trace.records.front().objective;
    int best_n = 1;
    for (const TraceRecord& rec : trace.records) {
        if (rec.objective < best) {
            best = rec.objective;
            best_n = rec.iteration;
        }
    }
    CHECK(trace.best_iteration == best_n);
}

/// Objective values returned in order, regardless of phi.
DescentProblem scripted(const GridSpec& g, std::vector<double> values, std::shared_ptr<int> calls)
{
    auto script = std::make_shared<std::vector<double>>(std::move(values));
    return DescentProblem{
        [script, calls](const LevelSetFunction&) {
            const double v = (*script)[std::min<std::size_t>(static_cast<std::size_t>(*calls), script->size() - 1)];
            ++*calls;
            return ObjectiveValue{v, v, 0.0, 0.0};
        },
        [g](const LevelSetFunction&) { return ScalarField(g, 1.0); },
        Mollifier(1.0),
        0.0,
        0.1,
        1e-9,
        1e-9,
    };
}

}  // namespace

TEST_SUITE("shapeopt") {

TEST_CASE("J for an essentially empty region")
{
    const ControlProblemParams p = testutil::test1_params(20, 20);
    const ObjectiveValue j = evaluate_J(LevelSetFunction(ScalarField(p.grid, -1000.0)), p);
    CHECK(j.length_term == 0.0);
    CHECK(j.area_term == doctest::Approx(0.6 * 3.183097800805168e-4).epsilon(1e-9));
    // int y0 p(0) with p(0) = -1.973125335667888e-3 uniform.
    CHECK(j.data_term == doctest::Approx(-0.001973125335667888 * 0.11651624715043807).epsilon(1e-9));
    CHECK(j.total == doctest::Approx(-3.891529122116065e-05).epsilon(1e-8));
    CHECK(j.total == doctest::Approx(j.data_term + j.length_term + j.area_term).epsilon(1e-15));
}

TEST_CASE("J vanishes without effort or penalties")
{
    ControlProblemParams p = testutil::test1_params(10, 10);
    p.max_effort = 0.0;
    p.length_weight = 0.0;
    p.area_weight = 0.0;
    const ObjectiveValue j = evaluate_J(LevelSetFunction(ScalarField::sample(p.grid, testutil::circle)), p);
    CHECK(j.total == 0.0);
}

TEST_CASE("J of the Test-1 initial circle (regression anchor)")
{
    const ControlProblemParams p = testutil::test1_params(20, 20);
    const LevelSetFunction phi(ScalarField::sample(p.grid, testutil::circle));
    const ObjectiveValue j = evaluate_J(phi, p);
    CHECK(j.total == doctest::Approx(0.13733557957555748).epsilon(1e-10));
    const ObjectiveValue reuse = evaluate_J(phi, solve_adjoint(phi, p), p);
    CHECK(reuse.total == j.total);
}

TEST_CASE("descent velocity special cases")
{
    ControlProblemParams p = testutil::test1_params(10, 10);
    const LevelSetFunction phi(ScalarField::sample(p.grid, testutil::circle));
    const SpaceTimeField adj = solve_adjoint(phi, p);
    const SpaceTimeField r = solve_sensitivity(phi, adj, p);

    ControlProblemParams no_effort = p;
    no_effort.max_effort = 0.0;
    const ScalarField v0 = descent_velocity(phi, adj, r, no_effort);
    for (double v : v0.values()) CHECK(v == -0.6);

    const ScalarField vr = descent_velocity(phi, adj, SpaceTimeField(p.grid), p);
    for (double v : vr.values()) CHECK(v == -0.6);

    p.area_weight = 0.0;
    const ScalarField vc = descent_velocity(phi, SpaceTimeField(p.grid), SpaceTimeField(p.grid, 1.0), p);
    for (double v : vc.values()) CHECK(v == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("budget of one evaluation")
{
    const ControlProblemParams p = testutil::test1_params(20, 20);
    DescentOptions opt;
    opt.max_iter = 1;
    const OptimizationResult res = optimize_region(LevelSetFunction(ScalarField::sample(p.grid, testutil::circle)), p, opt);
    REQUIRE(res.trace.records.size() == 1);
    CHECK(res.trace.stop_reason == StopReason::IterationBudget);
    CHECK(res.trace.best_iteration == 1);
    CHECK(std::isnan(res.trace.records[0].phi_change));
    CHECK(res.trace.records[0].step == 0.0);
    CHECK_THROWS_AS(optimize_region(res.best, p, DescentOptions{.max_iter = 0}), std::invalid_argument);
}

TEST_CASE("no effort and no penalties stops at the first evaluation")
{
    ControlProblemParams p = testutil::test1_params(20, 20);
    p.max_effort = 0.0;
    p.length_weight = 0.0;
    p.area_weight = 0.0;
    const OptimizationResult res = optimize_region(LevelSetFunction(ScalarField::sample(p.grid, testutil::circle)), p);
    REQUIRE(res.trace.records.size() == 1);
    CHECK(res.trace.records[0].objective == 0.0);
    CHECK(res.trace.records[0].phi_change == 0.0);
    CHECK(res.trace.stop_reason == StopReason::LevelSetConverged);
}

TEST_CASE("Test 1 and Test 2 traces satisfy the descent contract")
{
    ControlProblemParams p1 = testutil::test1_params(20, 20);
    const OptimizationResult r1 =
        optimize_region(LevelSetFunction(ScalarField::sample(p1.grid, testutil::circle)), p1);
    check_trace_contract(r1.trace, p1.eps1, p1.eps2, 200);
    CHECK(r1.trace.stop_reason == StopReason::ObjectiveConverged);
    CHECK(r1.trace.records.size() == 9);
    CHECK(r1.trace.records[r1.trace.best_iteration - 1].objective == doctest::Approx(0.016458547115047906).epsilon(1e-9));

    ControlProblemParams p2 = testutil::test1_params(20, 20);
    p2.length_weight = 0.5;
    p2.area_weight = 0.5;
    const LevelSetFunction checker(ScalarField::sample(p2.grid, [](double x1, double x2) {
        return std::sin(3.0 * std::numbers::pi * x1) * std::sin(3.0 * std::numbers::pi * x2);
    }));
    const OptimizationResult r2 = optimize_region(checker, p2);
    check_trace_contract(r2.trace, p2.eps1, p2.eps2, 200);
    for (const OptimizationResult* r : {&r1, &r2}) {
        const double area = r->trace.records[r->trace.best_iteration - 1].region_area;
        CHECK(area > 0.0);
        CHECK(area < 1.0);
    }
}

TEST_CASE("backtracking halves the step and retries from the accepted iterate")
{
    const GridSpec g(8, 2, 1.0);
    auto calls = std::make_shared<int>(0);
    const DescentProblem problem = scripted(g, {1.0, 2.0, 3.0, 0.5, 0.4999999999}, calls);
    const OptimizationResult res = run_descent(LevelSetFunction(ScalarField(g, 0.0)), problem, {});
    const auto& rec = res.trace.records;
    REQUIRE(rec.size() == 5);
    CHECK(rec[0].accepted);
    CHECK_FALSE(rec[1].accepted);
    CHECK_FALSE(rec[2].accepted);
    CHECK(rec[3].accepted);
    CHECK(rec[0].step == 0.0);
    CHECK(rec[1].step == 0.1);
    CHECK(rec[2].step == 0.05);
    CHECK(rec[3].step == 0.025);
    // Theta stays reduced after a successful retry.
    CHECK(rec[4].step == 0.025);
    CHECK(rec[4].accepted);
    CHECK(res.trace.stop_reason == StopReason::ObjectiveConverged);
    CHECK(res.trace.best_iteration == 5);
    check_trace_contract(res.trace, 1e-9, 1e-9, 200);
}

TEST_CASE("backtracking gives up after the retry limit")
{
    const GridSpec g(8, 2, 1.0);
    auto calls = std::make_shared<int>(0);
    const DescentProblem problem = scripted(g, {1.0, 2.0}, calls);
    DescentOptions opt;
    opt.max_backtracks = 3;
    const OptimizationResult res = run_descent(LevelSetFunction(ScalarField(g, 0.0)), problem, opt);
    CHECK(res.trace.records.size() == 5);
    CHECK(res.trace.stop_reason == StopReason::ObjectiveIncreased);
    CHECK(res.trace.best_iteration == 1);
    CHECK(res.best.field().values()[0] == 0.0);
}

TEST_CASE("paper mode stops at the first increase")
{
    const GridSpec g(8, 2, 1.0);
    auto calls = std::make_shared<int>(0);
    const DescentProblem problem = scripted(g, {1.0, 0.5, 0.7, 0.1}, calls);
    DescentOptions opt;
    opt.backtracking = false;
    const OptimizationResult res = run_descent(LevelSetFunction(ScalarField(g, 0.0)), problem, opt);
    CHECK(res.trace.records.size() == 3);
    CHECK(res.trace.stop_reason == StopReason::ObjectiveIncreased);
    CHECK(res.trace.best_iteration == 2);
}

TEST_CASE("iteration budget counts every evaluation")
{
    const GridSpec g(8, 2, 1.0);
    auto calls = std::make_shared<int>(0);
    const DescentProblem problem = scripted(g, {5.0, 4.0, 6.0, 3.0, 2.0, 1.0}, calls);
    DescentOptions opt;
    opt.max_iter = 4;
    std::vector<int> seen;
    opt.on_evaluate = [&seen](int n, const LevelSetFunction&) { seen.push_back(n); };
    const OptimizationResult res = run_descent(LevelSetFunction(ScalarField(g, 0.0)), problem, opt);
    CHECK(res.trace.records.size() == 4);
    CHECK(*calls == 4);
    CHECK(seen == std::vector<int>{1, 2, 3, 4});
    CHECK(res.trace.stop_reason == StopReason::IterationBudget);
    check_trace_contract(res.trace, 1e-9, 1e-9, 4);
}

TEST_CASE("trace CSV layout")
{
    const GridSpec g(8, 2, 1.0);
    auto calls = std::make_shared<int>(0);
    const OptimizationResult res =
        run_descent(LevelSetFunction(ScalarField(g, 0.0)), scripted(g, {1.0, 0.5, 0.4999999999}, calls), {});
    std::ostringstream out;
    write_trace_csv(out, res.trace);
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] ==
          "iteration,objective,data_term,length_term,area_term,region_area,region_length,phi_change,step,accepted,"
          "stop_reason");
    CHECK(lines[1].rfind("1,1,", 0) == 0);
    CHECK(lines[1].back() == ',');
    CHECK(lines[3].find(",nan,") != std::string::npos);
    CHECK(lines[3].size() > std::string("objective converged").size());
    CHECK(lines[3].substr(lines[3].size() - 19) == "objective converged");
}

TEST_CASE("stop reason names")
{
    CHECK(to_string(StopReason::ObjectiveConverged) == "objective converged");
    CHECK(to_string(StopReason::ObjectiveIncreased) == "objective increased");
    CHECK(to_string(StopReason::LevelSetConverged) == "level set converged");
    CHECK(to_string(StopReason::IterationBudget) == "iteration budget");
}

TEST_CASE("L2 distance by Simpson quadrature")
{
    const GridSpec g(10, 2, 1.0);
    CHECK(l2_distance(ScalarField(g, 1.0), ScalarField(g, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));
    const ScalarField x = ScalarField::sample(g, [](double x1, double) { return x1; });
    CHECK(l2_distance(x, ScalarField(g, 0.0)) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
    CHECK(l2_distance(x, x) == 0.0);
}

}
