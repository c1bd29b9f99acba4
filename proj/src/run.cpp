#include "regionopt/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "regionopt/errors.hpp"
#include "regionopt/field_io.hpp"
#include "regionopt/pde.hpp"
#include "regionopt/shapeopt.hpp"

namespace regionopt {

namespace {

namespace fs = std::filesystem;

/// Ordered key = value lines for summary.txt.
class Summary {
public:
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, format_real(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, std::string_view value) { add(key, std::string(value)); }
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }

    void write(const fs::path& path) const
    {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        for (const auto& [k, v] : lines_) out << k << " = " << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

void write_pgm(const fs::path& path, const LevelSetFunction& phi)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_region_pgm(out, phi);
}

std::string numbered(const char* stem, int n, const char* ext)
{
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04d.%s", stem, n, ext);
    return name;
}

void write_trace(const fs::path& dir, const OptimizationTrace& trace)
{
    std::ofstream out(dir / "trace.csv");
    if (!out) throw std::runtime_error("cannot write trace.csv");
    write_trace_csv(out, trace);
}

ControlProblemParams harvest_params(const RunConfig& cfg)
{
    const GridSpec grid(cfg.n, cfg.m, cfg.t_final);
    ControlProblemParams p{
        grid,
        cfg.diffusion,
        cfg.growth_rate.resolve(grid, "model.a"),
        cfg.initial_density.resolve(grid, "model.y0"),
        cfg.max_effort,
        cfg.length_weight,
        cfg.area_weight,
        Mollifier(cfg.mollifier_eps),
    };
    p.eps1 = cfg.eps1;
    p.eps2 = cfg.eps2;
    p.theta0 = cfg.theta0;
    return p;
}

DescentOptions descent_options(const RunConfig& cfg, const fs::path& dir)
{
    DescentOptions opt;
    opt.max_iter = cfg.max_iter;
    opt.backtracking = cfg.backtracking;
    opt.reinit_every = cfg.reinit_every;
    const int every = cfg.snapshot_every;
    if (every > 0) {
        opt.on_evaluate = [dir, every](int n, const LevelSetFunction& phi) {
            if ((n - 1) % every == 0) write_pgm(dir / numbered("omega", n, "pgm"), phi);
        };
    }
    return opt;
}

void summarize_trace(Summary& s, const OptimizationTrace& trace, const char* objective)
{
    const TraceRecord& best = trace.records.at(static_cast<std::size_t>(trace.best_iteration - 1));
    s.add("evaluations", static_cast<int>(trace.records.size()));
    s.add("stop_reason", to_string(trace.stop_reason));
    s.add("best_iteration", trace.best_iteration);
    s.add(std::string("final_") + objective, best.objective);
    s.add("data_term", best.data_term);
    s.add("length_term", best.length_term);
    s.add("area_term", best.area_term);
    s.add("region_area", best.region_area);
    s.add("region_length", best.region_length);
}

void run_forward(const RunConfig& cfg, Summary& s, std::string& stage)
{
    stage = "setup";
    const ControlProblemParams params = harvest_params(cfg);
    const GridSpec& g = params.grid;
    const LevelSetFunction phi = make_levelset(cfg, g);

    SpaceTimeField control(g);
    const char* control_name = "zero";
    switch (cfg.control) {
    case ForwardControl::Zero: break;
    case ForwardControl::Full:
        control = SpaceTimeField(g, params.max_effort);
        control_name = "full";
        break;
    case ForwardControl::BangBang:
        stage = "adjoint solve";
        control = bang_bang_control(solve_adjoint(phi, params), params);
        control_name = "bang-bang";
        break;
    case ForwardControl::Mollified:
        stage = "adjoint solve";
        control = mollified_control(solve_adjoint(phi, params), params);
        control_name = "mollified";
        break;
    }

    stage = "forward solve";
    const SpaceTimeField y = solve_forward(phi, control, params);
    const std::vector<double> mass = total_mass(y);
    double drift = 0.0;
    for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()) / std::abs(mass.front()));

    stage = "output";
    write_pgm(cfg.output_dir / numbered("omega", 0, "pgm"), phi);
    if (cfg.snapshot_every > 0) {
        for (int k = 1; k <= g.m() + 1; ++k) {
            if ((k - 1) % cfg.snapshot_every != 0 && k != g.m() + 1) continue;
            char name[32];
            std::snprintf(name, sizeof(name), "field_k%04d.csv", k);
            write_field_csv(cfg.output_dir / name, y.slice(k));
        }
    }
    s.add("control", control_name);
    s.add("mass_initial", mass.front());
    s.add("mass_final", mass.back());
    s.add("mass_drift", drift);
    s.add("density_min", *std::min_element(y.values().begin(), y.values().end()));
    s.add("density_max", y.max_abs());
    s.add("region_area", region_area(phi, params.mollifier));
}

void run_optimize_region(const RunConfig& cfg, Summary& s, std::string& stage)
{
    stage = "setup";
    const ControlProblemParams params = harvest_params(cfg);
    params.validate_hypotheses();
    const LevelSetFunction phi0 = make_levelset(cfg, params.grid);

    stage = "region optimization";
    const OptimizationResult res = optimize_region(phi0, params, descent_options(cfg, cfg.output_dir));

    stage = "output";
    write_trace(cfg.output_dir, res.trace);
    write_pgm(cfg.output_dir / "omega_best.pgm", res.best);
    write_field_csv(cfg.output_dir / "phi_best.csv", res.best.field());
    s.add("backtracking", cfg.backtracking ? "on" : "off");
    summarize_trace(s, res.trace, "J");
    s.add("harvest", -res.trace.records.at(static_cast<std::size_t>(res.trace.best_iteration - 1)).data_term);
}

void add_verdict(Summary& s, const EradicabilityReport& rep)
{
    s.add("r_star", rep.r_star);
    s.add("lambda1", rep.lambda1);
    s.add("margin", rep.margin);
    s.add("verdict", to_string(rep.verdict));
    s.add("tolerance", rep.tolerance);
}

void run_eradicability(const RunConfig& cfg, Summary& s, std::string& stage)
{
    stage = "setup";
    const AgeModelParams model = make_age_model(cfg);
    model.validate();
    const LevelSetFunction phi = make_levelset(cfg, model.spatial_grid());

    stage = "eradicability analysis";
    const EradicabilityReport rep = eradicability_verdict(phi, model, cfg.verdict_tolerance);

    stage = "output";
    write_pgm(cfg.output_dir / numbered("omega", 0, "pgm"), phi);
    add_verdict(s, rep);
    s.add("region_cells", [&] {
        int c = 0;
        for (double v : phi.field().values()) c += v > 0.0 ? 1 : 0;
        return c;
    }());
}

void run_optimize_eradication(const RunConfig& cfg, Summary& s, std::string& stage)
{
    stage = "setup";
    const AgeModelParams model = make_age_model(cfg);
    model.validate();
    const LevelSetFunction phi0 = make_levelset(cfg, model.spatial_grid());
    EradicationDescent descent;
    descent.length_weight = cfg.length_weight;
    descent.area_weight = cfg.area_weight;
    descent.mollifier = Mollifier(cfg.mollifier_eps);
    descent.theta0 = cfg.theta0;
    descent.eps1 = cfg.eps1;
    descent.eps2 = cfg.eps2;
    descent.policy = cfg.sign_policy;

    stage = "eradication region optimization";
    const OptimizationResult res = optimize_eradication_region(phi0, model, descent, descent_options(cfg, cfg.output_dir));

    stage = "eradicability analysis";
    const EradicabilityReport rep = eradicability_verdict(res.best, model, cfg.verdict_tolerance);

    stage = "output";
    write_trace(cfg.output_dir, res.trace);
    write_pgm(cfg.output_dir / "omega_best.pgm", res.best);
    write_field_csv(cfg.output_dir / "phi_best.csv", res.best.field());
    s.add("sign_policy", to_string(cfg.sign_policy));
    s.add("backtracking", cfg.backtracking ? "on" : "off");
    summarize_trace(s, res.trace, "Psi");
    add_verdict(s, rep);
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log)
{
    std::string stage = "output directory";
    try {
        fs::create_directories(cfg.output_dir);
        Summary s;
        s.add("command", to_string(cfg.command));
        s.add("N", cfg.n);
        if (cfg.command == Command::Forward || cfg.command == Command::OptimizeRegion) {
            s.add("M", cfg.m);
            s.add("T", cfg.t_final);
        }
        switch (cfg.command) {
        case Command::Forward: run_forward(cfg, s, stage); break;
        case Command::OptimizeRegion: run_optimize_region(cfg, s, stage); break;
        case Command::Eradicability: run_eradicability(cfg, s, stage); break;
        case Command::OptimizeEradication: run_optimize_eradication(cfg, s, stage); break;
        }
        stage = "summary";
        s.add("status", "ok");
        s.write(cfg.output_dir / "summary.txt");
        return kExitSuccess;
    } catch (const ConfigError& e) {
        log << "error [" << stage << "]: configuration: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        log << "error [" << stage << "]: invalid input: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ConvergenceError& e) {
        log << "error [" << stage << "]: convergence failure: " << e.what() << '\n';
        return kExitConvergenceFailure;
    } catch (const std::exception& e) {
        log << "error [" << stage << "]: solver failure: " << e.what() << '\n';
        return kExitSolverFailure;
    }
}

}  // namespace regionopt
