#include "regionopt/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "regionopt/errors.hpp"
#include "regionopt/field_io.hpp"

namespace regionopt {

std::string_view to_string(Command c)
{
    switch (c) {
    case Command::Forward: return "forward";
    case Command::OptimizeRegion: return "optimize-region";
    case Command::Eradicability: return "eradicability";
    case Command::OptimizeEradication: return "optimize-eradication";
    }
    return "unknown";
}

namespace {

double gaussian_density(double x1, double x2)
{
    return std::exp(-0.5 * (x1 * x1 + x2 * x2)) / (2.0 * std::numbers::pi);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out)
{
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size() && std::isfinite(out);
}

/// Every key the parser understands, grouped by section.
const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"run", {"command", "seed"}},
        {"grid", {"N", "M", "T"}},
        {"model", {"d", "a", "y0", "L", "control"}},
        {"penalty", {"alpha", "beta"}},
        {"mollifier", {"eps"}},
        {"convergence", {"eps1", "eps2", "theta0", "max_iter", "backtracking", "reinit_every"}},
        {"levelset", {"init"}},
        {"agestruct", {"A", "Na", "fertility", "mortality", "m", "T", "y0", "age_profile", "sign_policy", "tolerance"}},
        {"output", {"dir", "snapshot_every"}},
    };
    return keys;
}

class Entries {
public:
    void set(const std::string& key, std::string value, int line)
    {
        if (values_.count(key)) {
            throw ConfigError("config line " + std::to_string(line) + ": key '" + key + "' given twice");
        }
        values_[key] = std::move(value);
    }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& raw(const std::string& key) const { return values_.at(key); }

    double real(const std::string& key, double fallback) const
    {
        if (!has(key)) return fallback;
        double v = 0.0;
        if (!parse_double(raw(key), v)) throw ConfigError(key + ": expected a number, got '" + raw(key) + "'");
        return v;
    }
    int integer(const std::string& key, int fallback) const
    {
        if (!has(key)) return fallback;
        const double v = real(key, 0.0);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer, got '" + raw(key) + "'");
        return static_cast<int>(v);
    }
    bool boolean(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const std::string& v = raw(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError(key + ": expected true or false, got '" + v + "'");
    }

private:
    std::map<std::string, std::string> values_;
};

CoefficientSpec coefficient(const Entries& e, const std::string& key, const std::set<std::string>& presets,
                            const std::filesystem::path& base_dir, bool allow_file = true)
{
    CoefficientSpec spec;
    const std::string& text = e.raw(key);
    double v = 0.0;
    if (parse_double(text, v)) {
        spec.kind = CoefficientSpec::Kind::Constant;
        spec.value = v;
        return spec;
    }
    if (presets.count(text)) {
        spec.kind = CoefficientSpec::Kind::Preset;
        spec.name = text;
        return spec;
    }
    if (!allow_file) {
        std::string names;
        for (const auto& p : presets) names += (names.empty() ? "" : ", ") + p;
        throw ConfigError(key + ": expected a number or one of {" + names + "}, got '" + text + "'");
    }
    std::filesystem::path p(text);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) {
        throw ConfigError(key + ": '" + text + "' is neither a number, a known preset, nor an existing grid CSV file");
    }
    spec.kind = CoefficientSpec::Kind::File;
    spec.name = p.string();
    return spec;
}

void require_range(bool ok, const std::string& key, const std::string& rule)
{
    if (!ok) throw ConfigError(key + ": out of range (" + rule + ")");
}

}  // namespace

ScalarField CoefficientSpec::resolve(const GridSpec& grid, const std::string& key) const
{
    switch (kind) {
    case Kind::Constant: return ScalarField(grid, value);
    case Kind::File:
        try {
            return read_field_csv(std::filesystem::path(name), grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
    case Kind::Preset: break;
    }
    if (name == "gaussian") return ScalarField::sample(grid, gaussian_density);
    if (name == "circle") {
        return ScalarField::sample(grid, [](double x1, double x2) { return 0.25 - std::hypot(x1 - 0.5, x2 - 0.5); });
    }
    if (name == "checkerboard") {
        return ScalarField::sample(grid, [](double x1, double x2) {
            return std::sin(3.0 * std::numbers::pi * x1) * std::sin(3.0 * std::numbers::pi * x2);
        });
    }
    if (name == "full") return ScalarField(grid, 1.0);
    if (name == "empty") return ScalarField(grid, -1.0);
    if (name == "left-half") return ScalarField::sample(grid, [](double x1, double) { return 0.5 - x1; });
    throw ConfigError(key + ": unknown preset '" + name + "'");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    Entries e;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_keys().count(section)) {
                throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside of any [section]");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().at(section).count(key)) {
            throw ConfigError(section + "." + key + ": unknown key");
        }
        if (value.empty()) throw ConfigError(section + "." + key + ": empty value");
        e.set(section + "." + key, value, line_no);
    }

    // Missing required keys are reported together.
    std::vector<std::string> required{"run.command", "grid.N", "model.d", "model.L"};
    RunConfig cfg;
    bool known_command = false;
    if (e.has("run.command")) {
        const std::string& c = e.raw("run.command");
        known_command = true;
        if (c == "forward") {
            cfg.command = Command::Forward;
        } else if (c == "optimize-region") {
            cfg.command = Command::OptimizeRegion;
        } else if (c == "eradicability") {
            cfg.command = Command::Eradicability;
        } else if (c == "optimize-eradication") {
            cfg.command = Command::OptimizeEradication;
        } else {
            throw ConfigError("run.command: unknown command '" + c +
                              "' (expected forward, optimize-region, eradicability or optimize-eradication)");
        }
    }
    const bool harvest = cfg.command == Command::Forward || cfg.command == Command::OptimizeRegion;
    if (known_command) {
        if (harvest) {
            for (const char* k : {"grid.M", "grid.T", "model.a", "model.y0"}) required.emplace_back(k);
            if (cfg.command == Command::OptimizeRegion) required.emplace_back("levelset.init");
        } else {
            for (const char* k : {"levelset.init", "agestruct.A", "agestruct.Na", "agestruct.fertility",
                                  "agestruct.mortality"}) {
                required.emplace_back(k);
            }
            if (cfg.command == Command::OptimizeEradication) required.emplace_back("agestruct.y0");
        }
    }
    std::string missing;
    for (const auto& k : required) {
        if (!e.has(k)) missing += (missing.empty() ? "" : ", ") + k;
    }
    if (!missing.empty()) throw ConfigError("missing required keys: " + missing);

    const std::set<std::string> no_presets;
    cfg.seed = static_cast<std::uint64_t>(e.integer("run.seed", 0));
    require_range(e.integer("run.seed", 0) >= 0, "run.seed", "must be >= 0");

    cfg.n = e.integer("grid.N", 0);
    require_range(cfg.n >= 4, "grid.N", "N >= 4");
    if (cfg.n % 2 != 0) {
        throw ConfigError("grid.N: must be even, got " + std::to_string(cfg.n) +
                          " (composite Simpson quadrature needs an even number of intervals)");
    }
    if (harvest) {
        cfg.m = e.integer("grid.M", 0);
        require_range(cfg.m >= 2, "grid.M", "M >= 2");
        if (cfg.m % 2 != 0) {
            throw ConfigError("grid.M: must be even, got " + std::to_string(cfg.m) +
                              " (composite Simpson quadrature needs an even number of intervals)");
        }
        cfg.t_final = e.real("grid.T", 0.0);
        require_range(cfg.t_final > 0.0, "grid.T", "T > 0");
    } else {
        cfg.m = e.integer("grid.M", 2);
        cfg.t_final = e.real("grid.T", 1.0);
    }

    cfg.diffusion = e.real("model.d", 0.0);
    require_range(harvest ? cfg.diffusion > 0.0 : cfg.diffusion >= 0.0, "model.d", harvest ? "d > 0" : "d >= 0");
    cfg.max_effort = e.real("model.L", 0.0);
    require_range(cfg.max_effort >= 0.0, "model.L", "L >= 0");
    if (e.has("model.a")) cfg.growth_rate = coefficient(e, "model.a", no_presets, base_dir);
    if (e.has("model.y0")) {
        cfg.initial_density = coefficient(e, "model.y0", {"gaussian"}, base_dir);
        if (cfg.initial_density.kind == CoefficientSpec::Kind::Constant) {
            require_range(cfg.initial_density.value >= 0.0, "model.y0", "y0 >= 0");
        }
    }
    if (e.has("model.control")) {
        const std::string& c = e.raw("model.control");
        if (c == "zero") {
            cfg.control = ForwardControl::Zero;
        } else if (c == "full") {
            cfg.control = ForwardControl::Full;
        } else if (c == "bang-bang") {
            cfg.control = ForwardControl::BangBang;
        } else if (c == "mollified") {
            cfg.control = ForwardControl::Mollified;
        } else {
            throw ConfigError("model.control: expected zero, full, bang-bang or mollified, got '" + c + "'");
        }
    }

    cfg.length_weight = e.real("penalty.alpha", 0.0);
    require_range(cfg.length_weight >= 0.0, "penalty.alpha", "alpha >= 0");
    cfg.area_weight = e.real("penalty.beta", 0.0);
    require_range(cfg.area_weight >= 0.0, "penalty.beta", "beta >= 0");
    cfg.mollifier_eps = e.real("mollifier.eps", 1.0);
    require_range(cfg.mollifier_eps > 0.0, "mollifier.eps", "eps > 0");

    cfg.eps1 = e.real("convergence.eps1", 1e-3);
    require_range(cfg.eps1 > 0.0, "convergence.eps1", "eps1 > 0");
    cfg.eps2 = e.real("convergence.eps2", 1e-3);
    require_range(cfg.eps2 > 0.0, "convergence.eps2", "eps2 > 0");
    cfg.theta0 = e.real("convergence.theta0", 0.05);
    require_range(cfg.theta0 > 0.0, "convergence.theta0", "theta0 > 0");
    cfg.max_iter = e.integer("convergence.max_iter", 200);
    require_range(cfg.max_iter >= 1, "convergence.max_iter", "max_iter >= 1");
    cfg.backtracking = e.boolean("convergence.backtracking", true);
    cfg.reinit_every = e.integer("convergence.reinit_every", 0);
    require_range(cfg.reinit_every >= 0, "convergence.reinit_every", "reinit_every >= 0");

    if (e.has("levelset.init")) {
        cfg.levelset = coefficient(e, "levelset.init", {"circle", "checkerboard", "full", "empty", "left-half"}, base_dir);
    }

    if (!harvest) {
        cfg.max_age = e.real("agestruct.A", 0.0);
        require_range(cfg.max_age > 0.0, "agestruct.A", "A > 0");
        cfg.age_steps = e.integer("agestruct.Na", 0);
        require_range(cfg.age_steps >= 2, "agestruct.Na", "Na >= 2");
        cfg.fertility = coefficient(e, "agestruct.fertility", {"replacement"}, base_dir, false);
        if (cfg.fertility.kind == CoefficientSpec::Kind::Constant) {
            require_range(cfg.fertility.value >= 0.0, "agestruct.fertility", "fertility >= 0");
        }
        cfg.mortality = coefficient(e, "agestruct.mortality", {"none", "senescence"}, base_dir, false);
        if (cfg.mortality.kind == CoefficientSpec::Kind::Constant) {
            require_range(cfg.mortality.value >= 0.0, "agestruct.mortality", "mortality >= 0");
        }
        cfg.logistic_slope = e.real("agestruct.m", 0.0);
        require_range(cfg.logistic_slope >= 0.0, "agestruct.m", "m >= 0");
        cfg.age_horizon = e.real("agestruct.T", cfg.max_age);
        require_range(cfg.age_horizon > 0.0, "agestruct.T", "T > 0");
        {
            const double ratio = cfg.age_horizon / (cfg.max_age / cfg.age_steps);
            require_range(std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio), "agestruct.T",
                          "must be an integer multiple of the age step A/Na");
        }
        if (e.has("agestruct.y0")) {
            cfg.age_density = coefficient(e, "agestruct.y0", {"gaussian"}, base_dir);
            if (cfg.age_density.kind == CoefficientSpec::Kind::Constant) {
                require_range(cfg.age_density.value >= 0.0, "agestruct.y0", "y0 >= 0");
            }
        } else {
            cfg.age_density = CoefficientSpec{CoefficientSpec::Kind::Constant, 1.0, {}};
        }
        if (e.has("agestruct.age_profile")) {
            const std::string& p = e.raw("agestruct.age_profile");
            if (p == "uniform") {
                cfg.age_profile = AgeProfile::Uniform;
            } else if (p == "stable") {
                cfg.age_profile = AgeProfile::Stable;
            } else {
                throw ConfigError("agestruct.age_profile: expected uniform or stable, got '" + p + "'");
            }
        }
        if (e.has("agestruct.sign_policy")) {
            const std::string& p = e.raw("agestruct.sign_policy");
            if (p == "descent") {
                cfg.sign_policy = SignPolicy::Descent;
            } else if (p == "as-printed") {
                cfg.sign_policy = SignPolicy::AsPrinted;
            } else {
                throw ConfigError("agestruct.sign_policy: expected descent or as-printed, got '" + p + "'");
            }
        }
        cfg.verdict_tolerance = e.real("agestruct.tolerance", 1e-6);
        require_range(cfg.verdict_tolerance >= 0.0, "agestruct.tolerance", "tolerance >= 0");
    }

    if (e.has("output.dir")) {
        std::filesystem::path p(e.raw("output.dir"));
        cfg.output_dir = p.is_relative() ? base_dir / p : p;
    }
    cfg.snapshot_every = e.integer("output.snapshot_every", 1);
    require_range(cfg.snapshot_every >= 0, "output.snapshot_every", "snapshot_every >= 0");

    // Resolve grid-dependent specs now so bad files surface as config errors.
    const GridSpec grid = harvest ? GridSpec(cfg.n, cfg.m, cfg.t_final) : GridSpec(cfg.n, 2, 1.0);
    if (harvest) {
        const ScalarField y0 = cfg.initial_density.resolve(grid, "model.y0");
        require_range(y0.min() >= 0.0, "model.y0", "y0 >= 0 at every node");
        require_range(y0.max() > 0.0, "model.y0", "y0 must not vanish identically");
        (void)cfg.growth_rate.resolve(grid, "model.a");
    } else {
        const ScalarField y0 = cfg.age_density.resolve(grid, "agestruct.y0");
        require_range(y0.min() >= 0.0, "agestruct.y0", "y0 >= 0 at every node");
    }
    (void)cfg.levelset.resolve(grid, "levelset.init");
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse_config(in, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

LevelSetFunction make_levelset(const RunConfig& cfg, const GridSpec& grid)
{
    return LevelSetFunction(cfg.levelset.resolve(grid, "levelset.init"));
}

namespace {

std::function<double(double)> age_function(const CoefficientSpec& spec, double max_age)
{
    if (spec.kind == CoefficientSpec::Kind::Constant) {
        const double v = spec.value;
        return [v](double) { return v; };
    }
    if (spec.name == "replacement") return [max_age](double) { return 1.0 / max_age; };
    if (spec.name == "none") return [](double) { return 0.0; };
    if (spec.name == "senescence") {
        return [max_age](double a) {
            const double left = max_age - a;
            return left > 1e-12 * max_age ? 1.0 / left : std::numeric_limits<double>::infinity();
        };
    }
    throw ConfigError("unknown age-function preset '" + spec.name + "'");
}

}  // namespace

AgeModelParams make_age_model(const RunConfig& cfg)
{
    AgeModelParams model;
    model.spatial_n = cfg.n;
    model.max_age = cfg.max_age;
    model.age_steps = cfg.age_steps;
    model.fertility_rate = age_function(cfg.fertility, cfg.max_age);
    model.mortality = age_function(cfg.mortality, cfg.max_age);
    model.logistic_slope = cfg.logistic_slope;
    model.diffusion = cfg.diffusion;
    model.max_effort = cfg.max_effort;
    model.horizon = cfg.age_horizon > 0.0 ? cfg.age_horizon : cfg.max_age;

    const GridSpec grid = model.spatial_grid();
    const ScalarField spatial = cfg.age_density.resolve(grid, "agestruct.y0");
    const double h = grid.h();
    auto lookup = [spatial, h](double x1, double x2) {
        const int i = static_cast<int>(std::lround(x1 / h)) + 1;
        const int j = static_cast<int>(std::lround(x2 / h)) + 1;
        return spatial(i, j);
    };
    if (cfg.age_profile == AgeProfile::Uniform) {
        model.initial_density = [lookup](double x1, double x2, double) { return lookup(x1, x2); };
        return model;
    }
    // Stable profile: survival times exp(-r* a), so the population grows or
    // decays at the Lotka rate from the start.
    const double r_star = lotka_root(model);
    const auto mu = model.mortality;
    const double da = model.age_step();
    std::vector<double> profile(static_cast<std::size_t>(model.age_steps + 1), 0.0);
    double integral = 0.0;
    profile[0] = 1.0;
    for (int l = 1; l <= model.age_steps; ++l) {
        const double m0 = mu(model.age(l - 1));
        const double m1 = mu(model.age(l));
        if (!std::isfinite(m0) || !std::isfinite(m1)) break;
        integral += 0.5 * da * (m0 + m1);
        profile[static_cast<std::size_t>(l)] = std::exp(-integral - r_star * model.age(l));
    }
    model.initial_density = [lookup, profile, da](double x1, double x2, double a) {
        const auto l = static_cast<std::size_t>(std::lround(a / da));
        return lookup(x1, x2) * profile[std::min(l, profile.size() - 1)];
    };
    return model;
}

}  // namespace regionopt
