#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "regionopt/agestruct.hpp"
#include "regionopt/grid.hpp"
#include "regionopt/levelset.hpp"

namespace regionopt {

enum class Command { Forward, OptimizeRegion, Eradicability, OptimizeEradication };
std::string_view to_string(Command c);

/// How a nodal coefficient is given: a number, a named preset, or a grid CSV.
struct CoefficientSpec {
    enum class Kind { Constant, Preset, File };
    Kind kind = Kind::Constant;
    double value = 0.0;
    std::string name;  ///< preset name or resolved file path

    /// Samples the coefficient on `grid`. Throws ConfigError naming `key` for
    /// unknown presets or unreadable files.
    ScalarField resolve(const GridSpec& grid, const std::string& key) const;
};

/// Forward-run effort: none, full (u = L), or derived from the adjoint.
enum class ForwardControl { Zero, Full, BangBang, Mollified };

/// Initial age profile multiplying the spatial density of the age model.
enum class AgeProfile { Uniform, Stable };

struct RunConfig {
    Command command = Command::Forward;
    std::uint64_t seed = 0;

    int n = 0;
    int m = 0;
    double t_final = 0.0;

    double diffusion = 0.0;
    CoefficientSpec growth_rate;
    CoefficientSpec initial_density;
    double max_effort = 0.0;
    ForwardControl control = ForwardControl::Zero;

    double length_weight = 0.0;
    double area_weight = 0.0;
    double mollifier_eps = 1.0;

    double eps1 = 1e-3;
    double eps2 = 1e-3;
    double theta0 = 0.05;
    int max_iter = 200;
    bool backtracking = true;
    int reinit_every = 0;

    CoefficientSpec levelset{CoefficientSpec::Kind::Constant, 1.0, {}};

    double max_age = 0.0;
    int age_steps = 0;
    CoefficientSpec fertility;
    CoefficientSpec mortality;
    double logistic_slope = 0.0;
    double age_horizon = 0.0;  ///< 0 means "use A"
    CoefficientSpec age_density;
    AgeProfile age_profile = AgeProfile::Uniform;
    SignPolicy sign_policy = SignPolicy::Descent;
    double verdict_tolerance = 1e-6;

    std::filesystem::path output_dir = "out";
    int snapshot_every = 1;
};

/// Reads an INI-style file: `[section]` headers, `key = value` lines, `#` or
/// `;` comments. Grid CSV paths are resolved relative to the file.
/// Throws ConfigError naming the offending key (or every missing key).
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");

/// Builds the level-set function, age model etc. from a config.
LevelSetFunction make_levelset(const RunConfig& cfg, const GridSpec& grid);
AgeModelParams make_age_model(const RunConfig& cfg);

}  // namespace regionopt
