#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "regionopt/errors.hpp"
#include "regionopt/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Optimal harvesting and eradication regions for diffusive population models"};
    std::string config_path;
    std::optional<std::string> out_dir;
    bool paper_mode = false;
    std::optional<int> snapshot_every;
    app.add_option("--config", config_path, "INI configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_flag("--paper-mode", paper_mode, "disable backtracking and reinitialization");
    app.add_option("--snapshot-every", snapshot_every, "write a region mask every n evaluations (0: none)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : regionopt::kExitConfigError;
    }

    regionopt::RunConfig cfg;
    try {
        cfg = regionopt::parse_config(config_path);
    } catch (const regionopt::ConfigError& e) {
        std::cerr << "error [configuration]: " << e.what() << '\n';
        return regionopt::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error [configuration]: " << e.what() << '\n';
        return regionopt::kExitConfigError;
    }
    if (out_dir) cfg.output_dir = *out_dir;
    if (snapshot_every) cfg.snapshot_every = *snapshot_every;
    if (paper_mode) {
        cfg.backtracking = false;
        cfg.reinit_every = 0;
    }

    const int status = regionopt::run(cfg, std::cerr);
    if (status == regionopt::kExitSuccess) {
        std::cout << "wrote " << (cfg.output_dir / "summary.txt").string() << '\n';
    }
    return status;
}
