#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wqed/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Time-bin MPS simulator for 1D waveguide-QED systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<long> bond_max;
    std::optional<double> delta_t, t_max;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory")->required();
        cmd->add_option("--bond-max", bond_max, "override the bond cap");
        cmd->add_option("--delta-t", delta_t, "override the time step");
        cmd->add_option("--t-max", t_max, "override the horizon");
    };
    CLI::App* cmd_run = app.add_subcommand("run", "execute a scenario and write CSV outputs");
    CLI::App* cmd_validate =
        app.add_subcommand("validate", "run a scenario against its reference oracle");
    add_common(cmd_run);
    add_common(cmd_validate);

    CLI11_PARSE(app, argc, argv);

    try {
        wqed::RunConfig cfg = wqed::parse_config(config_path);
        wqed::apply_overrides(cfg, bond_max, delta_t, t_max);

        if (app.got_subcommand(cmd_run)) {
            const wqed::RunManifest man = wqed::run(cfg, out_dir);
            std::printf("scenario %s finished: %zu file(s), peak bond %ld, discarded %.3e\n",
                        wqed::scenario_name(cfg.scenario).c_str(), man.files.size(),
                        man.peak_bond, man.discarded_weight);
            for (const auto& w : man.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            return 0;
        }

        const wqed::ValidationReport rep = wqed::validate(cfg, out_dir);
        std::printf("%s vs %s: max deviation %.6g (threshold %.3g) -> %s\n",
                    wqed::scenario_name(cfg.scenario).c_str(), rep.oracle.c_str(),
                    rep.max_deviation, rep.threshold, rep.pass ? "PASS" : "FAIL");
        return rep.pass ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
