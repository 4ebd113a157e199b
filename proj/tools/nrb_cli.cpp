// Batch front end: reads a JSON scenario config, runs the selected pipeline,
// and writes CSV/JSON artifacts plus a manifest into the output directory.
// Exit status is 0 only when every requested point completed.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "nrb/nrb.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nrb::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    std::optional<uint64_t> seed;
};

int run(const CommonArgs& args,
        const std::vector<nrb::ScenarioKind>& allowed, const std::string& subcommand) {
    nrb::ScenarioConfig cfg = nrb::parse_config(read_file(args.config_path));
    bool ok_kind = false;
    for (auto k : allowed) ok_kind |= (cfg.kind == k);
    if (!ok_kind)
        throw nrb::ConfigError("config scenario '" + std::string(nrb::scenario_name(cfg.kind)) +
                               "' does not belong to subcommand '" + subcommand + "'");
    nrb::RunManifest man = nrb::run_scenario(cfg, args.out_dir, args.threads, args.seed);
    for (const auto& e : man.errors) std::cerr << "error: " << e << "\n";
    std::cout << man.scenario << ": " << man.outputs.size() << " artifact(s) in " << args.out_dir
              << " (" << nrb::format_double(man.wall_seconds) << " s)"
              << (man.all_points_ok ? "" : " [INCOMPLETE]") << "\n";
    return man.all_points_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonreciprocal bundle-emission simulator"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        std::vector<nrb::ScenarioKind> kinds;
    };
    const std::vector<Sub> subs = {
        {"spectrum", "steady-state occupation spectra over a detuning grid",
         {nrb::ScenarioKind::spectrum}},
        {"dynamics", "closed or open time evolution",
         {nrb::ScenarioKind::closed_dynamics, nrb::ScenarioKind::open_dynamics}},
        {"trajectory", "Monte Carlo wave-function trajectories and ensemble statistics",
         {nrb::ScenarioKind::trajectory}},
        {"correlations", "steady-state correlation functions over a kappa grid",
         {nrb::ScenarioKind::correlation_sweep}},
        {"witness", "entanglement witness reports over a kappa grid",
         {nrb::ScenarioKind::witness_sweep}},
        {"resonances", "closed-form and refined pair-resonance detunings",
         {nrb::ScenarioKind::resonance_table}},
    };

    std::vector<CommonArgs> args(subs.size());
    std::vector<uint64_t> seed_values(subs.size(), 0);
    std::vector<CLI::Option*> seed_opts(subs.size(), nullptr);
    std::vector<CLI::App*> cmds(subs.size(), nullptr);
    for (size_t i = 0; i < subs.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        cmd->add_option("--config", args[i].config_path, "scenario config file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", args[i].out_dir, "output directory (created if missing)");
        cmd->add_option("--threads", args[i].threads, "worker threads (0 = hardware)")
            ->check(CLI::Range(0, 1024));
        seed_opts[i] = cmd->add_option("--seed", seed_values[i], "override config seed0");
        cmds[i] = cmd;
    }

    try {
        app.parse(argc, argv);
        for (size_t i = 0; i < subs.size(); ++i) {
            if (!cmds[i]->parsed()) continue;
            if (seed_opts[i]->count() > 0) args[i].seed = seed_values[i];
            return run(args[i], subs[i].kinds, subs[i].name);
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const nrb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
