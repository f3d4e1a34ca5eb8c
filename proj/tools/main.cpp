#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uee/commands.hpp"
#include "uee/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "results";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::int64_t> rounds;
    std::optional<int> parallelism;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    if (needs_out) {
        cmd->add_option("--out", args.out_dir, "output directory");
    }
    cmd->add_option("--seed", args.seed, "override the config's base seed");
    cmd->add_option("--trials", args.trials, "override the config's trial count");
    cmd->add_option("--rounds", args.rounds, "override the config's round count");
    cmd->add_option("--parallelism", args.parallelism, "trial-level worker threads");
}

uee::ExperimentConfig load_config(const CommonArgs& args) {
    uee::ExperimentConfig config = uee::ExperimentConfig::load(args.config_path);
    if (args.seed) {
        config.seed = *args.seed;
        if (config.environment) {
            config.environment->seed = *args.seed;
        }
    }
    if (args.trials) config.trials = *args.trials;
    if (args.rounds) config.rounds = *args.rounds;
    if (args.parallelism) config.parallelism = *args.parallelism;
    if (config.trials < 1 || config.rounds < 1 || config.parallelism < 1) {
        throw uee::ValidationError("overrides must keep trials, rounds and parallelism >= 1");
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised exit selection for multi-exit cascades: simulation, trace replay "
                 "and regret evaluation"};
    app.require_subcommand(1);

    CommonArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "run policies on a synthetic environment");
    add_common(simulate, simulate_args, true);

    CommonArgs replay_args;
    auto* replay = app.add_subcommand("replay", "replay a recorded prediction trace");
    add_common(replay, replay_args, true);

    CommonArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "repeat an experiment across violation rates");
    add_common(sweep, sweep_args, true);

    CommonArgs bound_args;
    auto* bound = app.add_subcommand("bound", "print the logarithmic regret bound for an instance");
    add_common(bound, bound_args, false);

    std::string stats_trace;
    std::string stats_out;
    auto* stats = app.add_subcommand("stats", "joint-prediction statistics of a labeled trace");
    stats->add_option("trace", stats_trace, "trace file")->required();
    stats->add_option("--out", stats_out, "also write stats.json here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            uee::cmd_simulate(load_config(simulate_args), simulate_args.out_dir, std::cout);
        } else if (replay->parsed()) {
            uee::cmd_replay(load_config(replay_args), replay_args.out_dir, std::cout);
        } else if (sweep->parsed()) {
            uee::cmd_sweep(load_config(sweep_args), sweep_args.out_dir, std::cout);
        } else if (bound->parsed()) {
            uee::cmd_bound(load_config(bound_args), std::cout);
        } else if (stats->parsed()) {
            std::optional<std::filesystem::path> out;
            if (!stats_out.empty()) {
                out = stats_out;
            }
            uee::cmd_stats(stats_trace, out, std::cout);
        }
    } catch (const uee::Error& err) {
        std::cerr << "error[" << err.category() << "]: " << err.what() << std::endl;
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error[internal]: " << err.what() << std::endl;
        return 2;
    }
    return 0;
}
