#include "uee/commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <system_error>
#include <vector>

#include "uee/errors.hpp"
#include "uee/evaluation.hpp"
#include "uee/random.hpp"

namespace uee {

std::string format_double(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw IoError("failed to format a double");
    }
    return std::string(buffer, end);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

struct PolicyRun {
    std::string name;
    std::vector<Trajectory> trajectories;
    RegretSummary summary;
};

void write_trajectories_csv(const std::filesystem::path& path,
                            const std::vector<PolicyRun>& runs) {
    auto out = open_output(path);
    out << "policy,trial,round,chosen_exit,cumulative_regret\n";
    for (const auto& run : runs) {
        for (std::size_t trial = 0; trial < run.trajectories.size(); ++trial) {
            const auto& trajectory = run.trajectories[trial];
            for (std::size_t r = 0; r < trajectory.chosen_exits.size(); ++r) {
                out << run.name << ',' << trial << ',' << (r + 1) << ','
                    << trajectory.chosen_exits[r] << ','
                    << format_double(trajectory.cumulative_regret[r]) << '\n';
            }
        }
    }
    finish(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<PolicyRun>& runs) {
    auto out = open_output(path);
    out << "policy,round,mean_regret,ci_halfwidth\n";
    for (const auto& run : runs) {
        for (std::size_t r = 0; r < run.summary.mean_cumulative_regret.size(); ++r) {
            out << run.name << ',' << (r + 1) << ','
                << format_double(run.summary.mean_cumulative_regret[r]) << ','
                << format_double(run.summary.ci_halfwidth[r]) << '\n';
        }
    }
    finish(out, path);
}

nlohmann::json seeds_json(const ExperimentConfig& config, bool with_shuffle) {
    nlohmann::json seeds;
    nlohmann::json environment = nlohmann::json::array();
    nlohmann::json policy = nlohmann::json::array();
    nlohmann::json shuffle = nlohmann::json::array();
    for (int i = 0; i < config.trials; ++i) {
        environment.push_back(rng::derive_seed(config.seed, static_cast<std::uint64_t>(i), 1));
        policy.push_back(rng::derive_seed(config.seed, static_cast<std::uint64_t>(i), 2));
        if (with_shuffle) {
            shuffle.push_back(rng::derive_seed(config.seed, static_cast<std::uint64_t>(i), 3));
        }
    }
    seeds["base"] = config.seed;
    if (!with_shuffle) {
        seeds["environment"] = environment;
    }
    seeds["policy"] = policy;
    if (with_shuffle) {
        seeds["shuffle"] = shuffle;
    }
    return seeds;
}

void write_metadata(const std::filesystem::path& path, const ExperimentConfig& config,
                    nlohmann::json derived) {
    nlohmann::json doc;
    doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    doc["config"] = config.to_json();
    doc["derived"] = std::move(derived);
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    finish(out, path);
}

nlohmann::json instance_json(const ExitProfile& profile, const LossVector& losses) {
    nlohmann::json derived;
    derived["costs"] = profile.costs();
    derived["gammas"] = losses.gammas();
    derived["losses"] = losses.losses();
    derived["optimal_exit"] = optimal_exit(losses);
    derived["gaps"] = reward_gaps(losses);
    return derived;
}

}  // namespace

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  std::ostream& report) {
    if (!config.environment) {
        throw ValidationError("simulate needs an `environment` section in the config");
    }
    ensure_directory(out_dir);
    const ExitProfile profile = build_profile(config.profile);
    const LossVector losses = build_loss_vector(config.environment->gammas, profile);

    std::vector<PolicyRun> runs;
    for (const auto& kind : config.policies) {
        PolicyRun run;
        run.name = kind.name();
        run.trajectories =
            run_synthetic_trials(profile, kind, *config.environment, losses, config.rounds,
                                 config.trials, config.seed, config.parallelism);
        run.summary = aggregate_trials(run.trajectories);
        run.summary.policy = run.name;
        report << run.name << ": mean cumulative regret at round " << config.rounds << " = "
               << format_double(run.summary.mean_cumulative_regret.back()) << " (+/- "
               << format_double(run.summary.ci_halfwidth.back()) << ")\n";
        runs.push_back(std::move(run));
    }

    write_trajectories_csv(out_dir / "trajectories.csv", runs);
    write_summary_csv(out_dir / "summary.csv", runs);
    write_metadata(out_dir / "metadata.json", config, [&] {
        nlohmann::json derived = instance_json(profile, losses);
        derived["seeds"] = seeds_json(config, false);
        return derived;
    }());
    report << "wrote " << (out_dir / "trajectories.csv").string() << ", summary.csv, metadata.json\n";
}

void cmd_replay(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& report) {
    if (!config.trace_path) {
        throw ValidationError("replay needs a `trace` path in the config");
    }
    ensure_directory(out_dir);
    const ExitProfile profile = build_profile(config.profile);
    const Trace trace = open_trace(*config.trace_path);
    if (trace.num_exits != profile.num_exits()) {
        throw DimensionError("trace has " + std::to_string(trace.num_exits) +
                             " exits but the profile has " + std::to_string(profile.num_exits()));
    }
    if (config.rounds > trace.size()) {
        throw ValidationError("requested " + std::to_string(config.rounds) + " rounds but " +
                              *config.trace_path + " holds only " + std::to_string(trace.size()) +
                              " records");
    }
    const std::vector<double> gammas = empirical_gammas(trace);
    const LossVector losses = build_loss_vector(gammas, profile);
    report << "empirical optimal exit: " << optimal_exit(losses) << "\n";

    std::vector<PolicyRun> runs;
    for (const auto& kind : config.policies) {
        PolicyRun run;
        run.name = kind.name();
        run.trajectories =
            run_replay_trials(profile, kind, trace, config.shuffle, losses, config.rounds,
                              config.trials, config.seed, config.parallelism);
        run.summary = aggregate_trials(run.trajectories);
        run.summary.policy = run.name;
        report << run.name << ": mean cumulative regret at round " << config.rounds << " = "
               << format_double(run.summary.mean_cumulative_regret.back()) << " (+/- "
               << format_double(run.summary.ci_halfwidth.back()) << ")\n";
        runs.push_back(std::move(run));
    }

    write_trajectories_csv(out_dir / "trajectories.csv", runs);
    write_summary_csv(out_dir / "summary.csv", runs);
    write_metadata(out_dir / "metadata.json", config, [&] {
        nlohmann::json derived = instance_json(profile, losses);
        derived["empirical_gammas"] = gammas;
        derived["trace_records"] = trace.size();
        derived["seeds"] = seeds_json(config, true);
        return derived;
    }());
    report << "wrote " << (out_dir / "trajectories.csv").string() << ", summary.csv, metadata.json\n";
}

void cmd_stats(const std::filesystem::path& trace_path,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& report) {
    const Trace trace = open_trace(trace_path);
    const CategoryCounts counts = categorize(trace);
    const std::vector<double> gammas = empirical_gammas(trace);

    auto percent = [&](std::int64_t count) {
        return 100.0 * static_cast<double>(count) / static_cast<double>(counts.total);
    };
    char line[160];
    report << "records: " << counts.total << " (" << trace.num_exits << " exits)\n";
    std::snprintf(line, sizeof(line), "sd_violation: %10lld  %6.2f%%\n",
                  static_cast<long long>(counts.sd_violation), percent(counts.sd_violation));
    report << line;
    std::snprintf(line, sizeof(line), "all_wrong:    %10lld  %6.2f%%\n",
                  static_cast<long long>(counts.all_wrong), percent(counts.all_wrong));
    report << line;
    std::snprintf(line, sizeof(line), "all_correct:  %10lld  %6.2f%%\n",
                  static_cast<long long>(counts.all_correct), percent(counts.all_correct));
    report << line;
    std::snprintf(line, sizeof(line), "good:         %10lld  %6.2f%%\n",
                  static_cast<long long>(counts.good), percent(counts.good));
    report << line;
    report << "per-exit accuracy:";
    for (double g : gammas) {
        std::snprintf(line, sizeof(line), " %.4f", 1.0 - g);
        report << line;
    }
    report << "\n";

    if (out_dir) {
        ensure_directory(*out_dir);
        nlohmann::json doc;
        doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
        doc["trace"] = trace_path.string();
        doc["records"] = counts.total;
        doc["counts"] = {{"sd_violation", counts.sd_violation},
                         {"all_wrong", counts.all_wrong},
                         {"all_correct", counts.all_correct},
                         {"good", counts.good}};
        doc["percentages"] = {{"sd_violation", percent(counts.sd_violation)},
                              {"all_wrong", percent(counts.all_wrong)},
                              {"all_correct", percent(counts.all_correct)},
                              {"good", percent(counts.good)}};
        doc["empirical_gammas"] = gammas;
        const auto path = *out_dir / "stats.json";
        auto out = open_output(path);
        out << doc.dump(2) << '\n';
        finish(out, path);
        report << "wrote " << path.string() << "\n";
    }
}

void cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
               std::ostream& report) {
    if (!config.environment) {
        throw ValidationError("sweep needs an `environment` section in the config");
    }
    if (config.epsilons.empty()) {
        throw ValidationError("sweep needs a non-empty `epsilons` list in the config");
    }
    ensure_directory(out_dir);
    const ExitProfile profile = build_profile(config.profile);
    const LossVector losses = build_loss_vector(config.environment->gammas, profile);

    const auto path = out_dir / "sweep_summary.csv";
    auto out = open_output(path);
    out << "policy,epsilon,round,mean_regret,ci_halfwidth\n";
    for (const auto& kind : config.policies) {
        const auto points =
            sd_violation_sweep(*config.environment, config.epsilons, kind, profile, config.rounds,
                               config.trials, config.seed, config.parallelism);
        for (const auto& point : points) {
            report << kind.name() << " @ epsilon=" << format_double(point.epsilon)
                   << ": mean final regret = "
                   << format_double(point.summary.mean_cumulative_regret.back()) << " (+/- "
                   << format_double(point.summary.ci_halfwidth.back()) << ")\n";
            for (std::size_t r = 0; r < point.summary.mean_cumulative_regret.size(); ++r) {
                out << kind.name() << ',' << format_double(point.epsilon) << ',' << (r + 1) << ','
                    << format_double(point.summary.mean_cumulative_regret[r]) << ','
                    << format_double(point.summary.ci_halfwidth[r]) << '\n';
            }
        }
    }
    finish(out, path);
    write_metadata(out_dir / "metadata.json", config, [&] {
        nlohmann::json derived = instance_json(profile, losses);
        derived["seeds"] = seeds_json(config, false);
        return derived;
    }());
    report << "wrote " << path.string() << ", metadata.json\n";
}

void cmd_bound(const ExperimentConfig& config, std::ostream& report) {
    if (!config.environment) {
        throw ValidationError("bound needs an `environment` section in the config");
    }
    const ExitProfile profile = build_profile(config.profile);
    const LossVector losses = build_loss_vector(config.environment->gammas, profile);
    const double bound = theorem_bound(losses, static_cast<double>(config.rounds));
    report << "optimal exit: " << optimal_exit(losses) << "\n";
    report << "gaps:";
    for (double gap : reward_gaps(losses)) {
        report << ' ' << format_double(gap);
    }
    report << "\n";
    report << "regret bound at n=" << config.rounds << ": " << format_double(bound) << "\n";
}

}  // namespace uee
