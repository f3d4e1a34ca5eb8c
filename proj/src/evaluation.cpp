#include "uee/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <thread>

#include "uee/errors.hpp"
#include "uee/random.hpp"

namespace uee {

namespace {

constexpr std::uint64_t kEnvironmentSeedTag = 1;
constexpr std::uint64_t kPolicySeedTag = 2;
constexpr std::uint64_t kShuffleSeedTag = 3;

// Runs `trials` independent jobs with results placed by index, so the
// outcome does not depend on the degree of parallelism.
void for_each_trial(int trials, int parallelism, const std::function<void(int)>& job) {
    if (parallelism <= 1 || trials <= 1) {
        for (int i = 0; i < trials; ++i) {
            job(i);
        }
        return;
    }
    const int workers = std::min(parallelism, trials);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < trials; i += workers) {
                job(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace

Trajectory run_episode(const ExitProfile& profile, PolicyKind kind, SampleStream& stream,
                       const LossVector& losses, std::int64_t rounds, std::uint64_t seed) {
    if (losses.size() != profile.num_exits() || stream.num_exits() != profile.num_exits()) {
        throw DimensionError("profile, losses and stream disagree on the number of exits");
    }
    if (rounds < 1) {
        throw DomainError("episodes need at least one round");
    }
    const int star = optimal_exit(losses);
    const double best_loss = losses.loss(star);

    Policy policy(profile, kind, seed);
    Trajectory trajectory;
    trajectory.trial_seed = seed;
    trajectory.chosen_exits.reserve(static_cast<std::size_t>(rounds));
    trajectory.per_round_regret.reserve(static_cast<std::size_t>(rounds));
    trajectory.cumulative_regret.reserve(static_cast<std::size_t>(rounds));

    double cumulative = 0.0;
    for (std::int64_t t = 1; t <= rounds; ++t) {
        std::optional<PredictionRecord> record = stream.next();
        if (!record) {
            throw RunLengthError("stream exhausted after " + std::to_string(t - 1) + " of " +
                                 std::to_string(rounds) + " rounds");
        }
        const Decision decision = policy.decide(t);
        const std::span<const Label> prefix(record->predictions.data(),
                                            static_cast<std::size_t>(decision.chosen_exit));
        policy.update(prefix, kind.is_supervised() ? record->true_label : std::nullopt);

        const double regret = losses.loss(decision.chosen_exit) - best_loss;
        cumulative += regret;
        trajectory.chosen_exits.push_back(decision.chosen_exit);
        trajectory.per_round_regret.push_back(regret);
        trajectory.cumulative_regret.push_back(cumulative);
    }
    return trajectory;
}

std::vector<Trajectory> run_synthetic_trials(const ExitProfile& profile, PolicyKind kind,
                                             const EnvironmentSpec& spec, const LossVector& losses,
                                             std::int64_t rounds, int trials,
                                             std::uint64_t base_seed, int parallelism) {
    if (trials < 1) {
        throw DomainError("need at least one trial");
    }
    std::vector<Trajectory> out(static_cast<std::size_t>(trials));
    for_each_trial(trials, parallelism, [&](int i) {
        EnvironmentSpec trial_spec = spec;
        trial_spec.seed = rng::derive_seed(base_seed, static_cast<std::uint64_t>(i),
                                           kEnvironmentSeedTag);
        SyntheticStream stream(trial_spec);
        const std::uint64_t policy_seed =
            rng::derive_seed(base_seed, static_cast<std::uint64_t>(i), kPolicySeedTag);
        out[static_cast<std::size_t>(i)] =
            run_episode(profile, kind, stream, losses, rounds, policy_seed);
    });
    return out;
}

std::vector<Trajectory> run_replay_trials(const ExitProfile& profile, PolicyKind kind,
                                          const Trace& trace, bool shuffle,
                                          const LossVector& losses, std::int64_t rounds, int trials,
                                          std::uint64_t base_seed, int parallelism) {
    if (trials < 1) {
        throw DomainError("need at least one trial");
    }
    std::vector<Trajectory> out(static_cast<std::size_t>(trials));
    for_each_trial(trials, parallelism, [&](int i) {
        std::optional<std::uint64_t> shuffle_seed;
        if (shuffle) {
            shuffle_seed =
                rng::derive_seed(base_seed, static_cast<std::uint64_t>(i), kShuffleSeedTag);
        }
        TraceStream stream(trace, shuffle_seed);
        const std::uint64_t policy_seed =
            rng::derive_seed(base_seed, static_cast<std::uint64_t>(i), kPolicySeedTag);
        out[static_cast<std::size_t>(i)] =
            run_episode(profile, kind, stream, losses, rounds, policy_seed);
    });
    return out;
}

RegretSummary aggregate_trials(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) {
        throw DimensionError("aggregate_trials needs at least one trajectory");
    }
    const std::size_t rounds = trajectories.front().cumulative_regret.size();
    for (const auto& t : trajectories) {
        if (t.cumulative_regret.size() != rounds) {
            throw DimensionError("trajectories have unequal lengths");
        }
    }
    const int trials = static_cast<int>(trajectories.size());
    RegretSummary summary;
    summary.trials = trials;
    summary.mean_cumulative_regret.resize(rounds);
    summary.ci_halfwidth.resize(rounds);

    std::vector<double> column(trajectories.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < trajectories.size(); ++i) {
            column[i] = trajectories[i].cumulative_regret[r];
        }
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (double v : column) {
            sum += v;
        }
        const double mean = sum / static_cast<double>(trials);
        summary.mean_cumulative_regret[r] = mean;
        if (trials < 2) {
            summary.ci_halfwidth[r] = 0.0;
            continue;
        }
        double ss = 0.0;
        for (double v : column) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(trials - 1));
        summary.ci_halfwidth[r] = 1.96 * sd / std::sqrt(static_cast<double>(trials));
    }
    return summary;
}

CategoryCounts categorize(const Trace& trace) {
    CategoryCounts counts;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& record = trace.records[i];
        if (!record.true_label) {
            throw ContractError("categorize needs true labels on every record (record " +
                                std::to_string(i + 1) + " has none)");
        }
        bool all_right = true;
        bool all_wrong = true;
        bool violation = false;
        bool seen_correct = false;
        for (Label prediction : record.predictions) {
            const bool correct = prediction == *record.true_label;
            all_right = all_right && correct;
            all_wrong = all_wrong && !correct;
            if (seen_correct && !correct) {
                violation = true;
            }
            seen_correct = seen_correct || correct;
        }
        if (all_right) {
            ++counts.all_correct;
        } else if (all_wrong) {
            ++counts.all_wrong;
        } else if (violation) {
            ++counts.sd_violation;
        } else {
            ++counts.good;
        }
        ++counts.total;
    }
    return counts;
}

double theorem_bound(const LossVector& losses, double rounds) {
    if (!(rounds >= 2.0)) {
        throw DomainError("the regret bound is stated for n >= 2");
    }
    const int star = optimal_exit(losses);
    const std::vector<double> gaps = reward_gaps(losses);
    double inverse_gap_sum = 0.0;
    double gap_sum = 0.0;
    for (int i = 1; i <= losses.size(); ++i) {
        if (i == star) {
            continue;
        }
        const double gap = gaps[static_cast<std::size_t>(i - 1)];
        if (gap <= 0.0) {
            throw DegenerateGapError("exit " + std::to_string(i) +
                                     " ties the optimum; the bound needs a unique optimal exit");
        }
        inverse_gap_sum += 1.0 / gap;
        gap_sum += gap;
    }
    constexpr double kTailConstant = std::numbers::pi * std::numbers::pi / 3.0 + 1.0;
    return 8.0 * std::log(rounds) * inverse_gap_sum + kTailConstant * gap_sum;
}

std::vector<SweepPoint> sd_violation_sweep(const EnvironmentSpec& base,
                                           const std::vector<double>& epsilons, PolicyKind kind,
                                           const ExitProfile& profile, std::int64_t rounds,
                                           int trials, std::uint64_t base_seed, int parallelism) {
    std::vector<SweepPoint> points;
    points.reserve(epsilons.size());
    for (double epsilon : epsilons) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
            throw DomainError("violation rates must lie in [0, 1]");
        }
        EnvironmentSpec spec = base;
        spec.violation_rate = epsilon;
        SweepPoint point;
        point.epsilon = epsilon;
        point.losses = build_loss_vector(realized_gammas(spec), profile);
        auto trajectories = run_synthetic_trials(profile, kind, spec, point.losses, rounds,
                                                 trials, base_seed, parallelism);
        point.summary = aggregate_trials(trajectories);
        point.summary.policy = kind.name();
        points.push_back(std::move(point));
    }
    return points;
}

}  // namespace uee
