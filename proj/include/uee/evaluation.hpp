#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uee/core.hpp"
#include "uee/environment.hpp"
#include "uee/policy.hpp"

namespace uee {

// One trial's round-by-round record.
struct Trajectory {
    std::vector<int> chosen_exits;
    std::vector<double> per_round_regret;
    std::vector<double> cumulative_regret;
    std::uint64_t trial_seed = 0;
};

// Joint-prediction classes of a labeled trace. The four classes partition
// all correctness sequences: monotone non-decreasing sequences are
// all-wrong, all-correct or good (one 0 -> 1 transition); anything with a
// correct -> wrong transition is a violation.
struct CategoryCounts {
    std::int64_t sd_violation = 0;
    std::int64_t all_wrong = 0;
    std::int64_t all_correct = 0;
    std::int64_t good = 0;
    std::int64_t total = 0;
};

// Pointwise mean cumulative regret over trials with normal-approximation 95%
// confidence half-widths (1.96 * sd / sqrt(trials); 0 for a single trial).
struct RegretSummary {
    std::string policy;
    int trials = 0;
    std::vector<double> mean_cumulative_regret;
    std::vector<double> ci_halfwidth;
};

struct SweepPoint {
    double epsilon = 0.0;
    LossVector losses;  // built from the realized error rates at this rate
    RegretSummary summary;
};

// Plays one policy against a record source for `rounds` rounds. Each round
// the policy sees only the prediction prefix up to its chosen exit; true
// labels are forwarded exclusively to supervised kinds. Regret accrues
// against the provided loss vector. Throws RunLengthError if the source runs
// out early, naming the number of completed rounds.
Trajectory run_episode(const ExitProfile& profile, PolicyKind kind, SampleStream& stream,
                       const LossVector& losses, std::int64_t rounds, std::uint64_t seed);

// Repeated-trial protocol on synthetic environments. Trial i draws its
// environment and policy seeds from (base_seed, i); the spec's own seed
// field is ignored here. Results are identical for any parallelism degree.
std::vector<Trajectory> run_synthetic_trials(const ExitProfile& profile, PolicyKind kind,
                                             const EnvironmentSpec& spec, const LossVector& losses,
                                             std::int64_t rounds, int trials,
                                             std::uint64_t base_seed, int parallelism = 1);

// Repeated-trial protocol on a recorded trace. When `shuffle` is set each
// trial replays the trace in its own seed-derived order.
std::vector<Trajectory> run_replay_trials(const ExitProfile& profile, PolicyKind kind,
                                          const Trace& trace, bool shuffle,
                                          const LossVector& losses, std::int64_t rounds, int trials,
                                          std::uint64_t base_seed, int parallelism = 1);

// Pointwise aggregation across equal-length trajectories. Values are sorted
// before accumulation, so the result is invariant to trial order.
RegretSummary aggregate_trials(const std::vector<Trajectory>& trajectories);

CategoryCounts categorize(const Trace& trace);

// Right-hand side of the logarithmic regret guarantee:
//   8 * sum_{i != k*} ln(n) / gap_i  +  (pi^2/3 + 1) * sum_{i != k*} gap_i
// Natural logarithm; n >= 2. Zero for a single exit. Throws
// DegenerateGapError when the optimum is not unique.
double theorem_bound(const LossVector& losses, double rounds);

// Runs the full trial protocol at each violation rate. Each rate's regret is
// measured against the loss vector of its own stream (realized_gammas), the
// way replay scores against a trace's empirical rates; trial seeds are
// shared across rates so the sweep isolates the effect of the violations.
std::vector<SweepPoint> sd_violation_sweep(const EnvironmentSpec& base,
                                           const std::vector<double>& epsilons, PolicyKind kind,
                                           const ExitProfile& profile, std::int64_t rounds,
                                           int trials, std::uint64_t base_seed,
                                           int parallelism = 1);

}  // namespace uee
