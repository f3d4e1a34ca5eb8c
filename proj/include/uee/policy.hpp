#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uee/core.hpp"

namespace uee {

enum class PolicyType {
    kUnsupervisedUcb,  // disagreement-based UCB over surrogate rewards
    kLastExit,
    kRandomExit,
    kFixed,
    kOracleUcb1,  // supervised UCB1 reference; needs labeled streams
};

// Value type identifying a policy and its parameters.
class PolicyKind {
public:
    static PolicyKind uee_ucb(double alpha = 1.0);
    static PolicyKind last_exit();
    static PolicyKind random_exit();
    static PolicyKind fixed(int exit);
    static PolicyKind oracle_ucb1(double alpha = 1.0);

    // Accepts "uee_ucb", "last_exit", "random_exit", "fixed:<k>",
    // "oracle_ucb1". `alpha` applies to the UCB variants.
    static PolicyKind parse(const std::string& text, double alpha = 1.0);

    PolicyType type() const { return type_; }
    double alpha() const { return alpha_; }
    int fixed_exit() const { return fixed_exit_; }
    bool is_supervised() const { return type_ == PolicyType::kOracleUcb1; }

    // Stable identifier used in result tables, e.g. "uee_ucb" or "fixed_2".
    std::string name() const;

private:
    PolicyKind(PolicyType type, double alpha, int fixed_exit);

    PolicyType type_;
    double alpha_;
    int fixed_exit_;
};

// One round's choice. `ucb_indices` carries the per-exit index values for the
// index policies, for diagnostics.
struct Decision {
    int chosen_exit = 0;  // 1-based
    std::optional<std::vector<double>> ucb_indices;
};

// The decision index of the unsupervised policy, one value per exit:
//   index_k = P1k + c_1 - c_k + sqrt(alpha * ln(t) / N_k)
// Requires t >= 2 and every N_k >= 1.
std::vector<double> uee_indices(const std::vector<double>& disagreement_rate,
                                const std::vector<std::int64_t>& observations,
                                const std::vector<double>& costs, std::int64_t t, double alpha);

// Sequential exit-selection policy. Usage per round t = 1, 2, ...:
// `decide(t)` then `update(prefix)` where prefix holds the predictions of
// exits 1..chosen_exit. All kinds share the same disagreement bookkeeping;
// only the decision rule differs.
//
// The unsupervised UCB policy takes the full cascade on round 1 so every
// exit starts observed; the supervised reference does the same. Both then
// pick the index argmax (smallest exit on ties) from round 2 on.
class Policy {
public:
    Policy(const ExitProfile& profile, PolicyKind kind, std::uint64_t seed);

    // `t` must be exactly state().round + 1.
    Decision decide(std::int64_t t);
    Decision decide() { return decide(state_.round + 1); }

    // Ingests the observed prediction prefix of the round just decided. The
    // prefix length must equal the chosen exit. `true_label` is required by
    // the supervised reference and ignored by every other kind.
    void update(std::span<const Label> observed_prefix, std::optional<Label> true_label = {});

    const BanditState& state() const { return state_; }
    const PolicyKind& kind() const { return kind_; }
    int num_exits() const { return profile_.num_exits(); }

private:
    ExitProfile profile_;
    PolicyKind kind_;
    BanditState state_;
    std::mt19937_64 gen_;
    int pending_exit_ = 0;  // chosen exit awaiting its update, 0 = none

    // Supervised reference bookkeeping: per-exit labeled observations and
    // mistakes, giving the empirical loss estimate err_k/n_k + c_k.
    std::vector<std::int64_t> labeled_counts_;
    std::vector<std::int64_t> labeled_errors_;
};

}  // namespace uee
