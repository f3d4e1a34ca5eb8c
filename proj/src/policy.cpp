#include "uee/policy.hpp"

#include <cmath>
#include <string>

#include "uee/errors.hpp"
#include "uee/random.hpp"

namespace uee {

namespace {

int argmax_smallest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best + 1;
}

int argmin_smallest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best + 1;
}

}  // namespace

PolicyKind::PolicyKind(PolicyType type, double alpha, int fixed_exit)
    : type_(type), alpha_(alpha), fixed_exit_(fixed_exit) {
    if ((type_ == PolicyType::kUnsupervisedUcb || type_ == PolicyType::kOracleUcb1) &&
        !(alpha_ > 0.0)) {
        throw DomainError("alpha must be positive");
    }
    if (type_ == PolicyType::kFixed && fixed_exit_ < 1) {
        throw DomainError("fixed policy needs an exit index >= 1");
    }
}

PolicyKind PolicyKind::uee_ucb(double alpha) {
    return PolicyKind(PolicyType::kUnsupervisedUcb, alpha, 0);
}
PolicyKind PolicyKind::last_exit() { return PolicyKind(PolicyType::kLastExit, 0.0, 0); }
PolicyKind PolicyKind::random_exit() { return PolicyKind(PolicyType::kRandomExit, 0.0, 0); }
PolicyKind PolicyKind::fixed(int exit) { return PolicyKind(PolicyType::kFixed, 0.0, exit); }
PolicyKind PolicyKind::oracle_ucb1(double alpha) {
    return PolicyKind(PolicyType::kOracleUcb1, alpha, 0);
}

PolicyKind PolicyKind::parse(const std::string& text, double alpha) {
    if (text == "uee_ucb") return uee_ucb(alpha);
    if (text == "last_exit") return last_exit();
    if (text == "random_exit") return random_exit();
    if (text == "oracle_ucb1") return oracle_ucb1(alpha);
    if (text.rfind("fixed:", 0) == 0) {
        try {
            return fixed(std::stoi(text.substr(6)));
        } catch (const std::exception&) {
            throw ParseError("cannot parse fixed exit index in `" + text + "`");
        }
    }
    throw ParseError("unknown policy `" + text +
                     "` (expected uee_ucb, last_exit, random_exit, fixed:<k>, oracle_ucb1)");
}

std::string PolicyKind::name() const {
    switch (type_) {
        case PolicyType::kUnsupervisedUcb: return "uee_ucb";
        case PolicyType::kLastExit: return "last_exit";
        case PolicyType::kRandomExit: return "random_exit";
        case PolicyType::kFixed: return "fixed_" + std::to_string(fixed_exit_);
        case PolicyType::kOracleUcb1: return "oracle_ucb1";
    }
    return "unknown";
}

std::vector<double> uee_indices(const std::vector<double>& disagreement_rate,
                                const std::vector<std::int64_t>& observations,
                                const std::vector<double>& costs, std::int64_t t, double alpha) {
    const std::size_t k_exits = costs.size();
    if (disagreement_rate.size() != k_exits || observations.size() != k_exits) {
        throw DimensionError("uee_indices inputs disagree on the number of exits");
    }
    if (t < 2) {
        throw ContractError("index decisions start at round 2; round 1 takes the full cascade");
    }
    const double log_t = std::log(static_cast<double>(t));
    std::vector<double> indices(k_exits);
    for (std::size_t k = 0; k < k_exits; ++k) {
        if (observations[k] < 1) {
            throw ContractError("every exit must be observed once before index decisions");
        }
        const double bonus = std::sqrt(alpha * log_t / static_cast<double>(observations[k]));
        indices[k] = disagreement_rate[k] + costs[0] - costs[k] + bonus;
    }
    return indices;
}

Policy::Policy(const ExitProfile& profile, PolicyKind kind, std::uint64_t seed)
    : profile_(profile), kind_(kind), gen_(rng::splitmix64(seed)) {
    const std::size_t k_exits = static_cast<std::size_t>(profile_.num_exits());
    if (kind_.type() == PolicyType::kFixed && kind_.fixed_exit() > profile_.num_exits()) {
        throw DomainError("fixed exit " + std::to_string(kind_.fixed_exit()) +
                          " exceeds the cascade's " + std::to_string(profile_.num_exits()) +
                          " exits");
    }
    state_.observations.assign(k_exits, 0);
    state_.disagreements.assign(k_exits, 0);
    state_.disagreement_rate.assign(k_exits, 0.0);
    state_.round = 0;
    labeled_counts_.assign(k_exits, 0);
    labeled_errors_.assign(k_exits, 0);
}

Decision Policy::decide(std::int64_t t) {
    if (pending_exit_ != 0) {
        throw ContractError("decide called with an update still pending");
    }
    if (t != state_.round + 1) {
        throw ContractError("decide expects round " + std::to_string(state_.round + 1) + ", got " +
                            std::to_string(t));
    }
    const int k_exits = profile_.num_exits();
    Decision decision;
    switch (kind_.type()) {
        case PolicyType::kUnsupervisedUcb: {
            if (t == 1) {
                decision.chosen_exit = k_exits;  // full cascade to seed every counter
                break;
            }
            decision.ucb_indices = uee_indices(state_.disagreement_rate, state_.observations,
                                               profile_.costs(), t, kind_.alpha());
            decision.chosen_exit = argmax_smallest(*decision.ucb_indices);
            break;
        }
        case PolicyType::kLastExit:
            decision.chosen_exit = k_exits;
            break;
        case PolicyType::kRandomExit:
            decision.chosen_exit = rng::uniform_int(gen_, 1, k_exits);
            break;
        case PolicyType::kFixed:
            decision.chosen_exit = kind_.fixed_exit();
            break;
        case PolicyType::kOracleUcb1: {
            if (t == 1) {
                decision.chosen_exit = k_exits;
                break;
            }
            const double log_t = std::log(static_cast<double>(t));
            std::vector<double> indices(static_cast<std::size_t>(k_exits));
            for (std::size_t k = 0; k < indices.size(); ++k) {
                if (state_.observations[k] < 1 || labeled_counts_[k] < 1) {
                    throw ContractError(
                        "every exit must be observed once before index decisions");
                }
                const double loss_estimate = static_cast<double>(labeled_errors_[k]) /
                                                 static_cast<double>(labeled_counts_[k]) +
                                             profile_.costs()[k];
                const double bonus =
                    std::sqrt(kind_.alpha() * log_t /
                              static_cast<double>(state_.observations[k]));
                indices[k] = loss_estimate - bonus;
            }
            decision.ucb_indices = indices;
            decision.chosen_exit = argmin_smallest(indices);
            break;
        }
    }
    pending_exit_ = decision.chosen_exit;
    return decision;
}

void Policy::update(std::span<const Label> observed_prefix, std::optional<Label> true_label) {
    if (pending_exit_ == 0) {
        throw ContractError("update called without a preceding decide");
    }
    if (static_cast<int>(observed_prefix.size()) != pending_exit_) {
        throw ContractError("observed prefix has " + std::to_string(observed_prefix.size()) +
                            " predictions but exit " + std::to_string(pending_exit_) +
                            " was chosen");
    }
    if (kind_.is_supervised() && !true_label) {
        throw ContractError("the supervised reference policy needs labeled streams");
    }
    const Label first = observed_prefix[0];
    for (int k = 0; k < pending_exit_; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        state_.observations[idx] += 1;
        if (observed_prefix[idx] != first) {
            state_.disagreements[idx] += 1;
        }
        state_.disagreement_rate[idx] = static_cast<double>(state_.disagreements[idx]) /
                                        static_cast<double>(state_.observations[idx]);
        if (kind_.is_supervised()) {
            labeled_counts_[idx] += 1;
            if (observed_prefix[idx] != *true_label) {
                labeled_errors_[idx] += 1;
            }
        }
    }
    state_.round += 1;
    pending_exit_ = 0;
}

}  // namespace uee
