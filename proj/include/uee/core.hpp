#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace uee {

// Predicted class id. Binary {0, 1} in synthetic streams; larger alphabets
// are accepted wherever only agreement between exits matters.
using Label = int;

// Static description of a multi-exit cascade: K exits placed after the given
// backbone layers, each with an accumulated cost. The accuracy/cost trade-off
// weight is already folded into the costs, so they are directly comparable to
// error rates.
//
// Exits are numbered 1..K throughout the library.
class ExitProfile {
public:
    //  - layer_positions: 1-based backbone layer indices, strictly increasing
    //  - costs: per-exit accumulated costs, non-negative and non-decreasing
    ExitProfile(std::vector<int> layer_positions, std::vector<double> costs);

    int num_exits() const { return static_cast<int>(costs_.size()); }
    const std::vector<int>& layer_positions() const { return layer_positions_; }
    const std::vector<double>& costs() const { return costs_; }
    double cost(int exit) const { return costs_[static_cast<std::size_t>(exit - 1)]; }

private:
    std::vector<int> layer_positions_;
    std::vector<double> costs_;
};

// One sample's prediction at every exit. `true_label` is evaluation-only
// metadata: the policy layer never reads it.
struct PredictionRecord {
    std::vector<Label> predictions;
    std::optional<Label> true_label;
};

// Per-exit error rates paired with the total losses they induce under a
// profile: loss_k = gamma_k + cost_k.
class LossVector {
public:
    LossVector() = default;

    int size() const { return static_cast<int>(losses_.size()); }
    const std::vector<double>& gammas() const { return gammas_; }
    const std::vector<double>& losses() const { return losses_; }
    double loss(int exit) const { return losses_[static_cast<std::size_t>(exit - 1)]; }

    friend LossVector build_loss_vector(const std::vector<double>& gammas,
                                        const ExitProfile& profile);

private:
    std::vector<double> gammas_;
    std::vector<double> losses_;
};

// Sufficient statistics of the unsupervised bandit: per-exit observation
// counts, disagreement counts against exit 1, and their ratios.
struct BanditState {
    std::vector<std::int64_t> observations;   // N_k: times exit k's prediction was seen
    std::vector<std::int64_t> disagreements;  // X_k: times it differed from exit 1's
    std::vector<double> disagreement_rate;    // X_k / N_k (0 while N_k = 0)
    std::int64_t round = 0;                   // completed rounds
};

// losses[k] = gammas[k] + profile.costs[k]. Throws DimensionError on length
// mismatch, DomainError if any gamma is outside [0, 1].
LossVector build_loss_vector(const std::vector<double>& gammas, const ExitProfile& profile);

// 1-based index of the loss-minimizing exit; ties go to the smallest
// (cheapest) index. Throws DimensionError on an empty vector.
int optimal_exit(const LossVector& losses);

// Per-exit regret gaps: gap_i = loss_i - loss_{k*}. Componentwise >= 0 with
// gap_{k*} = 0.
std::vector<double> reward_gaps(const LossVector& losses);

}  // namespace uee
