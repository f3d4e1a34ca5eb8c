#include "uee/core.hpp"

#include <algorithm>
#include <string>

#include "uee/errors.hpp"

namespace uee {

ExitProfile::ExitProfile(std::vector<int> layer_positions, std::vector<double> costs)
    : layer_positions_(std::move(layer_positions)), costs_(std::move(costs)) {
    if (costs_.empty()) {
        throw DimensionError("exit profile needs at least one exit");
    }
    if (layer_positions_.size() != costs_.size()) {
        throw DimensionError("layer_positions has " + std::to_string(layer_positions_.size()) +
                             " entries but costs has " + std::to_string(costs_.size()));
    }
    for (std::size_t k = 0; k < layer_positions_.size(); ++k) {
        if (layer_positions_[k] < 1) {
            throw DomainError("layer positions are 1-based; got " +
                              std::to_string(layer_positions_[k]));
        }
        if (k > 0 && layer_positions_[k] <= layer_positions_[k - 1]) {
            throw DomainError("layer positions must be strictly increasing");
        }
        if (costs_[k] < 0.0) {
            throw DomainError("costs must be non-negative");
        }
        if (k > 0 && costs_[k] < costs_[k - 1]) {
            throw DomainError("costs must be non-decreasing along the cascade");
        }
    }
}

LossVector build_loss_vector(const std::vector<double>& gammas, const ExitProfile& profile) {
    if (static_cast<int>(gammas.size()) != profile.num_exits()) {
        throw DimensionError("got " + std::to_string(gammas.size()) + " error rates for " +
                             std::to_string(profile.num_exits()) + " exits");
    }
    for (double g : gammas) {
        if (!(g >= 0.0 && g <= 1.0)) {
            throw DomainError("error rates must lie in [0, 1]; got " + std::to_string(g));
        }
    }
    LossVector out;
    out.gammas_ = gammas;
    out.losses_.resize(gammas.size());
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        out.losses_[k] = gammas[k] + profile.costs()[k];
    }
    return out;
}

int optimal_exit(const LossVector& losses) {
    if (losses.size() == 0) {
        throw DimensionError("optimal_exit on empty loss vector");
    }
    const auto& l = losses.losses();
    // min_element keeps the first minimum, which is the tie-break we want.
    auto it = std::min_element(l.begin(), l.end());
    return static_cast<int>(it - l.begin()) + 1;
}

std::vector<double> reward_gaps(const LossVector& losses) {
    const int star = optimal_exit(losses);
    const double best = losses.loss(star);
    std::vector<double> gaps(losses.losses().size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        gaps[i] = losses.losses()[i] - best;
    }
    return gaps;
}

}  // namespace uee
