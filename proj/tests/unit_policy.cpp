#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "uee/core.hpp"
#include "uee/environment.hpp"
#include "uee/errors.hpp"
#include "uee/policy.hpp"

using namespace uee;

namespace {

ExitProfile profile_with_costs(std::vector<double> costs) {
    std::vector<int> layers(costs.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i] = static_cast<int>(i) + 1;
    }
    return ExitProfile(std::move(layers), std::move(costs));
}

void step(Policy& policy, const std::vector<Label>& predictions,
          std::optional<Label> truth = {}) {
    const Decision decision = policy.decide();
    const std::span<const Label> prefix(predictions.data(),
                                        static_cast<std::size_t>(decision.chosen_exit));
    policy.update(prefix, truth);
}

}  // namespace

TEST_CASE("policies start from a zeroed state") {
    auto profile = profile_with_costs({0.1, 0.2, 0.3, 0.4});
    Policy policy(profile, PolicyKind::uee_ucb(), 1);
    const auto& state = policy.state();
    CHECK(state.round == 0);
    CHECK(state.observations == std::vector<std::int64_t>{0, 0, 0, 0});
    CHECK(state.disagreements == std::vector<std::int64_t>{0, 0, 0, 0});
    CHECK(state.disagreement_rate == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("first decision takes the full cascade, then indices kick in") {
    auto profile = profile_with_costs({0.0, 0.5});
    Policy policy(profile, PolicyKind::uee_ucb(1.0), 1);

    const Decision first = policy.decide(1);
    CHECK(first.chosen_exit == 2);
    policy.update(std::vector<Label>{0, 1});  // exits disagree

    const Decision second = policy.decide(2);
    REQUIRE(second.ucb_indices);
    // ln(2) bonus with one observation each: sqrt(ln 2) = 0.8325546111576977.
    CHECK((*second.ucb_indices)[0] == doctest::Approx(0.8325546111576977).epsilon(1e-12));
    CHECK((*second.ucb_indices)[1] == doctest::Approx(1.3325546111576977).epsilon(1e-12));
    CHECK(second.chosen_exit == 2);
}

TEST_CASE("single-exit cascades always use exit 1") {
    auto profile = profile_with_costs({0.3});
    Policy policy(profile, PolicyKind::uee_ucb(), 3);
    for (int t = 1; t <= 20; ++t) {
        const Decision decision = policy.decide(t);
        CHECK(decision.chosen_exit == 1);
        policy.update(std::vector<Label>{1});
    }
}

TEST_CASE("constant policies") {
    auto profile = profile_with_costs({0.1, 0.2, 0.3});
    SUBCASE("fixed") {
        Policy policy(profile, PolicyKind::fixed(2), 0);
        for (int t = 1; t <= 10; ++t) {
            CHECK(policy.decide(t).chosen_exit == 2);
            policy.update(std::vector<Label>{0, 1});
        }
    }
    SUBCASE("fixed exit must exist") {
        CHECK_THROWS_AS(Policy(profile, PolicyKind::fixed(4), 0), DomainError);
    }
    SUBCASE("last exit") {
        Policy policy(profile, PolicyKind::last_exit(), 0);
        CHECK(policy.decide(1).chosen_exit == 3);
    }
    SUBCASE("random exit stays in range and is seed-deterministic") {
        Policy a(profile, PolicyKind::random_exit(), 17);
        Policy b(profile, PolicyKind::random_exit(), 17);
        for (int t = 1; t <= 50; ++t) {
            const int exit_a = a.decide(t).chosen_exit;
            const int exit_b = b.decide(t).chosen_exit;
            CHECK(exit_a == exit_b);
            CHECK(exit_a >= 1);
            CHECK(exit_a <= 3);
            std::vector<Label> prefix(static_cast<std::size_t>(exit_a), 0);
            a.update(prefix);
            b.update(prefix);
        }
    }
}

TEST_CASE("frozen index evaluation") {
    // P1 = (0, 0.2, 0.35), costs = (1, 4, 9)/12, N = (100, 10, 10), t = 100.
    const auto indices = uee_indices({0.0, 0.2, 0.35}, {100, 10, 10},
                                     {1.0 / 12, 4.0 / 12, 9.0 / 12}, 100, 1.0);
    CHECK(indices[0] == doctest::Approx(0.21459660262893474).epsilon(1e-12));
    CHECK(indices[1] == doctest::Approx(0.6286140424415112).epsilon(1e-12));
    CHECK(indices[2] == doctest::Approx(0.36194737577484454).epsilon(1e-12));
    CHECK(std::max_element(indices.begin(), indices.end()) - indices.begin() == 1);
}

TEST_CASE("starved arms get explored") {
    // One observation against a thousand at t = 1000: the bonus
    // sqrt(ln 1000) = 2.628260884878466 dominates any cost difference here.
    const auto indices = uee_indices({0.0, 0.0}, {1000, 1}, {0.0, 1.0}, 1000, 1.0);
    CHECK(indices[1] - indices[0] ==
          doctest::Approx(2.628260884878466 - 1.0 - std::sqrt(std::log(1000.0) / 1000.0))
              .epsilon(1e-9));
    CHECK(indices[1] > indices[0]);
}

TEST_CASE("index ties break to the cheapest exit") {
    const auto indices = uee_indices({0.0, 0.0, 0.0}, {10, 10, 10}, {0.2, 0.2, 0.2}, 50, 1.0);
    CHECK(indices[0] == indices[1]);
    CHECK(indices[1] == indices[2]);

    auto profile = profile_with_costs({0.2, 0.2, 0.2});
    Policy policy(profile, PolicyKind::uee_ucb(), 1);
    step(policy, {1, 1, 1});
    CHECK(policy.decide(2).chosen_exit == 1);
}

TEST_CASE("index is strictly decreasing in the observation count") {
    const auto sparse = uee_indices({0.3, 0.3}, {10, 10}, {0.0, 0.1}, 200, 1.0);
    const auto dense = uee_indices({0.3, 0.3}, {10, 40}, {0.0, 0.1}, 200, 1.0);
    CHECK(dense[1] < sparse[1]);
    CHECK(dense[0] == sparse[0]);
}

TEST_CASE("decision contracts") {
    auto profile = profile_with_costs({0.0, 0.5});
    SUBCASE("round counter must advance one at a time") {
        Policy policy(profile, PolicyKind::uee_ucb(), 1);
        CHECK_THROWS_AS(policy.decide(2), ContractError);  // skips the forced full pass
        CHECK_THROWS_AS(policy.decide(0), ContractError);
    }
    SUBCASE("update must match the pending decision") {
        Policy policy(profile, PolicyKind::uee_ucb(), 1);
        CHECK_THROWS_AS(policy.update(std::vector<Label>{1, 0}), ContractError);  // no decide yet
        const Decision decision = policy.decide(1);
        CHECK(decision.chosen_exit == 2);
        CHECK_THROWS_AS(policy.update(std::vector<Label>{1}), ContractError);  // short prefix
        CHECK_NOTHROW(policy.update(std::vector<Label>{1, 0}));
    }
    SUBCASE("no double decide") {
        Policy policy(profile, PolicyKind::last_exit(), 1);
        policy.decide(1);
        CHECK_THROWS_AS(policy.decide(2), ContractError);
    }
    SUBCASE("raw index evaluation rejects unseen arms and early rounds") {
        CHECK_THROWS_AS(uee_indices({0.0}, {0}, {0.0}, 2, 1.0), ContractError);
        CHECK_THROWS_AS(uee_indices({0.0}, {1}, {0.0}, 1, 1.0), ContractError);
    }
    SUBCASE("alpha must be positive") {
        CHECK_THROWS_AS(PolicyKind::uee_ucb(0.0), DomainError);
        CHECK_THROWS_AS(PolicyKind::oracle_ucb1(-1.0), DomainError);
    }
}

TEST_CASE("updates ingest the whole observed prefix") {
    auto profile = profile_with_costs({0.1, 0.2, 0.3});
    Policy policy(profile, PolicyKind::last_exit(), 1);

    policy.decide(1);
    policy.update(std::vector<Label>{1, 1, 0});
    CHECK(policy.state().disagreements == std::vector<std::int64_t>{0, 0, 1});
    CHECK(policy.state().observations == std::vector<std::int64_t>{1, 1, 1});

    Policy fixed1(profile, PolicyKind::fixed(1), 1);
    fixed1.decide(1);
    fixed1.update(std::vector<Label>{1});
    CHECK(fixed1.state().disagreements[0] == 0);  // an exit never disagrees with itself
    CHECK(fixed1.state().observations[0] == 1);
}

TEST_CASE("cascaded bookkeeping invariants hold along a run") {
    auto profile = profile_with_costs({1.0 / 12, 4.0 / 12, 9.0 / 12});
    EnvironmentSpec spec({0.4, 0.2, 0.1}, 0.5, 0.1, 2024);
    SyntheticStream stream(spec);
    Policy policy(profile, PolicyKind::uee_ucb(), 5);
    for (int t = 1; t <= 2000; ++t) {
        const Decision decision = policy.decide(t);
        auto record = *stream.next();
        record.predictions.resize(static_cast<std::size_t>(decision.chosen_exit));
        policy.update(record.predictions);

        const auto& state = policy.state();
        CHECK(state.round == t);
        CHECK(state.observations[0] == t);  // exit 1 is observed every round
        for (std::size_t k = 0; k + 1 < state.observations.size(); ++k) {
            CHECK(state.observations[k] >= state.observations[k + 1]);
        }
        CHECK(state.disagreement_rate[0] == 0.0);
        for (double rate : state.disagreement_rate) {
            CHECK(rate >= 0.0);
            CHECK(rate <= 1.0);
        }
    }
}

TEST_CASE("disagreement estimate converges to the error-rate difference") {
    // gamma_1 - gamma_K = 0.2 under monotone correctness.
    auto profile = profile_with_costs({0.0, 0.0});
    EnvironmentSpec spec({0.3, 0.1}, 0.5, 0.0, 808);
    SyntheticStream stream(spec);
    Policy policy(profile, PolicyKind::fixed(2), 1);
    const int n = 10000;
    for (int t = 1; t <= n; ++t) {
        policy.decide(t);
        policy.update((*stream.next()).predictions);
    }
    CHECK(std::abs(policy.state().disagreement_rate[1] - 0.2) < 3 * std::sqrt(0.2 * 0.8 / n));
}

TEST_CASE("supervised reference") {
    auto profile = profile_with_costs({0.05, 0.1});
    SUBCASE("labels are mandatory") {
        Policy policy(profile, PolicyKind::oracle_ucb1(), 1);
        policy.decide(1);
        CHECK_THROWS_AS(policy.update(std::vector<Label>{1, 1}), ContractError);
    }
    SUBCASE("finds the low-loss arm on an easy instance") {
        EnvironmentSpec spec({0.45, 0.05}, 0.5, 0.0, 6060);
        SyntheticStream stream(spec);
        Policy policy(profile, PolicyKind::oracle_ucb1(), 9);
        int late_picks_of_best = 0;
        for (int t = 1; t <= 3000; ++t) {
            const Decision decision = policy.decide(t);
            auto record = *stream.next();
            const Label truth = *record.true_label;
            record.predictions.resize(static_cast<std::size_t>(decision.chosen_exit));
            policy.update(record.predictions, truth);
            if (t > 2500 && decision.chosen_exit == 2) {
                ++late_picks_of_best;
            }
        }
        CHECK(late_picks_of_best > 450);  // losses (0.5, 0.15): exit 2 dominates
    }
}

TEST_CASE("policy kind parsing and naming") {
    CHECK(PolicyKind::parse("uee_ucb", 1.5).name() == "uee_ucb");
    CHECK(PolicyKind::parse("uee_ucb", 1.5).alpha() == 1.5);
    CHECK(PolicyKind::parse("fixed:3").fixed_exit() == 3);
    CHECK(PolicyKind::parse("fixed:3").name() == "fixed_3");
    CHECK(PolicyKind::parse("last_exit").name() == "last_exit");
    CHECK(PolicyKind::parse("random_exit").name() == "random_exit");
    CHECK(PolicyKind::parse("oracle_ucb1").is_supervised());
    CHECK_THROWS_AS(PolicyKind::parse("thompson"), ParseError);
    CHECK_THROWS_AS(PolicyKind::parse("fixed:x"), ParseError);
}
