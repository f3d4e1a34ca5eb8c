#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uee/core.hpp"
#include "uee/environment.hpp"
#include "uee/policy.hpp"

namespace uee {

// Exit-configuration bit vector ("101000100001") to 1-based layer positions:
// a 1 at 0-based index i marks an exit after backbone layer i + 1.
std::vector<int> parse_exit_configuration(const std::string& bits);

// Depth-proportional costs: cost_k = lambda * layer_position_k.
std::vector<double> build_cs1(const std::vector<int>& layer_positions, double lambda);

// Slabbed edge/cloud costs: `low` for exits at or below `threshold` layers,
// `high` beyond it.
std::vector<double> build_cs2(const std::vector<int>& layer_positions, int threshold = 7,
                              double low = 0.5, double high = 1.0);

struct ProfileConfig {
    std::vector<int> layers;     // resolved exit layer positions
    std::string cost_structure;  // "cs1" or "cs2"
    double lambda = 1.0 / 12.0;
    int cs2_threshold = 7;
    double cs2_low = 0.5;
    double cs2_high = 1.0;
};

ExitProfile build_profile(const ProfileConfig& config);

// Everything a run needs; read from a JSON document and echoed verbatim into
// the output metadata. Exactly one of `environment` / `trace` is set.
struct ExperimentConfig {
    ProfileConfig profile;
    std::optional<EnvironmentSpec> environment;
    std::optional<std::string> trace_path;
    bool shuffle = true;  // replay only
    std::vector<PolicyKind> policies;
    double alpha = 1.0;
    std::int64_t rounds = 2000;
    int trials = 20;
    std::uint64_t seed = 0;
    int parallelism = 1;
    std::vector<double> epsilons;  // sweep only

    // Throws ValidationError listing every problem found, not just the first.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig load(const std::string& path);

    nlohmann::json to_json() const;
};

}  // namespace uee
