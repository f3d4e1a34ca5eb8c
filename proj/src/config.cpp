#include "uee/config.hpp"

#include <fstream>
#include <sstream>

#include "uee/errors.hpp"

namespace uee {

std::vector<int> parse_exit_configuration(const std::string& bits) {
    if (bits.empty()) {
        throw ParseError("empty exit-configuration vector");
    }
    std::vector<int> layers;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            layers.push_back(static_cast<int>(i) + 1);
        } else if (bits[i] != '0') {
            throw ParseError("exit-configuration vectors are binary strings, got `" + bits + "`");
        }
    }
    if (layers.empty()) {
        throw DomainError("exit configuration `" + bits + "` enables no exits");
    }
    return layers;
}

std::vector<double> build_cs1(const std::vector<int>& layer_positions, double lambda) {
    if (!(lambda > 0.0)) {
        throw DomainError("cs1 needs a positive cost scale");
    }
    std::vector<double> costs;
    costs.reserve(layer_positions.size());
    for (int position : layer_positions) {
        costs.push_back(lambda * position);
    }
    return costs;
}

std::vector<double> build_cs2(const std::vector<int>& layer_positions, int threshold, double low,
                              double high) {
    if (low > high) {
        throw DomainError("cs2 edge cost exceeds the cloud cost; costs would decrease with depth");
    }
    std::vector<double> costs;
    costs.reserve(layer_positions.size());
    for (int position : layer_positions) {
        costs.push_back(position <= threshold ? low : high);
    }
    return costs;
}

ExitProfile build_profile(const ProfileConfig& config) {
    if (config.cost_structure == "cs1") {
        return ExitProfile(config.layers, build_cs1(config.layers, config.lambda));
    }
    if (config.cost_structure == "cs2") {
        return ExitProfile(config.layers, build_cs2(config.layers, config.cs2_threshold,
                                                    config.cs2_low, config.cs2_high));
    }
    throw ValidationError("unknown cost structure `" + config.cost_structure +
                          "` (expected cs1 or cs2)");
}

namespace {

// Collects human-readable problems; thrown as one ValidationError at the end
// so a bad config reports everything wrong with it in one pass.
struct ProblemList {
    std::vector<std::string> problems;

    void add(const std::string& p) { problems.push_back(p); }

    void raise_if_any() const {
        if (problems.empty()) {
            return;
        }
        std::ostringstream msg;
        msg << "invalid experiment config (" << problems.size() << " problem"
            << (problems.size() == 1 ? "" : "s") << "):";
        for (const auto& p : problems) {
            msg << "\n  - " << p;
        }
        throw ValidationError(msg.str());
    }
};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    ProblemList problems;

    try {
        if (!doc.contains("profile")) {
            problems.add("missing `profile` section");
        } else {
            const auto& p = doc.at("profile");
            const bool has_bits = p.contains("exit_configuration");
            const bool has_layers = p.contains("layers");
            if (has_bits == has_layers) {
                problems.add("profile needs exactly one of `exit_configuration` / `layers`");
            } else if (has_bits) {
                config.profile.layers =
                    parse_exit_configuration(p.at("exit_configuration").get<std::string>());
            } else {
                config.profile.layers = p.at("layers").get<std::vector<int>>();
            }
            config.profile.cost_structure = p.value("cost_structure", std::string("cs1"));
            config.profile.lambda = p.value("lambda", 1.0 / 12.0);
            config.profile.cs2_threshold = p.value("cs2_threshold", 7);
            config.profile.cs2_low = p.value("cs2_low", 0.5);
            config.profile.cs2_high = p.value("cs2_high", 1.0);
        }

        config.alpha = doc.value("alpha", 1.0);
        config.rounds = doc.value("rounds", std::int64_t{2000});
        config.trials = doc.value("trials", 20);
        config.seed = doc.value("seed", std::uint64_t{0});
        config.parallelism = doc.value("parallelism", 1);
        config.shuffle = doc.value("shuffle", true);
        config.epsilons = doc.value("epsilons", std::vector<double>{});

        const bool has_env = doc.contains("environment");
        const bool has_trace = doc.contains("trace");
        if (has_env == has_trace) {
            problems.add("config needs exactly one of `environment` / `trace`");
        }
        if (has_trace) {
            config.trace_path = doc.at("trace").get<std::string>();
        }
        if (has_env) {
            const auto& e = doc.at("environment");
            try {
                std::optional<std::int64_t> max_samples;
                if (e.contains("max_samples")) {
                    max_samples = e.at("max_samples").get<std::int64_t>();
                }
                config.environment = EnvironmentSpec(
                    e.at("gammas").get<std::vector<double>>(), e.value("label_prior", 0.5),
                    e.value("violation_rate", 0.0), config.seed, max_samples);
            } catch (const Error& err) {
                problems.add(std::string("environment: ") + err.what());
            }
        }

        if (!doc.contains("policies") || doc.at("policies").empty()) {
            problems.add("config needs a non-empty `policies` list");
        } else {
            for (const auto& name : doc.at("policies")) {
                try {
                    config.policies.push_back(
                        PolicyKind::parse(name.get<std::string>(), config.alpha));
                } catch (const Error& err) {
                    problems.add(err.what());
                }
            }
            for (std::size_t i = 0; i < config.policies.size(); ++i) {
                for (std::size_t j = i + 1; j < config.policies.size(); ++j) {
                    if (config.policies[i].name() == config.policies[j].name()) {
                        problems.add("duplicate policy `" + config.policies[i].name() + "`");
                    }
                }
            }
        }
    } catch (const nlohmann::json::exception& err) {
        problems.add(std::string("malformed config document: ") + err.what());
    } catch (const Error& err) {
        problems.add(err.what());
    }

    if (config.rounds < 1) {
        problems.add("`rounds` must be >= 1");
    }
    if (config.trials < 1) {
        problems.add("`trials` must be >= 1");
    }
    if (config.parallelism < 1) {
        problems.add("`parallelism` must be >= 1");
    }
    if (!(config.alpha > 0.0)) {
        problems.add("`alpha` must be positive");
    }
    for (double epsilon : config.epsilons) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
            problems.add("sweep violation rates must lie in [0, 1]");
        }
    }

    if (!config.profile.layers.empty()) {
        try {
            const ExitProfile profile = build_profile(config.profile);
            if (config.environment &&
                config.environment->num_exits() != profile.num_exits()) {
                problems.add("environment lists " +
                             std::to_string(config.environment->num_exits()) +
                             " error rates for a " + std::to_string(profile.num_exits()) +
                             "-exit profile");
            }
        } catch (const Error& err) {
            problems.add(std::string("profile: ") + err.what());
        }
    }

    problems.raise_if_any();
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(path + ": " + err.what());
    }
    return from_json(doc);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json doc;
    doc["profile"]["layers"] = profile.layers;
    doc["profile"]["cost_structure"] = profile.cost_structure;
    doc["profile"]["lambda"] = profile.lambda;
    if (profile.cost_structure == "cs2") {
        doc["profile"]["cs2_threshold"] = profile.cs2_threshold;
        doc["profile"]["cs2_low"] = profile.cs2_low;
        doc["profile"]["cs2_high"] = profile.cs2_high;
    }
    if (environment) {
        doc["environment"]["gammas"] = environment->gammas;
        doc["environment"]["label_prior"] = environment->label_prior;
        doc["environment"]["violation_rate"] = environment->violation_rate;
        if (environment->max_samples) {
            doc["environment"]["max_samples"] = *environment->max_samples;
        }
    }
    if (trace_path) {
        doc["trace"] = *trace_path;
        doc["shuffle"] = shuffle;
    }
    nlohmann::json policy_names = nlohmann::json::array();
    for (const auto& kind : policies) {
        if (kind.type() == PolicyType::kFixed) {
            policy_names.push_back("fixed:" + std::to_string(kind.fixed_exit()));
        } else {
            policy_names.push_back(kind.name());
        }
    }
    doc["policies"] = policy_names;
    doc["alpha"] = alpha;
    doc["rounds"] = rounds;
    doc["trials"] = trials;
    doc["seed"] = seed;
    // parallelism is deliberately not echoed: it is an execution knob that
    // cannot change results, so re-runs need not repeat it.
    if (!epsilons.empty()) {
        doc["epsilons"] = epsilons;
    }
    return doc;
}

}  // namespace uee
