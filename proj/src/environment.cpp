#include "uee/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "uee/errors.hpp"
#include "uee/random.hpp"

namespace uee {

namespace {

constexpr std::uint64_t kSampleStreamTag = 0x73616d706cULL;
constexpr std::uint64_t kViolationStreamTag = 0x76696f6cULL;

// First 1-based exit that predicts the true label, or K+1 if none does.
int first_correct_exit(const PredictionRecord& record, Label truth) {
    for (std::size_t k = 0; k < record.predictions.size(); ++k) {
        if (record.predictions[k] == truth) {
            return static_cast<int>(k) + 1;
        }
    }
    return static_cast<int>(record.predictions.size()) + 1;
}

}  // namespace

EnvironmentSpec::EnvironmentSpec(std::vector<double> gammas_in, double label_prior_in,
                                 double violation_rate_in, std::uint64_t seed_in,
                                 std::optional<std::int64_t> max_samples_in)
    : gammas(std::move(gammas_in)),
      label_prior(label_prior_in),
      violation_rate(violation_rate_in),
      seed(seed_in),
      max_samples(max_samples_in) {
    if (gammas.empty()) {
        throw DimensionError("environment spec needs at least one exit");
    }
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        if (!(gammas[k] >= 0.0 && gammas[k] <= 1.0)) {
            throw DomainError("error rates must lie in [0, 1]");
        }
        if (k > 0 && gammas[k] > gammas[k - 1]) {
            throw DomainError("error rates must be non-increasing along the cascade");
        }
    }
    if (!(label_prior >= 0.0 && label_prior <= 1.0)) {
        throw DomainError("label_prior must lie in [0, 1]");
    }
    if (!(violation_rate >= 0.0 && violation_rate <= 1.0)) {
        throw DomainError("violation_rate must lie in [0, 1]");
    }
    if (max_samples && *max_samples < 0) {
        throw DomainError("max_samples must be non-negative");
    }
}

PredictionRecord draw_sd_sample(const EnvironmentSpec& spec, std::mt19937_64& gen) {
    const int k_exits = spec.num_exits();
    const Label truth = rng::bernoulli(gen, spec.label_prior) ? 1 : 0;
    const double u = rng::uniform_unit(gen);

    // Pr{J <= k} = 1 - gamma_k, i.e. J is the first exit with u < 1 - gamma_k.
    int first_correct = k_exits + 1;
    for (int k = 1; k <= k_exits; ++k) {
        if (u < 1.0 - spec.gammas[static_cast<std::size_t>(k - 1)]) {
            first_correct = k;
            break;
        }
    }

    PredictionRecord record;
    record.true_label = truth;
    record.predictions.resize(static_cast<std::size_t>(k_exits));
    for (int k = 1; k <= k_exits; ++k) {
        record.predictions[static_cast<std::size_t>(k - 1)] = k >= first_correct ? truth : 1 - truth;
    }
    return record;
}

PredictionRecord inject_violation(PredictionRecord record, const EnvironmentSpec& spec,
                                  std::mt19937_64& gen) {
    // Both draws happen unconditionally; see header.
    const double coin = rng::uniform_unit(gen);
    const double pick = rng::uniform_unit(gen);

    if (!record.true_label) {
        throw ContractError("inject_violation needs the record's true label");
    }
    const int k_exits = static_cast<int>(record.predictions.size());
    const Label truth = *record.true_label;
    const int first_correct = first_correct_exit(record, truth);
    if (coin >= spec.violation_rate || first_correct > k_exits - 1) {
        return record;  // not selected, all-wrong, or correct only at the last exit
    }
    const int span = k_exits - first_correct;
    const int offset = std::min(static_cast<int>(pick * span), span - 1);
    const int flipped = first_correct + 1 + offset;
    record.predictions[static_cast<std::size_t>(flipped - 1)] = 1 - truth;
    return record;
}

Trace parse_trace(std::istream& in, const std::string& origin) {
    Trace trace;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(origin + ": missing header line");
    }
    if (std::sscanf(line.c_str(), "K=%d labels=%d", &trace.num_exits, &trace.label_alphabet) != 2) {
        throw ParseError(origin + ": header must be `K=<int> labels=<int>`, got `" + line + "`");
    }
    if (trace.num_exits < 1 || trace.label_alphabet < 1) {
        throw DomainError(origin + ": header declares K=" + std::to_string(trace.num_exits) +
                          " labels=" + std::to_string(trace.label_alphabet));
    }

    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<Label> fields;
        fields.reserve(static_cast<std::size_t>(trace.num_exits) + 1);
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            int value = 0;
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc() || value < 0) {
                throw ParseError(origin + ":" + std::to_string(line_no) +
                                 ": expected comma-separated non-negative integers, got `" + line +
                                 "`");
            }
            fields.push_back(value);
            p = next;
            if (p < end) {
                if (*p != ',') {
                    throw ParseError(origin + ":" + std::to_string(line_no) +
                                     ": expected `,`, got `" + std::string(1, *p) + "`");
                }
                ++p;
                if (p == end) {
                    throw ParseError(origin + ":" + std::to_string(line_no) + ": trailing comma");
                }
            }
        }
        if (static_cast<int>(fields.size()) != trace.num_exits + 1) {
            throw DimensionError(origin + ":" + std::to_string(line_no) + ": record has " +
                                 std::to_string(fields.size() - 1) + " predictions but header says K=" +
                                 std::to_string(trace.num_exits));
        }
        for (Label v : fields) {
            if (v >= trace.label_alphabet) {
                throw DomainError(origin + ":" + std::to_string(line_no) + ": label " +
                                  std::to_string(v) + " outside declared alphabet of size " +
                                  std::to_string(trace.label_alphabet));
            }
        }
        PredictionRecord record;
        record.true_label = fields[0];
        record.predictions.assign(fields.begin() + 1, fields.end());
        trace.records.push_back(std::move(record));
    }
    return trace;
}

Trace open_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace file " + path.string());
    }
    return parse_trace(in, path.string());
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << "K=" << trace.num_exits << " labels=" << trace.label_alphabet << "\n";
    for (const auto& record : trace.records) {
        if (!record.true_label) {
            throw ContractError("trace files always carry true labels");
        }
        out << *record.true_label;
        for (Label p : record.predictions) {
            out << ',' << p;
        }
        out << "\n";
    }
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write trace file " + path.string());
    }
    write_trace(out, trace);
    if (!out) {
        throw IoError("short write to trace file " + path.string());
    }
}

std::vector<double> empirical_gammas(const Trace& trace) {
    if (trace.records.empty()) {
        throw ContractError("empirical_gammas needs a non-empty trace");
    }
    std::vector<std::int64_t> wrong(static_cast<std::size_t>(trace.num_exits), 0);
    for (const auto& record : trace.records) {
        if (!record.true_label) {
            throw ContractError("empirical_gammas needs true labels on every record");
        }
        for (std::size_t k = 0; k < record.predictions.size(); ++k) {
            if (record.predictions[k] != *record.true_label) {
                ++wrong[k];
            }
        }
    }
    std::vector<double> gammas(wrong.size());
    for (std::size_t k = 0; k < wrong.size(); ++k) {
        gammas[k] = static_cast<double>(wrong[k]) / static_cast<double>(trace.records.size());
    }
    return gammas;
}

std::vector<double> realized_gammas(const EnvironmentSpec& spec) {
    const int k_exits = spec.num_exits();
    std::vector<double> gammas(spec.gammas);
    // Pr{J = j} = gamma_{j-1} - gamma_j with gamma_0 = 1; records with J = j
    // can have any exit in {j+1..K} flipped, each with rate epsilon / (K-j).
    double flip_rate = 0.0;
    for (int k = 2; k <= k_exits; ++k) {
        const int j = k - 1;
        const double mass_j =
            (j == 1 ? 1.0 : spec.gammas[static_cast<std::size_t>(j - 2)]) -
            spec.gammas[static_cast<std::size_t>(j - 1)];
        flip_rate += spec.violation_rate * mass_j / static_cast<double>(k_exits - j);
        gammas[static_cast<std::size_t>(k - 1)] += flip_rate;
    }
    return gammas;
}

Trace make_category_trace(int num_exits, std::int64_t sd_violation, std::int64_t all_wrong,
                          std::int64_t all_correct, std::int64_t good, std::uint64_t seed) {
    if (num_exits < 2) {
        throw DomainError("category fixtures need at least two exits");
    }
    if (sd_violation < 0 || all_wrong < 0 || all_correct < 0 || good < 0) {
        throw DomainError("category counts must be non-negative");
    }
    Trace trace;
    trace.num_exits = num_exits;
    trace.label_alphabet = 2;
    std::mt19937_64 gen(rng::splitmix64(seed));

    auto emit = [&](const std::vector<int>& correctness) {
        const Label truth = rng::bernoulli(gen, 0.5) ? 1 : 0;
        PredictionRecord record;
        record.true_label = truth;
        record.predictions.resize(static_cast<std::size_t>(num_exits));
        for (int k = 0; k < num_exits; ++k) {
            record.predictions[static_cast<std::size_t>(k)] =
                correctness[static_cast<std::size_t>(k)] ? truth : 1 - truth;
        }
        trace.records.push_back(std::move(record));
    };

    std::vector<int> bits(static_cast<std::size_t>(num_exits));
    for (std::int64_t i = 0; i < all_correct; ++i) {
        std::fill(bits.begin(), bits.end(), 1);
        emit(bits);
    }
    for (std::int64_t i = 0; i < all_wrong; ++i) {
        std::fill(bits.begin(), bits.end(), 0);
        emit(bits);
    }
    // Good records: one 0 -> 1 transition, position cycled for variety.
    for (std::int64_t i = 0; i < good; ++i) {
        const int transition = 1 + static_cast<int>(i % (num_exits - 1));
        for (int k = 0; k < num_exits; ++k) {
            bits[static_cast<std::size_t>(k)] = k >= transition ? 1 : 0;
        }
        emit(bits);
    }
    // Violations: correct at the cycled position, wrong right after it.
    for (std::int64_t i = 0; i < sd_violation; ++i) {
        const int peak = static_cast<int>(i % (num_exits - 1));
        for (int k = 0; k < num_exits; ++k) {
            bits[static_cast<std::size_t>(k)] = k == peak ? 1 : 0;
        }
        emit(bits);
    }
    return trace;
}

SyntheticStream::SyntheticStream(EnvironmentSpec spec)
    : spec_(std::move(spec)),
      sample_gen_(rng::derive_seed(spec_.seed, 0, kSampleStreamTag)),
      violation_gen_(rng::derive_seed(spec_.seed, 0, kViolationStreamTag)) {}

std::optional<PredictionRecord> SyntheticStream::next() {
    if (spec_.max_samples && emitted_ >= *spec_.max_samples) {
        return std::nullopt;
    }
    ++emitted_;
    PredictionRecord record = draw_sd_sample(spec_, sample_gen_);
    return inject_violation(std::move(record), spec_, violation_gen_);
}

void SyntheticStream::reset() {
    sample_gen_.seed(rng::derive_seed(spec_.seed, 0, kSampleStreamTag));
    violation_gen_.seed(rng::derive_seed(spec_.seed, 0, kViolationStreamTag));
    emitted_ = 0;
}

TraceStream::TraceStream(const Trace& trace, std::optional<std::uint64_t> shuffle_seed)
    : trace_(&trace), order_(trace.records.size()) {
    std::iota(order_.begin(), order_.end(), std::int64_t{0});
    if (shuffle_seed) {
        std::mt19937_64 gen(rng::splitmix64(*shuffle_seed));
        // Fisher-Yates with our own uniform_int so the order is
        // implementation-independent.
        for (std::int64_t i = static_cast<std::int64_t>(order_.size()) - 1; i > 0; --i) {
            const int j = rng::uniform_int(gen, 0, static_cast<int>(i));
            std::swap(order_[static_cast<std::size_t>(i)], order_[static_cast<std::size_t>(j)]);
        }
    }
}

std::optional<PredictionRecord> TraceStream::next() {
    if (position_ >= static_cast<std::int64_t>(order_.size())) {
        return std::nullopt;
    }
    return trace_->records[static_cast<std::size_t>(order_[static_cast<std::size_t>(position_++)])];
}

}  // namespace uee
