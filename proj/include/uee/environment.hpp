#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "uee/core.hpp"

namespace uee {

// Fully determines a synthetic sample-stream distribution.
struct EnvironmentSpec {
    // Target per-exit error rates, non-increasing along the cascade.
    std::vector<double> gammas;
    // Probability that a sample's true label is 1.
    double label_prior = 0.5;
    // Probability that a sample is converted into one violating the
    // correct-stays-correct (strong dominance) property.
    double violation_rate = 0.0;
    std::uint64_t seed = 0;
    // Stream length; unset means unbounded.
    std::optional<std::int64_t> max_samples;

    EnvironmentSpec(std::vector<double> gammas, double label_prior, double violation_rate,
                    std::uint64_t seed, std::optional<std::int64_t> max_samples = {});

    int num_exits() const { return static_cast<int>(gammas.size()); }
};

// An in-memory labeled prediction log. On disk the format is line-delimited:
// a header `K=<int> labels=<int>` followed by one record per line,
// `<true_label>,<pred_1>,...,<pred_K>` (comma-separated, no spaces).
struct Trace {
    int num_exits = 0;
    int label_alphabet = 2;
    std::vector<PredictionRecord> records;

    std::int64_t size() const { return static_cast<std::int64_t>(records.size()); }
};

// Draws one sample whose correctness is monotone along the cascade.
//
// Scheme: Y ~ Bernoulli(label_prior); the first correct exit J is drawn with
// Pr{J <= k} = 1 - gamma_k (a valid CDF because the gammas are
// non-increasing), so with probability gamma_K every exit is wrong. Exits
// k >= J predict Y, exits k < J predict 1 - Y. The marginal error rate at
// exit k is then exactly gamma_k. Consumes exactly two uniform draws.
PredictionRecord draw_sd_sample(const EnvironmentSpec& spec, std::mt19937_64& gen);

// With probability spec.violation_rate, flips the prediction of one exit
// chosen uniformly among those after the first correct one, producing a
// correct-then-wrong pattern. Records that are all-wrong or first correct at
// the last exit pass through unchanged. Always consumes exactly two uniform
// draws, so streams with different violation rates stay aligned draw-for-draw.
PredictionRecord inject_violation(PredictionRecord record, const EnvironmentSpec& spec,
                                  std::mt19937_64& gen);

Trace parse_trace(std::istream& in, const std::string& origin = "<stream>");
Trace open_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& trace);
void write_trace(const std::filesystem::path& path, const Trace& trace);

// Per-exit empirical error rates of a labeled trace. Throws ContractError if
// any record lacks its label.
std::vector<double> empirical_gammas(const Trace& trace);

// Exact per-exit error rates of the stream a spec emits, violations
// included. A violation flips one exit in {J+1..K} chosen uniformly, so exit
// k picks up spec.violation_rate * sum_{j<k} Pr{J=j} / (K-j) on top of its
// target rate. Equals spec.gammas when the violation rate is zero.
std::vector<double> realized_gammas(const EnvironmentSpec& spec);

// Builds a labeled trace containing exactly the requested number of records
// per joint-prediction category (used for statistics round-trip fixtures).
// Patterns and labels are varied deterministically from the seed.
Trace make_category_trace(int num_exits, std::int64_t sd_violation, std::int64_t all_wrong,
                          std::int64_t all_correct, std::int64_t good, std::uint64_t seed);

// A replayable source of prediction records.
class SampleStream {
public:
    virtual ~SampleStream() = default;

    // Next record, or nullopt once the stream is exhausted.
    virtual std::optional<PredictionRecord> next() = 0;

    // Rewinds to the first record; the replayed sequence is identical.
    virtual void reset() = 0;

    virtual int num_exits() const = 0;
};

// Generates draw_sd_sample records with violations injected at the spec's
// rate. Sampling and violation randomness come from two sub-streams derived
// from the seed, so the underlying samples are shared by specs that differ
// only in violation_rate.
class SyntheticStream final : public SampleStream {
public:
    explicit SyntheticStream(EnvironmentSpec spec);

    std::optional<PredictionRecord> next() override;
    void reset() override;
    int num_exits() const override { return spec_.num_exits(); }
    const EnvironmentSpec& spec() const { return spec_; }

private:
    EnvironmentSpec spec_;
    std::mt19937_64 sample_gen_;
    std::mt19937_64 violation_gen_;
    std::int64_t emitted_ = 0;
};

// Replays a trace in file order, or in a deterministic shuffled order when a
// shuffle seed is given. Does not own the trace.
class TraceStream final : public SampleStream {
public:
    explicit TraceStream(const Trace& trace, std::optional<std::uint64_t> shuffle_seed = {});

    std::optional<PredictionRecord> next() override;
    void reset() override { position_ = 0; }
    int num_exits() const override { return trace_->num_exits; }

private:
    const Trace* trace_;
    std::vector<std::int64_t> order_;
    std::int64_t position_ = 0;
};

}  // namespace uee
