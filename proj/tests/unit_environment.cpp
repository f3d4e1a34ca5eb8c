#include <doctest.h>

#include <cmath>
#include <sstream>

#include "uee/environment.hpp"
#include "uee/errors.hpp"
#include "uee/evaluation.hpp"
#include "uee/random.hpp"

using namespace uee;

namespace {

bool violates_monotone_correctness(const PredictionRecord& record) {
    bool seen_correct = false;
    for (Label p : record.predictions) {
        const bool correct = p == *record.true_label;
        if (seen_correct && !correct) {
            return true;
        }
        seen_correct = seen_correct || correct;
    }
    return false;
}

}  // namespace

TEST_CASE("environment spec validation") {
    CHECK_NOTHROW(EnvironmentSpec({0.3, 0.1}, 0.5, 0.0, 1));
    CHECK_THROWS_AS(EnvironmentSpec({0.1, 0.3}, 0.5, 0.0, 1), DomainError);  // increasing
    CHECK_THROWS_AS(EnvironmentSpec({1.2, 0.1}, 0.5, 0.0, 1), DomainError);
    CHECK_THROWS_AS(EnvironmentSpec({0.3, 0.1}, 1.5, 0.0, 1), DomainError);
    CHECK_THROWS_AS(EnvironmentSpec({0.3, 0.1}, 0.5, -0.1, 1), DomainError);
    CHECK_THROWS_AS(EnvironmentSpec({}, 0.5, 0.0, 1), DimensionError);
}

TEST_CASE("sd sampler degenerate cases") {
    std::mt19937_64 gen(42);
    SUBCASE("zero error rates force all-correct") {
        EnvironmentSpec spec({0, 0, 0}, 0.5, 0, 1);
        for (int i = 0; i < 200; ++i) {
            auto record = draw_sd_sample(spec, gen);
            for (Label p : record.predictions) {
                CHECK(p == *record.true_label);
            }
        }
    }
    SUBCASE("certain error at every exit") {
        EnvironmentSpec spec({1, 1}, 0.5, 0, 1);
        for (int i = 0; i < 200; ++i) {
            auto record = draw_sd_sample(spec, gen);
            for (Label p : record.predictions) {
                CHECK(p == 1 - *record.true_label);
            }
        }
    }
}

TEST_CASE("sd sampler hits its marginals and the disagreement identity") {
    const int n = 100000;
    EnvironmentSpec spec({0.3, 0.1}, 0.5, 0, 977);
    SyntheticStream stream(spec);
    int wrong1 = 0, wrong2 = 0, disagree = 0, violations = 0;
    for (int i = 0; i < n; ++i) {
        auto record = *stream.next();
        wrong1 += record.predictions[0] != *record.true_label;
        wrong2 += record.predictions[1] != *record.true_label;
        disagree += record.predictions[0] != record.predictions[1];
        violations += violates_monotone_correctness(record);
    }
    CHECK(violations == 0);
    // Marginals within 3 sigma of the binomial standard error.
    CHECK(std::abs(wrong1 / double(n) - 0.3) < 3 * std::sqrt(0.3 * 0.7 / n));
    CHECK(std::abs(wrong2 / double(n) - 0.1) < 3 * std::sqrt(0.1 * 0.9 / n));
    // Monte-Carlo check of the disagreement rate gamma_1 - gamma_2 = 0.2.
    CHECK(std::abs(disagree / double(n) - 0.2) < 3 * std::sqrt(0.2 * 0.8 / n));
    // On binary monotone records the identity is exact per-trace, not just
    // in expectation: the two exits disagree iff exactly one is correct.
    CHECK(disagree == wrong1 - wrong2);
}

TEST_CASE("violation injection") {
    SUBCASE("rate zero is the identity") {
        EnvironmentSpec spec({0.3, 0.2, 0.1}, 0.5, 0.0, 5);
        std::mt19937_64 sample_gen(1), violation_gen(2);
        for (int i = 0; i < 500; ++i) {
            auto record = draw_sd_sample(spec, sample_gen);
            auto injected = inject_violation(record, spec, violation_gen);
            CHECK(injected.predictions == record.predictions);
        }
    }
    SUBCASE("rate one flips the single deeper exit") {
        EnvironmentSpec spec({0, 0}, 0.5, 1.0, 5);  // always correct from exit 1
        std::mt19937_64 sample_gen(3), violation_gen(4);
        for (int i = 0; i < 200; ++i) {
            auto record = draw_sd_sample(spec, sample_gen);
            auto injected = inject_violation(record, spec, violation_gen);
            CHECK(injected.predictions[0] == *record.true_label);
            CHECK(injected.predictions[1] == 1 - *record.true_label);
        }
    }
    SUBCASE("violated fraction matches rate times eligibility") {
        // Eligible records have their first correct exit at or before K-1:
        // Pr{J <= 2} = 1 - gamma_2 = 0.8, so 0.25 * 0.8 = 0.2 of records flip.
        const int n = 100000;
        EnvironmentSpec spec({0.3, 0.2, 0.1}, 0.5, 0.25, 99);
        SyntheticStream stream(spec);
        int violated = 0;
        for (int i = 0; i < n; ++i) {
            violated += violates_monotone_correctness(*stream.next());
        }
        CHECK(std::abs(violated / double(n) - 0.2) < 3 * std::sqrt(0.2 * 0.8 / n));
    }
    SUBCASE("label is required") {
        EnvironmentSpec spec({0.3}, 0.5, 1.0, 5);
        std::mt19937_64 gen(1);
        PredictionRecord record{{0}, std::nullopt};
        CHECK_THROWS_AS(inject_violation(record, spec, gen), ContractError);
    }
}

TEST_CASE("synthetic streams are deterministic and resettable") {
    EnvironmentSpec spec({0.4, 0.25, 0.1}, 0.5, 0.15, 1234);
    SyntheticStream a(spec);
    SyntheticStream b(spec);
    std::vector<PredictionRecord> first;
    for (int i = 0; i < 1000; ++i) {
        auto ra = *a.next();
        auto rb = *b.next();
        CHECK(ra.predictions == rb.predictions);
        CHECK(*ra.true_label == *rb.true_label);
        first.push_back(std::move(ra));
    }
    a.reset();
    for (int i = 0; i < 1000; ++i) {
        auto replay = *a.next();
        CHECK(replay.predictions == first[static_cast<std::size_t>(i)].predictions);
    }
}

TEST_CASE("streams that differ only in violation rate share base samples") {
    EnvironmentSpec clean({0.5, 0.3, 0.1}, 0.5, 0.0, 777);
    EnvironmentSpec noisy({0.5, 0.3, 0.1}, 0.5, 0.3, 777);
    SyntheticStream a(clean);
    SyntheticStream b(noisy);
    int flipped = 0;
    for (int i = 0; i < 2000; ++i) {
        auto ra = *a.next();
        auto rb = *b.next();
        CHECK(*ra.true_label == *rb.true_label);
        int diff = 0;
        for (std::size_t k = 0; k < ra.predictions.size(); ++k) {
            diff += ra.predictions[k] != rb.predictions[k];
        }
        CHECK(diff <= 1);  // a violation flips at most one exit
        flipped += diff;
    }
    CHECK(flipped > 0);
}

TEST_CASE("bounded streams expire") {
    EnvironmentSpec spec({0.3}, 0.5, 0.0, 1, 3);
    SyntheticStream stream(spec);
    CHECK(stream.next());
    CHECK(stream.next());
    CHECK(stream.next());
    CHECK_FALSE(stream.next());
}

TEST_CASE("trace parsing") {
    SUBCASE("echo test") {
        std::istringstream in("K=2 labels=2\n0,0,0\n1,1,1\n1,0,1\n");
        Trace trace = parse_trace(in);
        REQUIRE(trace.size() == 3);
        CHECK(trace.num_exits == 2);
        CHECK(*trace.records[0].true_label == 0);
        CHECK(trace.records[0].predictions == std::vector<Label>{0, 0});
        CHECK(trace.records[2].predictions == std::vector<Label>{0, 1});
    }
    SUBCASE("empty body is an empty stream") {
        std::istringstream in("K=2 labels=2\n");
        CHECK(parse_trace(in).size() == 0);
    }
    SUBCASE("record wider than the header") {
        std::istringstream in("K=2 labels=2\n0,0,0\n1,1,0,1\n");
        CHECK_THROWS_WITH_AS(parse_trace(in, "t.txt"),
                             doctest::Contains("t.txt:3"), DimensionError);
    }
    SUBCASE("malformed line carries its number") {
        std::istringstream in("K=2 labels=2\n0,0,0\nx,1,0\n");
        CHECK_THROWS_WITH_AS(parse_trace(in, "t.txt"), doctest::Contains(":3"), ParseError);
    }
    SUBCASE("bad header") {
        std::istringstream in("exits=2\n");
        CHECK_THROWS_AS(parse_trace(in), ParseError);
    }
    SUBCASE("label outside the alphabet") {
        std::istringstream in("K=2 labels=2\n0,2,0\n");
        CHECK_THROWS_AS(parse_trace(in), DomainError);
    }
    SUBCASE("write/parse round trip") {
        EnvironmentSpec spec({0.4, 0.2}, 0.5, 0.1, 5);
        SyntheticStream stream(spec);
        Trace trace;
        trace.num_exits = 2;
        for (int i = 0; i < 50; ++i) {
            trace.records.push_back(*stream.next());
        }
        std::ostringstream out;
        write_trace(out, trace);
        std::istringstream in(out.str());
        Trace parsed = parse_trace(in);
        REQUIRE(parsed.size() == trace.size());
        for (std::size_t i = 0; i < trace.records.size(); ++i) {
            CHECK(parsed.records[i].predictions == trace.records[i].predictions);
            CHECK(*parsed.records[i].true_label == *trace.records[i].true_label);
        }
    }
}

TEST_CASE("empirical gammas") {
    SUBCASE("all correct everywhere") {
        std::istringstream in("K=2 labels=2\n0,0,0\n1,1,1\n");
        CHECK(empirical_gammas(parse_trace(in)) == std::vector<double>{0, 0});
    }
    SUBCASE("counting") {
        std::istringstream in("K=2 labels=2\n0,1,0\n1,0,1\n0,0,0\n1,1,1\n");
        auto gammas = empirical_gammas(parse_trace(in));
        CHECK(gammas[0] == 0.5);
        CHECK(gammas[1] == 0.0);
    }
    SUBCASE("estimates match the generator within 3 sigma") {
        const int n = 100000;
        EnvironmentSpec spec({0.3, 0.1}, 0.5, 0, 31);
        SyntheticStream stream(spec);
        Trace trace;
        trace.num_exits = 2;
        for (int i = 0; i < n; ++i) {
            trace.records.push_back(*stream.next());
        }
        auto gammas = empirical_gammas(trace);
        CHECK(std::abs(gammas[0] - 0.3) < 3 * std::sqrt(0.3 * 0.7 / n));
        CHECK(std::abs(gammas[1] - 0.1) < 3 * std::sqrt(0.1 * 0.9 / n));
    }
    SUBCASE("missing labels") {
        Trace trace;
        trace.num_exits = 1;
        trace.records.push_back({{0}, std::nullopt});
        CHECK_THROWS_AS(empirical_gammas(trace), ContractError);
    }
}

TEST_CASE("trace replay order") {
    Trace trace;
    trace.num_exits = 1;
    for (Label v : {0, 1, 0, 1, 1}) {
        trace.records.push_back({{v}, v});
    }
    SUBCASE("file order by default") {
        TraceStream stream(trace);
        for (const auto& record : trace.records) {
            CHECK((*stream.next()).predictions == record.predictions);
        }
        CHECK_FALSE(stream.next());
    }
    SUBCASE("shuffles are seeded and replayable") {
        TraceStream a(trace, 9);
        TraceStream b(trace, 9);
        std::vector<Label> seen_a, seen_b;
        while (auto record = a.next()) {
            seen_a.push_back(record->predictions[0]);
        }
        while (auto record = b.next()) {
            seen_b.push_back(record->predictions[0]);
        }
        CHECK(seen_a == seen_b);
        a.reset();
        std::vector<Label> replay;
        while (auto record = a.next()) {
            replay.push_back(record->predictions[0]);
        }
        CHECK(replay == seen_a);
    }
}

TEST_CASE("realized error rates account for the violation drift") {
    SUBCASE("zero rate leaves the targets untouched") {
        EnvironmentSpec spec({0.4, 0.25, 0.1}, 0.5, 0.0, 1);
        CHECK(realized_gammas(spec) == spec.gammas);
    }
    SUBCASE("single exit streams cannot drift") {
        EnvironmentSpec spec({0.4}, 0.5, 0.9, 1);
        CHECK(realized_gammas(spec) == spec.gammas);
    }
    SUBCASE("closed form matches the generated stream") {
        const int n = 100000;
        EnvironmentSpec spec({0.5, 0.3, 0.1, 0.05}, 0.5, 0.3, 4321);
        const auto expected = realized_gammas(spec);
        SyntheticStream stream(spec);
        Trace trace;
        trace.num_exits = 4;
        for (int i = 0; i < n; ++i) {
            trace.records.push_back(*stream.next());
        }
        const auto measured = empirical_gammas(trace);
        for (std::size_t k = 0; k < expected.size(); ++k) {
            const double tolerance =
                3.0 * std::sqrt(expected[k] * (1.0 - expected[k]) / n) + 1e-12;
            CHECK(std::abs(measured[k] - expected[k]) < tolerance);
        }
        CHECK(expected[0] == spec.gammas[0]);  // exit 1 is never flipped
        for (std::size_t k = 1; k < expected.size(); ++k) {
            CHECK(expected[k] > spec.gammas[k]);
        }
    }
}

TEST_CASE("planted category traces recover their counts") {
    Trace trace = make_category_trace(4, 7, 3, 11, 9, 123);
    CategoryCounts counts = categorize(trace);
    CHECK(counts.sd_violation == 7);
    CHECK(counts.all_wrong == 3);
    CHECK(counts.all_correct == 11);
    CHECK(counts.good == 9);
    CHECK(counts.total == 30);
}
