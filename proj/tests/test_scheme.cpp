#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "test_util.hpp"
#include "zesi/scheme.hpp"

using Catch::Matchers::WithinAbs;
using namespace zesi;

namespace {

std::vector<std::uint8_t> to_bytes(const std::vector<int>& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::vector<int> parity_y(const std::vector<int>& xs) {
    std::vector<int> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] % 2;
    return ys;
}

}  // namespace

TEST_CASE("codebook construction splits parity types by the rate test") {
    auto p = testutil::parity_source();
    SchemeCodebook cb = build_scheme(p, 4, 0.6, 20240816);

    REQUIRE(cb.n == 4);
    REQUIRE(cb.x_alphabet == 4);
    REQUIRE(cb.bins == 6);
    REQUIRE(cb.types.size() == 35);

    int colored = 0, binned = 0;
    for (const auto& rec : cb.types) {
        REQUIRE(rec.rate_tested);
        if (rec.colored) {
            ++colored;
            REQUIRE(std::log2(static_cast<double>(rec.chromatic_bound)) < 4 * 0.6);
            REQUIRE(rec.coloring.size() == rec.class_size);
        } else {
            ++binned;
            REQUIRE(std::log2(static_cast<double>(rec.chromatic_bound)) >= 4 * 0.6);
            REQUIRE(rec.coloring.empty());
        }
    }
    REQUIRE(colored == 33);
    REQUIRE(binned == 2);
}

TEST_CASE("stored colorings are proper on the induced power-graph subgraph") {
    auto p = testutil::parity_source();
    SchemeCodebook cb = build_scheme(p, 4, 0.6, 7);
    for (const auto& rec : cb.types) {
        if (!rec.colored) continue;
        std::vector<std::vector<int>> seqs;
        for_each_in_type_class(rec.type, [&](const std::vector<int>& s) { seqs.push_back(s); });
        REQUIRE(seqs.size() == rec.coloring.size());
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            REQUIRE(rec.coloring[i] < static_cast<std::uint32_t>(rec.chromatic_bound));
            for (std::size_t j = i + 1; j < seqs.size(); ++j)
                if (sequences_adjacent(cb.g_x, to_bytes(seqs[i]), to_bytes(seqs[j])))
                    REQUIRE(rec.coloring[i] != rec.coloring[j]);
        }
    }
}

TEST_CASE("the colored part of the codebook is independent of the seed") {
    auto p = testutil::parity_source();
    SchemeCodebook a = build_scheme(p, 4, 0.6, 1);
    SchemeCodebook b = build_scheme(p, 4, 0.6, 99999);
    REQUIRE(a.types.size() == b.types.size());
    REQUIRE(a.bins == b.bins);
    for (std::size_t t = 0; t < a.types.size(); ++t) {
        REQUIRE(a.types[t].colored == b.types[t].colored);
        REQUIRE(a.types[t].chromatic_bound == b.types[t].chromatic_bound);
        REQUIRE(a.types[t].coloring == b.types[t].coloring);
    }
}

TEST_CASE("colored trials round-trip exactly over the whole block space") {
    auto p = testutil::parity_source();
    SchemeCodebook cb = build_scheme(p, 4, 0.6, 3);
    int colored_checked = 0;
    for (int code = 0; code < 256; ++code) {
        std::vector<int> xs(4);
        int v = code;
        for (int i = 0; i < 4; ++i) {
            xs[i] = v % 4;
            v /= 4;
        }
        SchemeMessage msg = encode(cb, xs);
        const TypeRecord& rec = cb.types[msg.type_index];
        if (rec.colored)
            REQUIRE(msg.index < static_cast<std::uint64_t>(rec.chromatic_bound));
        else
            REQUIRE(msg.index < cb.bins);

        std::vector<int> xhat = decode(cb, msg, parity_y(xs));
        REQUIRE(empirical_type(xhat, 4).counts == rec.type.counts);
        if (rec.colored) {
            REQUIRE(xhat == xs);
            ++colored_checked;
        }
    }
    REQUIRE(colored_checked > 0);
}

TEST_CASE("encode and decode validate their arguments") {
    auto p = testutil::parity_source();
    SchemeCodebook cb = build_scheme(p, 4, 0.6, 3);
    REQUIRE_THROWS_AS(encode(cb, {0, 1, 2}), ValidationError);
    SchemeMessage bad{cb.types.size() + 10, 0};
    REQUIRE_THROWS_AS(decode(cb, bad, {0, 1, 0, 1}), ValidationError);
    SchemeMessage ok = encode(cb, {0, 1, 2, 3});
    REQUIRE_THROWS_AS(decode(cb, ok, {0, 1, 0, 5}), ValidationError);
    REQUIRE_THROWS_AS(decode(cb, ok, {0, 1, 0}), ValidationError);
}

TEST_CASE("bin decoding prefers the candidate most predictable from y") {
    std::vector<std::vector<int>> bin{{0, 0, 1, 1}, {0, 1, 0, 1}};
    REQUIRE(decode_within_bin(bin, {0, 1, 0, 1}) == std::vector<int>{0, 1, 0, 1});

    std::vector<std::vector<int>> tie{{0, 1}, {1, 0}};
    REQUIRE(decode_within_bin(tie, {0, 0}) == std::vector<int>{0, 1});

    REQUIRE_THROWS_AS(decode_within_bin({}, {0, 1}), ValidationError);
}

TEST_CASE("codebook caps and rate bounds are enforced") {
    auto p = testutil::parity_source();
    REQUIRE_THROWS_AS(build_scheme(p, 4, 0.6, 1, 1, 100), CapExceeded);
    REQUIRE_THROWS_AS(build_scheme(p, 0, 0.6, 1), ValidationError);
    REQUIRE_THROWS_AS(build_scheme(p, 4, -0.1, 1), ValidationError);
    REQUIRE_THROWS_AS(build_scheme(p, 63, 1.0, 1), ValidationError);
}

TEST_CASE("simulation reports are invariant to the thread count") {
    auto p = testutil::parity_source();
    SimulationReport one = simulate(p, 6, 0.7, 2000, 424242, 1);
    SimulationReport three = simulate(p, 6, 0.7, 2000, 424242, 3);

    REQUIRE(one.errors == three.errors);
    REQUIRE(one.colored_trials == three.colored_trials);
    REQUIRE(one.colored_errors == three.colored_errors);
    REQUIRE(one.per_type_trials == three.per_type_trials);
    REQUIRE(one.per_type_errors == three.per_type_errors);
    REQUIRE(one.error_rate == three.error_rate);
    REQUIRE(one.empirical_exponent == three.empirical_exponent);
}

TEST_CASE("simulation tallies are internally consistent") {
    auto p = testutil::parity_source();
    SimulationReport rep = simulate(p, 6, 0.7, 2000, 424242);

    REQUIRE(rep.n == 6);
    REQUIRE(rep.trials == 2000);
    REQUIRE(rep.colored_errors == 0);
    REQUIRE(rep.m1_size == static_cast<std::uint64_t>(std::ceil(std::exp2(6 * 0.7))));
    REQUIRE(rep.type_count == rep.per_type_trials.size());
    REQUIRE(rep.colored_types + rep.binned_types == rep.type_count);
    REQUIRE(rep.type_overhead_bound == 2401);

    std::uint64_t trial_sum = std::accumulate(rep.per_type_trials.begin(), rep.per_type_trials.end(), std::uint64_t{0});
    std::uint64_t error_sum = std::accumulate(rep.per_type_errors.begin(), rep.per_type_errors.end(), std::uint64_t{0});
    REQUIRE(trial_sum == rep.trials);
    REQUIRE(error_sum == rep.errors);
    REQUIRE_THAT(rep.error_rate, WithinAbs(static_cast<double>(rep.errors) / 2000.0, 1e-15));
    if (rep.errors > 0)
        REQUIRE_THAT(rep.empirical_exponent, WithinAbs(-std::log2(rep.error_rate) / 6.0, 1e-12));
    else
        REQUIRE(rep.empirical_exponent == kInf);
}

TEST_CASE("type-class degree oracle matches hand counts") {
    Graph k2 = complete_graph(2);
    REQUIRE(oracle_degree(k2, EmpiricalType({1, 1}), 2) == 1);
    REQUIRE(oracle_degree(k2, EmpiricalType({2, 2}), 4) == 5);
    REQUIRE(oracle_degree(k2, EmpiricalType({0, 2}), 2) == 0);
    REQUIRE_THROWS_AS(oracle_degree(k2, EmpiricalType({2, 2}), 4, 2), CapExceeded);
    REQUIRE_THROWS_AS(oracle_degree(k2, EmpiricalType({2, 2}), 5), ValidationError);
    REQUIRE_THROWS_AS(oracle_degree(complete_graph(3), EmpiricalType({2, 2}), 4), ValidationError);
}

TEST_CASE("type-class chromatic oracle matches hand counts") {
    Graph k2 = complete_graph(2);
    REQUIRE(oracle_chromatic_typeclass(k2, EmpiricalType({2, 2}), 4) == 6);
    REQUIRE(oracle_chromatic_typeclass(k2, EmpiricalType({1, 1}), 2) == 2);
    REQUIRE(oracle_chromatic_typeclass(k2, EmpiricalType({0, 3}), 3) == 1);
    REQUIRE(oracle_chromatic_typeclass(path_graph(3), EmpiricalType({1, 1, 1}), 3) == 2);
    REQUIRE_THROWS_AS(oracle_chromatic_typeclass(k2, EmpiricalType({4, 4}), 8, 64), CapExceeded);
}

TEST_CASE("finite-block chromatic rate peaks at the balanced type") {
    Graph k2 = complete_graph(2);
    auto two = witsenhausen_finite_n(k2, 2);
    REQUIRE_THAT(two.value_bits, WithinAbs(0.5, 1e-12));
    REQUIRE(two.argmax.counts == std::vector<int>{1, 1});

    auto four = witsenhausen_finite_n(k2, 4);
    REQUIRE_THAT(four.value_bits, WithinAbs(std::log2(6.0) / 4.0, 1e-12));
    REQUIRE(four.argmax.counts == std::vector<int>{2, 2});
}
