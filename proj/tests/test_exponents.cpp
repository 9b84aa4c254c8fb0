#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "zesi/exponents.hpp"
#include "zesi/graph.hpp"
#include "zesi/prob.hpp"
#include "zesi/util.hpp"

using Catch::Matchers::WithinAbs;
using namespace zesi;

TEST_CASE("pairwise channel distance closed forms") {
    Channel ch({{1.0, 0.0}, {0.5, 0.5}});
    REQUIRE(bhattacharyya_distance(0, 0, ch) == 0.0);
    REQUIRE(bhattacharyya_distance(1, 1, ch) == 0.0);
    REQUIRE_THAT(bhattacharyya_distance(0, 1, ch), WithinAbs(0.5, 1e-12));

    Channel disjoint({{1.0, 0.0}, {0.0, 1.0}});
    REQUIRE(bhattacharyya_distance(0, 1, disjoint) == kInf);
    REQUIRE_THROWS_AS(bhattacharyya_distance(0, 2, ch), ValidationError);
}

TEST_CASE("distortion tables validate and expose extremes") {
    auto h = DistortionMeasure::hamming(3);
    REQUIRE(h(1, 1) == 0.0);
    REQUIRE(h(1, 2) == 1.0);
    REQUIRE(h.max_value() == 1.0);
    REQUIRE_THROWS_AS(DistortionMeasure({{1.0, -2.0}}), ValidationError);
    REQUIRE_THROWS_AS(DistortionMeasure({{1.0}, {1.0, 2.0}}), ValidationError);
}

TEST_CASE("rate zero costs nothing and impossible rates cost everything") {
    auto parity = testutil::parity_source();
    REQUIRE(sphere_packing(0.0, parity).value == 0.0);
    REQUIRE(exponent_oh(0.0, parity).value == 0.0);
    REQUIRE(exponent_new(0.0, parity).value == 0.0);

    REQUIRE(sphere_packing(2.5, parity).value == kInf);
    REQUIRE(exponent_oh(2.5, parity).value == kInf);
    REQUIRE(exponent_ck(2.5, parity).value == kInf);
    REQUIRE(exponent_new(2.5, parity).value == kInf);
}

TEST_CASE("an independent side gives a free bit of conditional entropy") {
    JointDistribution indep(2, 2, {{0.25, 0.25}, {0.25, 0.25}});
    REQUIRE_THAT(sphere_packing(1.0, indep).value, WithinAbs(0.0, 1e-9));
}

TEST_CASE("identity sources kill the expurgated exponent at any positive rate") {
    JointDistribution ident(2, 2, {{0.5, 0.0}, {0.0, 0.5}});
    REQUIRE(exponent_ck(0.25, ident).value == kInf);
    REQUIRE(exponent_ck(1.0, ident).value == kInf);
}

TEST_CASE("path source pins the chromatic ceiling at one bit") {
    auto path = testutil::path_source();
    Graph g = characteristic_graph(path);
    REQUIRE(chromatic_number(g) == 2);

    auto sweep = exponent_sweep(path, {1.05, 1.2, 1.35});
    REQUIRE(sweep.gamma_gx == 2);
    REQUIRE_THAT(sweep.log2_gamma_gx, WithinAbs(1.0, 1e-15));
    for (const auto& row : sweep.rows) {
        REQUIRE(row.e_new.value == kInf);
        REQUIRE(row.e_sp.value == kInf);
    }
    REQUIRE_THAT(sweep.rows[0].e_oh.value, WithinAbs(0.0918558943939, 1e-9));
    REQUIRE_THAT(sweep.rows[0].e_ck.value, WithinAbs(0.0918558943939, 1e-9));
    REQUIRE_THAT(sweep.rows[1].e_oh.value, WithinAbs(0.241855894394, 1e-9));
    REQUIRE_THAT(sweep.rows[1].e_ck.value, WithinAbs(0.241855894394, 1e-9));
    REQUIRE_THAT(sweep.rows[2].e_oh.value, WithinAbs(0.391855894394, 1e-9));
    REQUIRE(sweep.rows[2].e_ck.value == kInf);
}

TEST_CASE("single-rate entry points agree with the sweep") {
    auto path = testutil::path_source();
    auto sweep = exponent_sweep(path, {1.2});
    REQUIRE_THAT(exponent_oh(1.2, path).value, WithinAbs(sweep.rows[0].e_oh.value, 1e-12));
    REQUIRE_THAT(exponent_ck(1.2, path).value, WithinAbs(sweep.rows[0].e_ck.value, 1e-12));
    REQUIRE(exponent_new(1.2, path).value == kInf);
    REQUIRE(sphere_packing(1.2, path).value == kInf);
}

TEST_CASE("sweeps keep the documented ordering and monotonicity") {
    testutil::Rand rng(777);
    std::vector<JointDistribution> sources{testutil::parity_source(), testutil::path_source(),
                                           testutil::skewed_parity_source()};
    for (int t = 0; t < 2; ++t) sources.push_back(testutil::random_joint(rng, 3, 2, 0.25));

    std::vector<double> rates{0.2, 0.5, 0.8, 1.1, 1.4};
    for (const auto& src : sources) {
        auto sweep = exponent_sweep(src, rates);
        double prev_new = -1.0, prev_oh = -1.0, prev_sp = -1.0, prev_ck = -1.0;
        for (const auto& row : sweep.rows) {
            REQUIRE(row.e_oh.value <= row.e_new.value + 1e-6);
            REQUIRE(row.e_new.value <= row.e_sp.value + 1e-6);
            REQUIRE(row.e_oh.value >= prev_oh - 1e-9);
            REQUIRE(row.e_new.value >= prev_new - 1e-9);
            REQUIRE(row.e_sp.value >= prev_sp - 1e-9);
            REQUIRE(row.e_ck.value >= prev_ck - 1e-9);
            prev_oh = row.e_oh.value;
            prev_new = row.e_new.value;
            prev_sp = row.e_sp.value;
            prev_ck = row.e_ck.value;
            if (row.rate > sweep.log2_gamma_gx) REQUIRE(row.e_new.value == kInf);
        }
    }
}

TEST_CASE("deterministic side information collapses the new exponent onto sphere packing") {
    auto sweep = exponent_sweep(testutil::parity_source(), {0.3, 0.6, 0.9});
    for (const auto& row : sweep.rows) {
        REQUIRE(std::isfinite(row.e_new.value));
        REQUIRE_THAT(row.e_new.value, WithinAbs(row.e_sp.value, 1e-4));
    }
}

TEST_CASE("sweep results are thread-count invariant") {
    auto src = testutil::skewed_parity_source();
    std::vector<double> rates{0.4, 0.9};
    ExponentGrid serial, parallel;
    parallel.threads = 4;
    auto a = exponent_sweep(src, rates, serial);
    auto b = exponent_sweep(src, rates, parallel);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        REQUIRE(a.rows[i].e_new.value == b.rows[i].e_new.value);
        REQUIRE(a.rows[i].e_oh.value == b.rows[i].e_oh.value);
        REQUIRE(a.rows[i].e_ck.value == b.rows[i].e_ck.value);
        REQUIRE(a.rows[i].e_sp.value == b.rows[i].e_sp.value);
    }
}

TEST_CASE("exponent values carry certificates and argmins") {
    auto parity = testutil::parity_source();
    auto finite = sphere_packing(0.6, parity);
    REQUIRE(std::isfinite(finite.value));
    REQUIRE_FALSE(finite.argmin_q.empty());
    double mass = 0.0;
    for (double v : finite.argmin_q) mass += v;
    REQUIRE_THAT(mass, WithinAbs(1.0, 1e-9));

    auto infeasible = sphere_packing(2.5, parity);
    REQUIRE(infeasible.argmin_q.empty());
    REQUIRE_FALSE(infeasible.certificate.empty());

    REQUIRE_THROWS_AS(exponent_sweep(parity, {0.5, -0.1}), ValidationError);
}
