#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "zesi/prob.hpp"
#include "zesi/util.hpp"

using Catch::Matchers::WithinAbs;
using namespace zesi;

TEST_CASE("distribution construction validates mass and sign") {
    REQUIRE_NOTHROW(Distribution({0.25, 0.75}));
    REQUIRE_THROWS_AS(Distribution({0.5, 0.6}), ValidationError);
    REQUIRE_THROWS_AS(Distribution({-0.1, 1.1}), ValidationError);
    REQUIRE_THROWS_AS(Distribution(std::vector<double>{}), ValidationError);
    REQUIRE(Distribution::uniform(4)[2] == 0.25);
}

TEST_CASE("joint construction validates shape and mass") {
    REQUIRE_NOTHROW(JointDistribution(2, 2, {{0.25, 0.25}, {0.25, 0.25}}));
    REQUIRE_THROWS_AS(JointDistribution(2, 2, {{0.5, 0.5}}), ValidationError);
    REQUIRE_THROWS_AS(JointDistribution(2, 2, {{0.5, 0.5}, {0.5, 0.5}}), ValidationError);
    REQUIRE_THROWS_AS(JointDistribution(2, 2, {{0.5, -0.1}, {0.3, 0.3}}), ValidationError);
}

TEST_CASE("joint marginals") {
    JointDistribution j(2, 3, {{0.1, 0.2, 0.3}, {0.15, 0.05, 0.2}});
    auto mx = j.x_marginal();
    auto my = j.y_marginal();
    REQUIRE_THAT(mx[0], WithinAbs(0.6, 1e-15));
    REQUIRE_THAT(mx[1], WithinAbs(0.4, 1e-15));
    REQUIRE_THAT(my[0], WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(my[1], WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(my[2], WithinAbs(0.5, 1e-15));
}

TEST_CASE("three-way joint marginals") {
    // Mass 1/4 on each of (0,0,0), (0,1,1), (1,0,1), (1,1,0).
    std::vector<double> flat(8, 0.0);
    flat[0] = flat[3] = flat[5] = flat[6] = 0.25;
    Joint3 q(2, 2, 2, flat);
    REQUIRE_THAT(q.x_marginal()[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(q.u_marginal()[1], WithinAbs(0.5, 1e-15));
    auto xu = q.xu_marginal();
    REQUIRE_THAT(xu[0][0], WithinAbs(0.25, 1e-15));
    auto yu = q.yu_marginal();
    REQUIRE_THAT(yu[1][0], WithinAbs(0.25, 1e-15));
    REQUIRE_THROWS_AS(Joint3(2, 2, 2, std::vector<double>(7, 0.125)), ValidationError);
}

TEST_CASE("channel rows must each be stochastic") {
    REQUIRE_NOTHROW(Channel({{0.5, 0.5}, {1.0, 0.0}}));
    REQUIRE_THROWS_AS(Channel({{0.5, 0.6}, {1.0, 0.0}}), ValidationError);
    REQUIRE_THROWS_AS(Channel({{0.5, 0.5}, {1.0}}), ValidationError);
    Channel id = Channel::identity(3);
    REQUIRE(id(1, 1) == 1.0);
    REQUIRE(id(1, 2) == 0.0);
}

TEST_CASE("entropy closed forms") {
    REQUIRE_THAT(entropy(Distribution({0.5, 0.5})), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(entropy(Distribution({1.0, 0.0})), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(entropy(Distribution({0.25, 0.25, 0.5})), WithinAbs(1.5, 1e-12));
    REQUIRE_THAT(entropy(Distribution({2.0 / 3, 1.0 / 3})), WithinAbs(0.9182958340544896, 1e-12));
}

TEST_CASE("conditional entropy of a channel under a prior") {
    Distribution q({0.5, 0.5});
    REQUIRE_THAT(conditional_entropy(Channel::identity(2), q), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(conditional_entropy(Channel({{0.5, 0.5}, {0.5, 0.5}}), q), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(conditional_entropy(Channel({{1.0, 0.0}, {0.5, 0.5}}), q), WithinAbs(0.5, 1e-12));
    REQUIRE_THROWS_AS(conditional_entropy(Channel::identity(3), q), ValidationError);
}

TEST_CASE("conditional entropy of x given y from a joint") {
    REQUIRE_THAT(conditional_entropy_x_given_y(testutil::parity_source()), WithinAbs(1.0, 1e-12));
    JointDistribution indep(2, 2, {{0.25, 0.25}, {0.25, 0.25}});
    REQUIRE_THAT(conditional_entropy_x_given_y(indep), WithinAbs(1.0, 1e-12));
    JointDistribution ident(2, 2, {{0.5, 0.0}, {0.0, 0.5}});
    REQUIRE_THAT(conditional_entropy_x_given_y(ident), WithinAbs(0.0, 1e-12));
}

TEST_CASE("divergence closed forms and support rule") {
    Distribution u({0.5, 0.5});
    REQUIRE_THAT(kl_divergence(u, u), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(kl_divergence(Distribution({1.0, 0.0}), u), WithinAbs(1.0, 1e-12));
    REQUIRE(kl_divergence(u, Distribution({1.0, 0.0})) == kInf);
    REQUIRE_THAT(kl_divergence(Distribution({0.75, 0.25}), u), WithinAbs(0.18872187554086717, 1e-12));

    JointDistribution p(2, 2, {{0.4, 0.1}, {0.1, 0.4}});
    JointDistribution q(2, 2, {{0.25, 0.25}, {0.25, 0.25}});
    REQUIRE(kl_divergence(q, q) == 0.0);
    REQUIRE(kl_divergence(q, p) > 0.0);
    JointDistribution hole(2, 2, {{0.5, 0.5}, {0.0, 0.0}});
    REQUIRE(kl_divergence(q, hole) == kInf);
    REQUIRE_THROWS_AS(kl_divergence(q, JointDistribution(1, 2, {{0.5, 0.5}})), ValidationError);
}

TEST_CASE("divergence is nonnegative on random pairs") {
    testutil::Rand rng(101);
    for (int t = 0; t < 200; ++t) {
        auto q = testutil::random_distribution(rng, 4);
        auto p = testutil::random_distribution(rng, 4);
        REQUIRE(kl_divergence(q, p) >= 0.0);
    }
}

TEST_CASE("mutual information closed forms") {
    JointDistribution indep(2, 2, {{0.25, 0.25}, {0.25, 0.25}});
    REQUIRE_THAT(mutual_information(indep), WithinAbs(0.0, 1e-12));
    JointDistribution ident(2, 2, {{0.5, 0.0}, {0.0, 0.5}});
    REQUIRE_THAT(mutual_information(ident), WithinAbs(1.0, 1e-12));
    JointDistribution corner(2, 2, {{1.0 / 3, 1.0 / 3}, {1.0 / 3, 0.0}});
    REQUIRE_THAT(mutual_information(corner), WithinAbs(0.2516291673878227, 1e-12));
}

TEST_CASE("mutual information is nonnegative on random joints") {
    testutil::Rand rng(202);
    for (int t = 0; t < 200; ++t) {
        auto j = testutil::random_joint(rng, 3, 2, 0.2);
        REQUIRE(mutual_information(j) >= 0.0);
    }
}

TEST_CASE("conditioning rows fall back to a point mass at zero-mass letters") {
    JointDistribution j(2, 2, {{0.5, 0.5}, {0.0, 0.0}});
    Channel c = y_given_x(j);
    REQUIRE_THAT(c(0, 0), WithinAbs(0.5, 1e-15));
    REQUIRE(c(1, 0) == 1.0);
    REQUIRE(c(1, 1) == 0.0);
}

TEST_CASE("twelve-digit formatting handles non-finite values") {
    REQUIRE(fmt12(kInf) == "inf");
    REQUIRE(fmt12(-kInf) == "-inf");
    REQUIRE(fmt12(1.0) == "1");
    REQUIRE(fmt12(0.25) == "0.25");
}
