#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risktool/market.hpp"

using namespace risktool;

namespace {

TreePtr binomial_tree() {
    std::vector<NodeSpec> s = {
        {"r", std::nullopt, 0, 1.0}, {"d", "r", 1, 0.5}, {"u", "r", 1, 0.5},
    };
    return std::make_shared<const ScenarioTree>(ScenarioTree::build(1, 2, s));
}

}  // namespace

TEST_CASE("bid-ask cone generators and facets") {
    // pi12 = pi21 = 2: rays e1, e2, 2e1-e2, 2e2-e1; facets 2k1+k2>=0, k1+2k2>=0.
    auto k = cone_from_bid_ask({{1.0, 2.0}, {2.0, 1.0}});
    CHECK(k.is_cone(1e-9));
    CHECK(k.rays().size() == 2);  // e1, e2 are interior combinations
    CHECK(k.contains({1.0, 0.0}, 1e-9));
    CHECK(k.contains({2.0, -1.0}, 1e-9));
    CHECK(k.contains({-1.0, 2.0}, 1e-9));
    CHECK(!k.contains({-1.0, 1.9}, 1e-6));
    auto expect = Polyhedron::from_h(2, {{{2.0, 1.0}, 0.0}, {{1.0, 2.0}, 0.0}});
    CHECK(set_equal(k, expect, 1e-9));
}

TEST_CASE("frictionless bid-ask collapses to a halfspace") {
    auto k = cone_from_bid_ask({{1.0, 1.0}, {1.0, 1.0}});
    auto h = cone_from_price({1.0, 1.0});
    CHECK(set_equal(k, h, 1e-9));
    // (1,-1) is reversible: the cone has a lineality direction.
    CHECK(k.contains({1.0, -1.0}, 1e-9));
    CHECK(k.contains({-1.0, 1.0}, 1e-9));
}

TEST_CASE("bid-ask consistency with a price vector") {
    // pi_ij = S_j / S_i is the frictionless ratio matrix for S = (1, 2).
    auto k = cone_from_bid_ask({{1.0, 2.0}, {0.5, 1.0}});
    auto h = cone_from_price({1.0, 2.0});
    CHECK(set_equal(k, h, 1e-9));
}

TEST_CASE("invalid market data") {
    CHECK_THROWS_AS(cone_from_bid_ask({{1.0, 0.5}, {1.0, 1.0}}), Error);   // free round trip
    CHECK_THROWS_AS(cone_from_bid_ask({{2.0, 1.0}, {1.0, 1.0}}), Error);   // diagonal
    CHECK_THROWS_AS(cone_from_bid_ask({{1.0, -1.0}, {1.0, 1.0}}), Error);  // sign
    CHECK_THROWS_AS(cone_from_price({1.0, 0.0}), Error);
    CHECK_THROWS_AS(cone_from_price({1.0, -2.0}), Error);
    try {
        cone_from_bid_ask({{1.0, 0.5}, {1.0, 1.0}});
    } catch (const Error& e) {
        CHECK(e.code() == "InvalidBidAsk");
    }
    try {
        cone_from_price({1.0, 0.0});
    } catch (const Error& e) {
        CHECK(e.code() == "NonpositivePrice");
    }
}

TEST_CASE("subspaces") {
    auto m = Subspace::span(2, {{1.0, 0.0}});
    CHECK(m.dim() == 1);
    CHECK(m.contains({3.0, 0.0}, 1e-9));
    CHECK(!m.contains({0.0, 1.0}, 1e-9));
    CHECK(m.subspace_of(Subspace::full(2), 1e-9));
    CHECK(!Subspace::full(2).subspace_of(m, 1e-9));

    auto poly = m.as_polyhedron();
    CHECK(poly.contains({-5.0, 0.0}, 1e-9));
    CHECK(!poly.contains({0.0, 0.1}, 1e-6));

    auto pos = m.positive_part();
    CHECK(pos.contains({2.0, 0.0}, 1e-9));
    CHECK(!pos.contains({-1.0, 0.0}, 1e-6));

    auto diag = Subspace::span(3, {{1.0, 1.0, 0.0}, {2.0, 2.0, 0.0}});
    CHECK(diag.dim() == 1);  // dependent generators collapse
    CHECK(diag.contains({-2.0, -2.0, 0.0}, 1e-9));
}

TEST_CASE("market construction and the eligible cone") {
    auto tree = binomial_tree();
    std::vector<Polyhedron> cones(3, cone_from_bid_ask({{1.0, 2.0}, {2.0, 1.0}}));
    std::vector<Subspace> elig = {Subspace::span(2, {{1.0, 0.0}}), Subspace::full(2)};
    auto mk = ConicalMarket::build(tree, cones, elig);
    CHECK(mk.eligible_nested());

    // K ^ span(e1) is the nonnegative e1 ray.
    const auto& km = mk.solvent_eligible_cone(tree->root());
    CHECK(km.contains({1.0, 0.0}, 1e-9));
    CHECK(!km.contains({-0.5, 0.0}, 1e-6));
    CHECK(!km.contains({0.0, 1.0}, 1e-6));
    CHECK(km.is_cone(1e-9));
    CHECK(subset(km, mk.cone(tree->root()), 1e-8));

    // Full eligible space leaves the cone unchanged.
    CHECK(set_equal(mk.solvent_eligible_cone(tree->index_of("u")), mk.cone(tree->index_of("u")),
                    1e-9));

    std::vector<Subspace> rev = {Subspace::full(2), Subspace::span(2, {{1.0, 0.0}})};
    auto mk2 = ConicalMarket::build(tree, cones, rev);
    CHECK(!mk2.eligible_nested());

    // K = R^d is rejected.
    std::vector<Polyhedron> bad(3, Polyhedron::full_space(2));
    CHECK_THROWS_AS(ConicalMarket::build(tree, bad, elig), Error);
    // Cone missing the positive orthant is rejected.
    std::vector<Polyhedron> narrow(3, Polyhedron::from_h(2, {{{1.0, 0.0}, 0.0},
                                                             {{-1.0, 1.0}, 0.0}}));
    CHECK_THROWS_AS(ConicalMarket::build(tree, narrow, elig), Error);
}

TEST_CASE("no-arbitrage certificate on the frictionless binomial") {
    auto tree = binomial_tree();
    // S0 = (1,1), S1 = (1, 1/2) down, (1, 2) up; martingale weight q = 1/3 up.
    std::vector<Polyhedron> cones = {cone_from_price({1.0, 1.0}), cone_from_price({1.0, 0.5}),
                                     cone_from_price({1.0, 2.0})};
    std::vector<Subspace> elig = {Subspace::full(2), Subspace::full(2)};
    auto mk = ConicalMarket::build(tree, cones, elig);
    auto res = check_robust_no_arbitrage(mk, 1e-6);
    REQUIRE(res.certified);
    REQUIRE(res.Z.size() == 3);
    const Vec& z0 = res.Z[tree->root()];
    // Z is a martingale and proportional to the price at each node.
    CHECK(std::fabs(z0[0] + z0[1] - 1.0) < 1e-9);
    CHECK(std::fabs(z0[1] / z0[0] - 1.0) < 1e-6);
    const Vec& zu = res.Z[tree->index_of("u")];
    CHECK(std::fabs(zu[1] / zu[0] - 2.0) < 1e-6);
    for (int k = 0; k < 2; ++k) {
        double mart = 0.5 * res.Z[1][k] + 0.5 * res.Z[2][k];
        CHECK(std::fabs(z0[k] - mart) < 1e-9);
    }
}

TEST_CASE("no-arbitrage certificate on the bid-ask tree") {
    auto tree = binomial_tree();
    std::vector<Polyhedron> cones(3, cone_from_bid_ask({{1.0, 2.0}, {2.0, 1.0}}));
    std::vector<Subspace> elig = {Subspace::full(2), Subspace::full(2)};
    auto mk = ConicalMarket::build(tree, cones, elig);
    auto res = check_robust_no_arbitrage(mk, 1e-6);
    REQUIRE(res.certified);
    // (1,1)/2 everywhere is one valid certificate; whatever the LP found must
    // clear the margin on both generators of every cone.
    for (int i = 0; i < 3; ++i)
        for (const Vec& r : mk.cone(i).rays()) CHECK(dot(res.Z[i], r) >= 1e-6 - 1e-12);
}

TEST_CASE("arbitrage is detected") {
    auto tree = binomial_tree();
    // Price rises in both states: buying asset 2 at t=0 is free money, and no
    // martingale Z can satisfy both strict cone conditions.
    std::vector<Polyhedron> cones = {cone_from_price({1.0, 1.0}), cone_from_price({1.0, 2.0}),
                                     cone_from_price({1.0, 3.0})};
    std::vector<Subspace> elig = {Subspace::full(2), Subspace::full(2)};
    auto mk = ConicalMarket::build(tree, cones, elig);
    auto res = check_robust_no_arbitrage(mk, 1e-6);
    CHECK(!res.certified);
}
