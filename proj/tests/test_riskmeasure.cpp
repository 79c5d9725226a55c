#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "risktool/riskmeasure.hpp"

using namespace risktool;
namespace fx = risktool::fixtures;
namespace orc = risktool::oracles;

namespace {

Polyhedron halfspace2(double a1, double a2, double b) {
    return Polyhedron::from_h(2, {{{a1, a2}, b}});
}

AdaptedVector leaf_claim(const ScenarioTree& tree, std::vector<Vec> values) {
    AdaptedVector x;
    x.t = tree.horizon();
    x.values = std::move(values);
    return x;
}

}  // namespace

TEST_CASE("worst case is the componentwise maximum of the loss") {
    auto tree = fx::binomial_tree(2);
    auto market = fx::binomial_frictionless_market(tree);
    AdaptedVector x = leaf_claim(*tree, {{-3.0, 4.0}, {1.0, -2.0}});
    RandomSet r = worst_case(x, 0, *market);
    Polyhedron want = Polyhedron::from_h(2, {{{1.0, 0.0}, 3.0}, {{0.0, 1.0}, 2.0}});
    CHECK(set_equal(r.values[0], want, 1e-9));

    RandomSet at_zero = worst_case(AdaptedVector::zero(*tree, 1), 0, *market);
    CHECK(set_equal(at_zero.values[0], Polyhedron::orthant(2), 1e-9));

    // Monotone: smaller claims need more compensation.
    AdaptedVector y = leaf_claim(*tree, {{-2.5, 4.0}, {1.0, -1.0}});
    CHECK(random_set_subset(worst_case(x, 0, *market), worst_case(y, 0, *market), 1e-9));
}

TEST_CASE("acceptance projection reproduces the worst case") {
    Rng rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        auto tree = fx::random_tree(rng, 2, 2);
        auto market = fx::random_market(rng, tree);
        AdaptedVector x = fx::random_claim(rng, *tree);
        for (int t = 0; t <= tree->horizon(); ++t) {
            RandomSet direct = worst_case(x, t, *market);
            RandomSet via = risk_from_acceptance(acceptance_worst_case(*market, t), x, *market);
            CHECK(random_set_equal(direct, via, 1e-8));
        }
    }
}

TEST_CASE("plain acceptance rows on one coordinate") {
    auto tree = fx::binomial_tree(2);
    std::vector<Polyhedron> cones(3, Polyhedron::orthant(2));
    std::vector<Subspace> elig(2, Subspace::span(2, {{1.0, 0.0}}));
    auto market = std::make_shared<ConicalMarket>(
        ConicalMarket::build(tree, std::move(cones), std::move(elig)));

    // A = {first coordinate nonnegative at every leaf}.
    std::vector<LpConstraint> rows;
    for (int p = 0; p < 2; ++p) {
        Vec a(4, 0.0);
        a[p * 2] = 1.0;
        rows.push_back({std::move(a), Rel::Ge, 0.0});
    }
    AcceptanceSet acc = acceptance_from_rows(tree, 0, std::move(rows));
    CHECK(acceptance_defects(acc, *market).empty());

    AdaptedVector x = leaf_claim(*tree, {{-1.0, 0.3}, {2.0, -0.7}});
    RandomSet r = risk_from_acceptance(acc, x, *market);
    Polyhedron want =
        Polyhedron::from_h(2, {{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 0.0}, {{0.0, -1.0}, 0.0}});
    CHECK(set_equal(r.values[0], want, 1e-9));

    // Acceptable claims need no compensation.
    AdaptedVector ok = leaf_claim(*tree, {{0.5, -9.0}, {0.0, 3.0}});
    CHECK(risk_from_acceptance(acc, ok, *market).values[0].contains({0.0, 0.0}, 1e-9));
}

TEST_CASE("defective acceptance sets are reported") {
    auto tree = fx::binomial_tree(2);
    auto market = fx::binomial_frictionless_market(tree);

    auto defect_of = [&](std::vector<LpConstraint> rows) {
        auto d = acceptance_defects(acceptance_from_rows(tree, 0, std::move(rows)), *market);
        return d.empty() ? std::string() : d.front();
    };

    CHECK(defect_of({}) == "accepts every embedded eligible portfolio");
    {
        // Empty set.
        Vec a(4, 0.0);
        a[0] = 1.0;
        Vec na = negate(a);
        auto d = defect_of({{a, Rel::Ge, 1.0}, {na, Rel::Ge, 0.0}});
        CHECK(d == "contains no embedded eligible portfolio");
    }
    {
        // Upper bound on a coordinate kills monotonicity.
        Vec a(4, 0.0);
        a[1] = -1.0;
        auto d = defect_of({{a, Rel::Ge, 0.0}});
        CHECK(d.find("not monotone") == 0);
    }
}

TEST_CASE("superhedging the digital claim in the binomial market") {
    auto tree = fx::binomial_tree(2);
    auto market = fx::binomial_frictionless_market(tree);
    auto sets = shp(fx::digital_claim(tree), *market);

    CHECK(std::fabs(support(sets[0].values[0], {1.0, 1.0}) - 1.0 / 3.0) <= 1e-9);
    CHECK(set_equal(sets[0].values[0], halfspace2(1.0, 1.0, 1.0 / 3.0), 1e-8));

    // Leaf sets are the translated cones.
    CHECK(set_equal(sets[1].values[1], market->cone(2).translated({1.0, 0.0}), 1e-9));
}

TEST_CASE("superhedging of zero contains the zero strategy") {
    Rng rng(7);
    auto tree = fx::random_tree(rng, 2, 2);
    auto market = fx::random_market(rng, tree);
    auto sets = shp(AdaptedVector::zero(*tree, tree->horizon()), *market);
    for (int t = 0; t <= tree->horizon(); ++t)
        for (size_t pos = 0; pos < sets[t].values.size(); ++pos) {
            int g = tree->at_time(t)[pos];
            CHECK(sets[t].values[pos].contains(Vec(2, 0.0), 1e-9));
            CHECK(subset(market->cone(g), sets[t].values[pos], 1e-8));
        }

    // Constant eligible translates shift the sets.
    AdaptedVector x = fx::random_claim(rng, *tree);
    Vec m = {0.7, -0.3};
    AdaptedVector shifted = x;
    for (auto& v : shifted.values) v = v + m;
    auto base = shp(x, *market);
    auto moved = shp(shifted, *market);
    for (size_t pos = 0; pos < base[0].values.size(); ++pos)
        CHECK(set_equal(moved[0].values[pos], base[0].values[pos].translated(m), 1e-8));
}

TEST_CASE("acceptance projection agrees with the superhedging recursion") {
    Rng rng(42);
    for (int rep = 0; rep < 4; ++rep) {
        auto tree = fx::random_tree(rng, 2, 2);
        auto market = fx::random_market(rng, tree, rep % 2 == 0);
        AdaptedVector x = fx::random_claim(rng, *tree);
        AdaptedVector neg = adapted_scale(-1.0, x);
        for (int t = 0; t <= tree->horizon(); ++t) {
            RandomSet via = risk_from_acceptance(acceptance_shp(*market, t), x, *market);
            RandomSet rec = shp(neg, *market)[t];
            CHECK(random_set_equal(via, rec, 1e-7));
        }
    }
}

TEST_CASE("superhedging vertices are self-financing") {
    Rng rng(11);
    for (int rep = 0; rep < 4; ++rep) {
        auto tree = fx::random_tree(rng, 2, 2);
        auto market = fx::random_market(rng, tree);
        AdaptedVector x = fx::random_claim(rng, *tree);
        auto sets = shp(x, *market);
        std::uniform_real_distribution<double> dir(-1.0, 1.0);
        for (int t = 0; t <= tree->horizon(); ++t)
            for (size_t pos = 0; pos < sets[t].values.size(); ++pos) {
                int g = tree->at_time(t)[pos];
                for (const Vec& v : sets[t].values[pos].vertices())
                    CHECK(orc::shp_feasible(*market, x, t, g, v, 1e-7));
                for (int k = 0; k < 5; ++k) {
                    Vec c = {dir(rng), dir(rng)};
                    double lhs = support(sets[t].values[pos], c);
                    double rhs = orc::shp_support(*market, x, t, g, c);
                    if (std::isfinite(lhs) && std::isfinite(rhs))
                        CHECK(std::fabs(lhs - rhs) <= 1e-6 * std::max(1.0, std::fabs(rhs)));
                    else
                        CHECK(std::isfinite(lhs) == std::isfinite(rhs));
                }
            }
    }
}

TEST_CASE("unit lambda value at risk is the expected loss plus the orthant") {
    Rng rng(5);
    for (int rep = 0; rep < 3; ++rep) {
        auto tree = fx::random_tree(rng, 2, 2);
        auto market = fx::random_market(rng, tree);
        AdaptedVector x = fx::random_claim(rng, *tree);
        for (int t = 0; t <= tree->horizon(); ++t) {
            std::vector<Vec> ones(tree->at_time(t).size(), Vec(2, 1.0));
            RandomSet r = avar(x, ones, t, *market);
            AdaptedVector mean = cond_expectation_P(*tree, adapted_scale(-1.0, x), t);
            for (size_t pos = 0; pos < r.values.size(); ++pos)
                CHECK(set_equal(r.values[pos],
                                Polyhedron::orthant(2).translated(mean.values[pos]), 1e-9));
        }
    }
}

TEST_CASE("scalar value at risk matches the breakpoint oracle") {
    auto tree = fx::binomial_tree(2);
    std::vector<Polyhedron> cones(3, Polyhedron::orthant(2));
    std::vector<Subspace> elig(2, Subspace::span(2, {{1.0, 0.0}}));
    auto market = std::make_shared<ConicalMarket>(
        ConicalMarket::build(tree, std::move(cones), std::move(elig)));

    AdaptedVector x = leaf_claim(*tree, {{-1.0, 0.0}, {1.0, 0.0}});
    RandomSet r = avar(x, {{0.5, 1.0}}, 0, *market);
    Polyhedron want =
        Polyhedron::from_h(2, {{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 0.0}, {{0.0, -1.0}, 0.0}});
    CHECK(set_equal(r.values[0], want, 1e-8));

    Rng rng(3);
    std::uniform_real_distribution<double> lam(0.1, 1.0);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        double q = 0.2 + 0.6 * lam(rng);
        auto tr = fx::binomial_tree(2, q);
        std::vector<Polyhedron> cs(3, Polyhedron::orthant(2));
        std::vector<Subspace> el(2, Subspace::span(2, {{1.0, 0.0}}));
        auto mk = std::make_shared<ConicalMarket>(
            ConicalMarket::build(tr, std::move(cs), std::move(el)));
        double l = lam(rng);
        std::vector<double> xs = {val(rng), val(rng)};
        AdaptedVector cl = leaf_claim(*tr, {{xs[0], 0.0}, {xs[1], 0.0}});
        RandomSet rr = avar(cl, {{l, 1.0}}, 0, *mk);
        double got = support(rr.values[0], {1.0, 0.0});
        double want_v = orc::ru_value(xs, {1.0 - q, q}, l);
        CHECK(std::fabs(got - want_v) <= 1e-8 * std::max(1.0, std::fabs(want_v)));
    }
}

TEST_CASE("market compatible value at risk adds the traded cone") {
    Rng rng(9);
    auto tree = fx::random_tree(rng, 2, 2);
    auto market = fx::random_market(rng, tree);
    AdaptedVector x = fx::random_claim(rng, *tree);
    for (int t = 0; t <= tree->horizon(); ++t) {
        std::vector<Vec> half(tree->at_time(t).size(), Vec(2, 0.5));
        RandomSet plain = avar(x, half, t, *market);
        RandomSet mc = avar(x, half, t, *market, true);
        for (size_t pos = 0; pos < plain.values.size(); ++pos) {
            int g = tree->at_time(t)[pos];
            CHECK(set_equal(mc.values[pos],
                            minkowski_sum(plain.values[pos], market->solvent_eligible_cone(g)),
                            1e-8));
        }
    }
}

TEST_CASE("bad lambda values are rejected") {
    auto tree = fx::binomial_tree(2);
    auto market = fx::binomial_frictionless_market(tree);
    AdaptedVector x = fx::digital_claim(tree);
    CHECK_THROWS_AS(avar(x, {{0.0, 1.0}}, 0, *market), Error);
    CHECK_THROWS_AS(avar(x, {{0.5, 1.5}}, 0, *market), Error);
    CHECK_THROWS_AS(avar(x, {}, 0, *market), Error);
}

TEST_CASE("measures round-trip through their acceptance sets") {
    Rng rng(21);
    auto tree = fx::random_tree(rng, 2, 2);
    auto market = fx::random_market(rng, tree);
    AdaptedVector x = fx::random_claim(rng, *tree, 1.0);

    std::vector<std::shared_ptr<RiskMeasure>> measures = {
        std::make_shared<WorstCaseMeasure>(market),
        std::make_shared<ShpMeasure>(market),
        std::make_shared<AvarMeasure>(market, fx::unit_lambda(*tree)),
        std::make_shared<AvarMeasure>(market,
                                      std::vector<Vec>(tree->node_count(), Vec(2, 0.5)), true)};
    for (const auto& m : measures)
        for (int t = 0; t <= tree->horizon(); ++t) {
            RandomSet direct = m->evaluate(x, t);
            RandomSet via = risk_from_acceptance(acceptance_from_risk(*m, t), x, *market);
            CHECK(random_set_equal(direct, via, 1e-7));
        }
}

TEST_CASE("normalization erodes by the value at zero") {
    auto tree = fx::binomial_tree(2);
    auto market = fx::binomial_frictionless_market(tree);

    // Orthant erosion: a translated orthant is unchanged.
    RandomSet claim_set{0, {Polyhedron::orthant(2).translated({1.0, -2.0})}, false};
    RandomSet zero_set{0, {Polyhedron::orthant(2)}, false};
    RandomSet n = normalize(claim_set, zero_set);
    CHECK(set_equal(n.values[0], claim_set.values[0], 1e-9));

    // Superhedging in an arbitrage-free market is already normalized.
    ShpMeasure m(market);
    AdaptedVector x = fx::digital_claim(tree);
    RandomSet rx = m.evaluate(x, 0);
    RandomSet rz = m.evaluate(AdaptedVector::zero(*tree, 1), 0);
    CHECK(set_equal(normalize(rx, rz).values[0], rx.values[0], 1e-8));
}

TEST_CASE("axiom report for the structured measures") {
    Rng rng(42);
    auto tree = fx::two_period_binomial(2);
    auto market = fx::random_market(rng, tree);
    std::vector<AdaptedVector> claims;
    for (int i = 0; i < 6; ++i) claims.push_back(fx::random_claim(rng, *tree, 1.0));

    ShpMeasure shp_m(market);
    for (int t = 0; t <= 2; ++t) {
        AxiomReport rep = check_axioms(shp_m, claims, t, rng, 1e-8);
        for (const auto& c : rep.checks) {
            INFO(c.axiom, " ", c.detail);
            CHECK(c.holds);
        }
    }

    WorstCaseMeasure wc(market);
    AxiomReport wrep = check_axioms(wc, claims, 1, rng, 1e-8);
    for (const char* ax : {"translativity", "monotonicity", "finiteness-at-zero", "convexity",
                           "conditional-convexity", "positive-homogeneity", "subadditivity",
                           "normalization"}) {
        INFO(ax);
        CHECK(wrep.find(ax)->holds);
    }
    // Worst case ignores the market, so trading can leave its value sets.
    CHECK_FALSE(wrep.find("market-compatibility")->holds);
    CHECK_FALSE(wrep.find("market-compatibility")->detail.empty());

    AvarMeasure av(market, std::vector<Vec>(tree->node_count(), Vec(2, 0.5)));
    AxiomReport arep = check_axioms(av, claims, 1, rng, 1e-8);
    for (const char* ax : {"translativity", "monotonicity", "finiteness-at-zero", "convexity",
                           "conditional-convexity", "positive-homogeneity", "subadditivity",
                           "normalization"}) {
        INFO(ax);
        CHECK(arep.find(ax)->holds);
    }
}

TEST_CASE("emptiness is attributed to the right nodes") {
    auto tree = fx::two_period_binomial(2);
    std::vector<Polyhedron> cones(7, Polyhedron::orthant(2));
    std::vector<Subspace> elig(3, Subspace::span(2, {{1.0, 0.0}}));
    auto market = std::make_shared<ConicalMarket>(
        ConicalMarket::build(tree, std::move(cones), std::move(elig)));
    const int D = stacked_dim(*tree);

    // Second coordinate is not compensatable; a per-subtree constraint on it
    // empties exactly that node.
    {
        Vec a(D, 0.0);
        a[0 * 2 + 1] = 1.0;  // leaf naa, second coordinate
        AcceptanceSet acc = acceptance_from_rows(tree, 1, {{a, Rel::Ge, 0.0}});
        AdaptedVector x = leaf_claim(*tree, {{0.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
        RandomSet r = risk_from_acceptance(acc, x, *market);
        CHECK(r.values[0].is_empty());
        CHECK_FALSE(r.values[1].is_empty());
        CHECK_FALSE(r.empty_everywhere);
    }
    // A constraint whose compensation cancels inside each subtree but spans
    // several of them empties everything.
    {
        Vec a(D, 0.0);
        a[0 * 2 + 1] = 1.0;   // naa
        a[1 * 2 + 1] = -1.0;  // nab
        a[2 * 2 + 1] = 1.0;   // nba
        a[3 * 2 + 1] = -1.0;  // nbb
        AcceptanceSet acc = acceptance_from_rows(tree, 1, {{a, Rel::Ge, 1.0}});
        AdaptedVector x = AdaptedVector::zero(*tree, 2);
        RandomSet r = risk_from_acceptance(acc, x, *market);
        CHECK(r.empty_everywhere);
        CHECK(r.all_empty());
    }
}
