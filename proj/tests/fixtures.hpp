#pragma once

// Shared deterministic fixtures: small named trees and seeded random
// tree/market/claim generators.  Random markets are arbitrage-free by
// construction: cones come from bid-ask spreads around martingale mid
// prices, so the mid-price process itself certifies robust no-arbitrage.

#include <memory>
#include <string>
#include <vector>

#include "risktool/market.hpp"
#include "risktool/riskmeasure.hpp"

namespace risktool::fixtures {

using MarketPtr = std::shared_ptr<const ConicalMarket>;

// Layer order is id order, so "dn" sits at position 0 and "up" at 1.
inline TreePtr binomial_tree(int d, double q_up = 0.5) {
    std::vector<NodeSpec> ns = {{"n", std::nullopt, 0, 1.0},
                                {"ndn", std::string("n"), 1, 1.0 - q_up},
                                {"nup", std::string("n"), 1, q_up}};
    return std::make_shared<ScenarioTree>(ScenarioTree::build(1, d, ns));
}

inline TreePtr two_period_binomial(int d) {
    std::vector<NodeSpec> ns = {
        {"n", std::nullopt, 0, 1.0},     {"na", std::string("n"), 1, 0.5},
        {"nb", std::string("n"), 1, 0.5}, {"naa", std::string("na"), 2, 0.5},
        {"nab", std::string("na"), 2, 0.5}, {"nba", std::string("nb"), 2, 0.5},
        {"nbb", std::string("nb"), 2, 0.5}};
    return std::make_shared<ScenarioTree>(ScenarioTree::build(2, d, ns));
}

/// One-period frictionless two-asset market: prices (1,1) at the root,
/// (1,2) up and (1,1/2) down.  The digital claim paying (1,0) up has
/// superhedging offset 1/3 in the direction (1,1).
inline MarketPtr binomial_frictionless_market(const TreePtr& tree) {
    std::vector<Polyhedron> cones = {cone_from_price({1.0, 1.0}), cone_from_price({1.0, 0.5}),
                                     cone_from_price({1.0, 2.0})};
    std::vector<Subspace> elig = {Subspace::full(2), Subspace::full(2)};
    return std::make_shared<ConicalMarket>(
        ConicalMarket::build(tree, std::move(cones), std::move(elig)));
}

inline AdaptedVector digital_claim(const TreePtr& tree) {
    AdaptedVector x;
    x.t = 1;
    x.values = {{0.0, 0.0}, {1.0, 0.0}};  // dn, up
    return x;
}

inline TreePtr random_tree(Rng& rng, int max_T, int d) {
    std::uniform_int_distribution<int> branch(2, 3);
    std::uniform_int_distribution<int> horizon(1, max_T);
    std::uniform_real_distribution<double> raw(0.3, 1.0);
    int T = horizon(rng);
    std::vector<NodeSpec> ns;
    std::vector<std::string> frontier = {"n"};
    ns.push_back({"n", std::nullopt, 0, 1.0});
    for (int t = 1; t <= T; ++t) {
        std::vector<std::string> next;
        for (const auto& parent : frontier) {
            int k = branch(rng);
            std::vector<double> w(k);
            double s = 0.0;
            for (double& v : w) s += (v = raw(rng));
            for (int c = 0; c < k; ++c) {
                std::string id = parent + static_cast<char>('a' + c);
                ns.push_back({id, parent, t, w[c] / s});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return std::make_shared<ScenarioTree>(ScenarioTree::build(T, d, ns));
}

/// Martingale mid prices: leaf components drawn in [1/2, 2], earlier layers
/// by conditional expectation.  Node-indexed.
inline std::vector<Vec> martingale_prices(Rng& rng, const ScenarioTree& tree) {
    std::uniform_real_distribution<double> level(0.5, 2.0);
    std::vector<Vec> s(tree.node_count());
    for (int leaf : tree.leaves()) {
        s[leaf].resize(tree.assets());
        for (double& v : s[leaf]) v = level(rng);
    }
    for (int t = tree.horizon() - 1; t >= 0; --t)
        for (int g : tree.at_time(t)) {
            Vec v(tree.assets(), 0.0);
            for (int h : tree.node(g).children) v = v + tree.node(h).q * s[h];
            s[g] = std::move(v);
        }
    return s;
}

/// Bid-ask cones around the mid prices; frictionless when spread = 0.
/// Eligible spaces are full at every time.
inline MarketPtr random_market(Rng& rng, const TreePtr& tree, bool frictionless = false) {
    const int d = (*tree).assets();
    std::uniform_real_distribution<double> spread(0.05, 0.4);
    auto s = martingale_prices(rng, *tree);
    std::vector<Polyhedron> cones;
    for (int g = 0; g < (*tree).node_count(); ++g) {
        if (frictionless) {
            cones.push_back(cone_from_price(s[g]));
            continue;
        }
        std::vector<Vec> pi(d, Vec(d, 1.0));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) pi[i][j] = (s[g][j] / s[g][i]) * (1.0 + spread(rng));
        cones.push_back(cone_from_bid_ask(pi));
    }
    std::vector<Subspace> elig((*tree).horizon() + 1, Subspace::full(d));
    return std::make_shared<ConicalMarket>(
        ConicalMarket::build(tree, std::move(cones), std::move(elig)));
}

inline AdaptedVector random_claim(Rng& rng, const ScenarioTree& tree, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    AdaptedVector x;
    x.t = tree.horizon();
    for (size_t p = 0; p < tree.leaves().size(); ++p) {
        Vec v(tree.assets());
        for (double& c : v) c = u(rng);
        x.values.push_back(std::move(v));
    }
    return x;
}

inline std::vector<Vec> unit_lambda(const ScenarioTree& tree) {
    return std::vector<Vec>(tree.node_count(), Vec(tree.assets(), 1.0));
}

inline AdaptedVector leafwise_constant(const ScenarioTree& tree, Vec value) {
    AdaptedVector x;
    x.t = tree.horizon();
    x.values.assign(tree.leaves().size(), std::move(value));
    return x;
}

}  // namespace risktool::fixtures
