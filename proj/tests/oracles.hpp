#pragma once

// Independent oracles used to cross-check the set-valued computations:
// a generator-form self-financing LP for superhedging and the scalar
// Rockafellar-Uryasev value for average value at risk.  Both avoid the
// projection and recursion code paths entirely.

#include <algorithm>
#include <vector>

#include "risktool/market.hpp"

namespace risktool::oracles {

/// Self-financing feasibility system below node g at time t, in generator
/// form: u - sum over the path of cone selections equals X at every leaf,
/// each selection a nonnegative combination of its cone's generator rays.
/// Variables: [u (d) | alpha blocks per subtree node in (time, layer) order].
struct ShpSystem {
    int nvars = 0;
    std::vector<LpConstraint> rows;  // equality rows only; alpha >= 0 appended
};

inline ShpSystem shp_system(const ConicalMarket& market, const AdaptedVector& claim, int t,
                            int g) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    ShpSystem sys;
    // Collect subtree nodes per time and their ray lists.
    struct Block {
        int node;
        int offset;
        std::vector<Vec> rays;
    };
    std::vector<Block> blocks;
    int off = d;
    for (int s = t; s <= tree.horizon(); ++s)
        for (int h : tree.at_time(s)) {
            if (!tree.is_descendant(h, g)) continue;
            Block b{h, off, market.cone(h).rays()};
            off += static_cast<int>(b.rays.size());
            blocks.push_back(std::move(b));
        }
    sys.nvars = off;
    std::vector<int> block_of(tree.node_count(), -1);
    for (size_t i = 0; i < blocks.size(); ++i) block_of[blocks[i].node] = static_cast<int>(i);

    for (int leaf : tree.leaves_under(g)) {
        const Vec& x = claim.values[tree.layer_pos(leaf)];
        for (int c = 0; c < d; ++c) {
            Vec a(sys.nvars, 0.0);
            a[c] = 1.0;
            for (int s = t; s <= tree.horizon(); ++s) {
                const Block& b = blocks[block_of[tree.ancestor_at(leaf, s)]];
                for (size_t j = 0; j < b.rays.size(); ++j)
                    a[b.offset + static_cast<int>(j)] = -b.rays[j][c];
            }
            sys.rows.push_back({std::move(a), Rel::Eq, x[c]});
        }
    }
    for (int j = d; j < sys.nvars; ++j) {
        Vec a(sys.nvars, 0.0);
        a[j] = 1.0;
        sys.rows.push_back({std::move(a), Rel::Ge, 0.0});
    }
    return sys;
}

/// Is the portfolio u (within tol on the leaf equations) a superhedge of the
/// claim from node g at time t?
inline bool shp_feasible(const ConicalMarket& market, const AdaptedVector& claim, int t, int g,
                         const Vec& u, double tol) {
    ShpSystem sys = shp_system(market, claim, t, g);
    const int d = market.tree().assets();
    std::vector<LpConstraint> rows;
    for (auto& r : sys.rows) {
        double b = r.b;
        for (int c = 0; c < d; ++c) {
            b -= r.a[c] * u[c];
            r.a[c] = 0.0;
        }
        if (r.rel == Rel::Eq) {
            rows.push_back({r.a, Rel::Ge, b - tol});
            rows.push_back({std::move(r.a), Rel::Le, b + tol});
        } else {
            rows.push_back({std::move(r.a), r.rel, b});
        }
    }
    return lp_feasible(sys.nvars, rows, nullptr);
}

/// min c.u over superhedges of the claim from (t, g); -inf when unbounded.
inline double shp_support(const ConicalMarket& market, const AdaptedVector& claim, int t, int g,
                          const Vec& c) {
    ShpSystem sys = shp_system(market, claim, t, g);
    Vec obj(sys.nvars, 0.0);
    std::copy(c.begin(), c.end(), obj.begin());
    LpResult res = solve_lp(obj, sys.rows);
    if (res.status == LpResult::Status::Unbounded) return -kInf;
    if (res.status == LpResult::Status::Infeasible) return kInf;
    return res.value;
}

/// Scalar Rockafellar-Uryasev value min_z z + E[(-x - z)^+] / lambda for
/// leaf values x with probabilities p.  The objective is convex piecewise
/// linear, so the minimum sits at a breakpoint z = -x(leaf).
inline double ru_value(const std::vector<double>& x, const std::vector<double>& p,
                       double lambda) {
    double best = kInf;
    for (double z0 : x) {
        double z = -z0, e = 0.0;
        for (size_t i = 0; i < x.size(); ++i) e += p[i] * std::max(-x[i] - z, 0.0);
        best = std::min(best, z + e / lambda);
    }
    return best;
}

}  // namespace risktool::oracles
