#pragma once

#include <optional>
#include <vector>

#include "risktool/polytope.hpp"
#include "risktool/tree.hpp"

namespace risktool {

/// Linear subspace of R^d kept as an orthonormal basis together with an
/// orthonormal basis of its complement (the membership equalities).
class Subspace {
public:
    static Subspace full(int d);
    static Subspace span(int d, const std::vector<Vec>& generators);

    int ambient() const { return d_; }
    int dim() const { return static_cast<int>(onb_.size()); }
    const std::vector<Vec>& onb() const { return onb_; }
    const std::vector<Vec>& complement_onb() const { return comp_; }

    bool contains(const Vec& v, double tol) const;
    Vec project(const Vec& v) const;
    bool subspace_of(const Subspace& other, double tol) const;
    /// {u : c·u = 0 for complement basis c}, i.e. the subspace as a set.
    Polyhedron as_polyhedron() const;
    /// The subspace orthant M ∩ R^d_+.
    Polyhedron positive_part() const;

private:
    int d_ = 0;
    std::vector<Vec> onb_;
    std::vector<Vec> comp_;
};

/// Per-node solvency cones plus per-time eligible subspaces.  Cones must
/// contain the positive orthant and be proper subsets of R^d; each (M_t)_+
/// must be nontrivial.
class ConicalMarket {
public:
    static ConicalMarket build(TreePtr tree, std::vector<Polyhedron> cone_per_node,
                               std::vector<Subspace> eligible_per_time);

    const TreePtr& tree_ptr() const { return tree_; }
    const ScenarioTree& tree() const { return *tree_; }
    const Polyhedron& cone(int node) const { return cones_[node]; }
    const Subspace& eligible(int t) const { return eligible_[t]; }
    /// K(g) ∩ M_t in ambient coordinates.
    const Polyhedron& solvent_eligible_cone(int node) const { return k_m_[node]; }
    /// True when M_t is a subspace of M_{t+1} for all t (hypothesis of the
    /// decomposition results).
    bool eligible_nested() const { return nested_; }

private:
    TreePtr tree_;
    std::vector<Polyhedron> cones_;
    std::vector<Subspace> eligible_;
    std::vector<Polyhedron> k_m_;
    bool nested_ = true;
};

/// Solvency cone spanned by {e^i} and the exchange vectors pi[i][j]e^i - e^j.
Polyhedron cone_from_bid_ask(const std::vector<Vec>& pi);

/// Frictionless cone {k : price·k >= 0}.
Polyhedron cone_from_price(const Vec& price);

/// Strictly consistent pricing process found by LP, or failure.
struct NoArbitrageCheck {
    bool certified = false;
    double margin = 0.0;              // the strictness margin the LP enforced
    std::vector<Vec> Z;               // node-indexed when certified
};

/// Searches for a P-martingale Z with Z(g)·r >= margin for every generator
/// ray r of K(g) and Z(g)·l = 0 for every lineality direction, normalized by
/// sum(Z(root)) = 1.  Feasibility certifies robust no-arbitrage; the margin
/// surrogate for strict interiority is recorded in the result.
NoArbitrageCheck check_robust_no_arbitrage(const ConicalMarket& market, double margin);

}  // namespace risktool
