#include "risktool/market.hpp"

#include <algorithm>
#include <cmath>

#include "risktool/lp.hpp"

namespace risktool {

namespace {

Vec unit(int d, int i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    return e;
}

// Gram-Schmidt; drops numerically dependent vectors.
std::vector<Vec> orthonormalize(int d, const std::vector<Vec>& gens) {
    std::vector<Vec> onb;
    for (const Vec& g : gens) {
        if (static_cast<int>(g.size()) != d) fail("DimMismatch", "basis vector of wrong dimension");
        Vec v = g;
        for (const Vec& u : onb) v = v - dot(v, u) * u;
        double n = norm2(v);
        if (n > 1e-10) onb.push_back((1.0 / n) * v);
    }
    return onb;
}

}  // namespace

Subspace Subspace::full(int d) {
    Subspace s;
    s.d_ = d;
    for (int i = 0; i < d; ++i) s.onb_.push_back(unit(d, i));
    return s;
}

Subspace Subspace::span(int d, const std::vector<Vec>& generators) {
    Subspace s;
    s.d_ = d;
    s.onb_ = orthonormalize(d, generators);
    if (s.onb_.empty()) fail("EmptySubspace", "eligible subspace must be nontrivial");
    // Complete to a basis of R^d; the tail spans the complement.
    std::vector<Vec> ext = s.onb_;
    for (int i = 0; i < d; ++i) ext.push_back(unit(d, i));
    std::vector<Vec> all = orthonormalize(d, ext);
    s.comp_.assign(all.begin() + s.onb_.size(), all.end());
    return s;
}

bool Subspace::contains(const Vec& v, double tol) const {
    for (const Vec& c : comp_)
        if (std::fabs(dot(c, v)) > tol * std::max(1.0, norm_inf(v))) return false;
    return true;
}

Vec Subspace::project(const Vec& v) const {
    Vec p(d_, 0.0);
    for (const Vec& u : onb_) p = p + dot(u, v) * u;
    return p;
}

bool Subspace::subspace_of(const Subspace& other, double tol) const {
    for (const Vec& u : onb_)
        if (!other.contains(u, tol)) return false;
    return true;
}

Polyhedron Subspace::as_polyhedron() const {
    std::vector<Halfspace> hs;
    for (const Vec& c : comp_) {
        hs.push_back({c, 0.0});
        hs.push_back({negate(c), 0.0});
    }
    return hs.empty() ? Polyhedron::full_space(d_) : Polyhedron::from_h(d_, hs);
}

Polyhedron Subspace::positive_part() const {
    return intersect(as_polyhedron(), Polyhedron::orthant(d_));
}

Polyhedron cone_from_bid_ask(const std::vector<Vec>& pi) {
    const int d = static_cast<int>(pi.size());
    if (d < 1) fail("InvalidBidAsk", "empty exchange matrix");
    const double tol = default_tols().num;
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(pi[i].size()) != d) fail("InvalidBidAsk", "exchange matrix not square");
        if (std::fabs(pi[i][i] - 1.0) > tol) fail("InvalidBidAsk", "diagonal rates must equal 1");
        for (int j = 0; j < d; ++j) {
            if (!(pi[i][j] > 0.0) || !std::isfinite(pi[i][j]))
                fail("InvalidBidAsk", "exchange rates must be positive");
            if (pi[i][j] * pi[j][i] < 1.0 - tol)
                fail("InvalidBidAsk", "round trip through a rate pair creates money");
        }
    }
    std::vector<Vec> rays;
    for (int i = 0; i < d; ++i) rays.push_back(unit(d, i));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            Vec r = unit(d, i);
            r = pi[i][j] * r - unit(d, j);
            rays.push_back(std::move(r));
        }
    return Polyhedron::from_v(d, {Vec(d, 0.0)}, rays);
}

Polyhedron cone_from_price(const Vec& price) {
    const int d = static_cast<int>(price.size());
    for (double s : price)
        if (!(s > 0.0) || !std::isfinite(s)) fail("NonpositivePrice", "prices must be positive");
    return Polyhedron::from_h(d, {{price, 0.0}});
}

ConicalMarket ConicalMarket::build(TreePtr tree, std::vector<Polyhedron> cone_per_node,
                                   std::vector<Subspace> eligible_per_time) {
    const ScenarioTree& tr = *tree;
    const int d = tr.assets();
    const double tol = default_tols().geo;
    if (static_cast<int>(cone_per_node.size()) != tr.node_count())
        fail("InvalidCone", "one solvency cone per node required");
    if (static_cast<int>(eligible_per_time.size()) != tr.horizon() + 1)
        fail("EmptySubspace", "one eligible subspace per time required");

    for (const Polyhedron& k : cone_per_node) {
        if (k.dim() != d) fail("InvalidCone", "cone dimension does not match asset count");
        if (!k.is_cone(tol)) fail("InvalidCone", "solvency set must be a cone at the origin");
        if (k.hrep().empty()) fail("InvalidCone", "solvency cone must be a proper subset");
        for (int i = 0; i < d; ++i) {
            Vec e(d, 0.0);
            e[i] = 1.0;
            if (!k.contains(e, tol)) fail("InvalidCone", "cone must contain the positive orthant");
        }
    }
    for (const Subspace& m : eligible_per_time) {
        if (m.ambient() != d) fail("EmptySubspace", "eligible subspace has wrong ambient dimension");
        // (M_t)_+ nontrivial: a nonzero nonnegative vector of M_t exists.
        std::vector<LpConstraint> cons;
        const int k = m.dim();
        // u = sum c_j onb_j >= 0 componentwise, sum(u) = 1.
        Vec ones(k, 0.0);
        for (int i = 0; i < d; ++i) {
            Vec row(k, 0.0);
            for (int j = 0; j < k; ++j) row[j] = m.onb()[j][i];
            for (int j = 0; j < k; ++j) ones[j] += row[j];
            cons.push_back({row, Rel::Ge, 0.0});
        }
        cons.push_back({ones, Rel::Eq, 1.0});
        if (!lp_feasible(k, cons, nullptr))
            fail("EmptySubspace", "eligible subspace meets the positive orthant only at 0");
    }

    ConicalMarket mk;
    mk.tree_ = std::move(tree);
    mk.cones_ = std::move(cone_per_node);
    mk.eligible_ = std::move(eligible_per_time);
    mk.nested_ = true;
    for (int t = 0; t < tr.horizon(); ++t)
        if (!mk.eligible_[t].subspace_of(mk.eligible_[t + 1], tol)) mk.nested_ = false;
    mk.k_m_.reserve(tr.node_count());
    for (int i = 0; i < tr.node_count(); ++i) {
        const Subspace& m = mk.eligible_[tr.node(i).t];
        mk.k_m_.push_back(m.dim() == d ? mk.cones_[i]
                                       : intersect(mk.cones_[i], m.as_polyhedron()));
    }
    return mk;
}

NoArbitrageCheck check_robust_no_arbitrage(const ConicalMarket& market, double margin) {
    if (!(margin > 0.0)) fail("BadMargin", "strictness margin must be positive");
    const ScenarioTree& tr = market.tree();
    const int d = tr.assets();
    const int n = tr.node_count();
    auto var = [d](int node, int k) { return node * d + k; };

    std::vector<LpConstraint> cons;
    for (int i = 0; i < n; ++i) {
        const TreeNode& nd = tr.node(i);
        if (nd.t < tr.horizon()) {
            // Martingale: Z(g) = sum q(h|g) Z(h).
            for (int k = 0; k < d; ++k) {
                Vec a(n * d, 0.0);
                a[var(i, k)] = 1.0;
                for (int c : nd.children) a[var(c, k)] -= tr.node(c).q;
                cons.push_back({std::move(a), Rel::Eq, 0.0});
            }
        }
        const Polyhedron& cone = market.cone(i);
        // Minimal-rep rays are never reversible, so each gets the strict
        // margin; reversible directions surface as opposite ray pairs and
        // their two rows pin Z to the orthogonal complement.
        for (const Vec& r : cone.rays()) {
            Vec a(n * d, 0.0);
            for (int k = 0; k < d; ++k) a[var(i, k)] = r[k];
            bool reversible = cone.contains(negate(r), default_tols().geo);
            cons.push_back({std::move(a), Rel::Ge, reversible ? 0.0 : margin});
        }
    }
    {
        Vec a(n * d, 0.0);
        for (int k = 0; k < d; ++k) a[var(tr.root(), k)] = 1.0;
        cons.push_back({std::move(a), Rel::Eq, 1.0});
    }

    NoArbitrageCheck out;
    out.margin = margin;
    Vec z;
    if (!lp_feasible(n * d, cons, &z)) return out;
    out.certified = true;
    out.Z.resize(n);
    for (int i = 0; i < n; ++i) {
        out.Z[i] = Vec(d);
        for (int k = 0; k < d; ++k) out.Z[i][k] = z[var(i, k)];
    }
    return out;
}

}  // namespace risktool
