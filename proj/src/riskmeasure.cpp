#include "risktool/riskmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace risktool {

namespace {

constexpr double kSnap = 1e-11;

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int i) { return p[i] == i ? i : p[i] = find(p[i]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

Polyhedron poly_from_rows(int dim, const std::vector<LpConstraint>& rows) {
    std::vector<Halfspace> hs;
    for (const auto& r : rows) {
        hs.push_back({r.a, r.b});
        if (r.rel == Rel::Eq) hs.push_back({negate(r.a), -r.b});
    }
    return Polyhedron::from_h(dim, hs);
}

// {x : exists k(h) in cone(h) per time-s node h, x = embedded k}.
StackedSet embedded_cone_selections(const ScenarioTree& tree, const ConicalMarket& market, int s,
                                    bool eligible_restricted) {
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const auto& layer = tree.at_time(s);
    const int naux = static_cast<int>(layer.size()) * d;
    std::vector<LpConstraint> rows;
    auto aux_of = [&](int pos, int k) { return D + pos * d + k; };
    for (size_t p = 0; p < tree.leaves().size(); ++p) {
        int anc = tree.ancestor_at(tree.leaves()[p], s);
        int pos = tree.layer_pos(anc);
        for (int k = 0; k < d; ++k) {
            Vec a(D + naux, 0.0);
            a[p * d + k] = 1.0;
            a[aux_of(pos, k)] = -1.0;
            rows.push_back({std::move(a), Rel::Eq, 0.0});
        }
    }
    for (size_t pos = 0; pos < layer.size(); ++pos) {
        const Polyhedron& cone = eligible_restricted ? market.solvent_eligible_cone(layer[pos])
                                                     : market.cone(layer[pos]);
        for (const auto& h : cone.hrep()) {
            Vec a(D + naux, 0.0);
            for (int k = 0; k < d; ++k) a[aux_of(pos, k)] = h.a[k];
            rows.push_back({std::move(a), Rel::Ge, h.b});
        }
    }
    return StackedSet(D, naux, std::move(rows));
}

}  // namespace

bool RandomSet::any_empty() const {
    return std::any_of(values.begin(), values.end(),
                       [](const Polyhedron& p) { return p.is_empty(); });
}

bool RandomSet::all_empty() const {
    return std::all_of(values.begin(), values.end(),
                       [](const Polyhedron& p) { return p.is_empty(); });
}

bool random_set_subset(const RandomSet& a, const RandomSet& b, double tol) {
    if (a.t != b.t || a.values.size() != b.values.size())
        fail("TimeMismatch", "random sets live at different times");
    for (size_t i = 0; i < a.values.size(); ++i)
        if (!subset(a.values[i], b.values[i], tol)) return false;
    return true;
}

bool random_set_equal(const RandomSet& a, const RandomSet& b, double tol) {
    return random_set_subset(a, b, tol) && random_set_subset(b, a, tol);
}

AcceptanceSet::AcceptanceSet(TreePtr tree, int t, StackedSet set)
    : tree_(std::move(tree)), t_(t), set_(std::move(set)) {
    if (t_ < 0 || t_ > tree_->horizon()) fail("BadTime", "acceptance time outside the tree");
    if (set_.main_dim() != stacked_dim(*tree_))
        fail("DimMismatch", "acceptance rows do not match the stacked claim dimension");
}

std::vector<std::string> acceptance_defects(const AcceptanceSet& a, const ConicalMarket& market) {
    const ScenarioTree& tree = *a.tree_ptr();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const int t = a.time();
    const Subspace& m = market.eligible(t);
    const auto& layer = tree.at_time(t);
    std::vector<std::string> defects;
    const double tol = default_tols().geo;

    // (1) Some embedded eligible portfolio is acceptable: LP over m(g).
    {
        const int nm = static_cast<int>(layer.size()) * d;
        std::vector<LpConstraint> sys;
        for (const auto& r : a.set().rows()) {
            Vec v(nm + a.set().aux_dim(), 0.0);
            for (size_t p = 0; p < tree.leaves().size(); ++p) {
                int pos = tree.layer_pos(tree.ancestor_at(tree.leaves()[p], t));
                for (int k = 0; k < d; ++k) v[pos * d + k] += r.a[p * d + k];
            }
            std::copy(r.a.begin() + D, r.a.end(), v.begin() + nm);
            sys.push_back({std::move(v), r.rel, r.b});
        }
        for (size_t pos = 0; pos < layer.size(); ++pos)
            for (const Vec& c : m.complement_onb()) {
                Vec v(nm + a.set().aux_dim(), 0.0);
                for (int k = 0; k < d; ++k) v[pos * d + k] = c[k];
                sys.push_back({std::move(v), Rel::Eq, 0.0});
            }
        if (!lp_feasible(nm + a.set().aux_dim(), sys, nullptr))
            defects.push_back("contains no embedded eligible portfolio");
    }

    // (2) Not all of them: the embedded eligible subspace must escape.  The
    // subspace lies inside iff 0 lies inside and every basis direction is a
    // two-sided recession direction.
    {
        bool all_inside = a.set().member(Vec(D, 0.0), tol);
        for (size_t pos = 0; all_inside && pos < layer.size(); ++pos)
            for (const Vec& bvec : m.onb()) {
                Vec dir(D, 0.0);
                for (int leaf : tree.leaves_under(layer[pos]))
                    for (int k = 0; k < d; ++k) dir[tree.layer_pos(leaf) * d + k] = bvec[k];
                if (!a.set().recession_member(dir, tol) ||
                    !a.set().recession_member(negate(dir), tol)) {
                    all_inside = false;
                    break;
                }
            }
        if (all_inside) defects.push_back("accepts every embedded eligible portfolio");
    }

    // (3) L_+ absorption: every positive coordinate direction recedes.
    for (int j = 0; j < D; ++j) {
        Vec dir(D, 0.0);
        dir[j] = 1.0;
        if (!a.set().recession_member(dir, tol)) {
            defects.push_back("not monotone: positive direction at stacked coordinate " +
                              std::to_string(j) + " leaves the set");
            break;
        }
    }
    return defects;
}

AcceptanceSet acceptance_worst_case(const ConicalMarket& market, int t) {
    const ScenarioTree& tree = market.tree();
    const int D = stacked_dim(tree);
    std::vector<LpConstraint> rows;
    for (int j = 0; j < D; ++j) {
        Vec a(D, 0.0);
        a[j] = 1.0;
        rows.push_back({std::move(a), Rel::Ge, 0.0});
    }
    return AcceptanceSet(market.tree_ptr(), t, StackedSet(D, 0, std::move(rows)));
}

AcceptanceSet acceptance_shp(const ConicalMarket& market, int t) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    // One cone selection k_s(h) per node h at each time s = t..T;
    // X = sum of the selections along each path.
    std::vector<int> aux_base;  // per time s - t, base offset of that layer
    int naux = 0;
    for (int s = t; s <= tree.horizon(); ++s) {
        aux_base.push_back(naux);
        naux += static_cast<int>(tree.at_time(s).size()) * d;
    }
    std::vector<LpConstraint> rows;
    auto aux_of = [&](int s, int pos, int k) { return D + aux_base[s - t] + pos * d + k; };
    for (size_t p = 0; p < tree.leaves().size(); ++p) {
        int leaf = tree.leaves()[p];
        for (int k = 0; k < d; ++k) {
            Vec a(D + naux, 0.0);
            a[p * d + k] = 1.0;
            for (int s = t; s <= tree.horizon(); ++s)
                a[aux_of(s, tree.layer_pos(tree.ancestor_at(leaf, s)), k)] -= 1.0;
            rows.push_back({std::move(a), Rel::Eq, 0.0});
        }
    }
    for (int s = t; s <= tree.horizon(); ++s) {
        const auto& layer = tree.at_time(s);
        for (size_t pos = 0; pos < layer.size(); ++pos)
            for (const auto& h : market.cone(layer[pos]).hrep()) {
                Vec a(D + naux, 0.0);
                for (int k = 0; k < d; ++k) a[aux_of(s, pos, k)] = h.a[k];
                rows.push_back({std::move(a), Rel::Ge, h.b});
            }
    }
    return AcceptanceSet(market.tree_ptr(), t, StackedSet(D, naux, std::move(rows)));
}

AcceptanceSet acceptance_avar(const ConicalMarket& market, const std::vector<Vec>& lambda, int t) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const auto& layer = tree.at_time(t);
    if (lambda.size() != layer.size()) fail("BadLambda", "one lambda vector per time-t node");
    for (const Vec& l : lambda) {
        if (static_cast<int>(l.size()) != d) fail("BadLambda", "lambda has wrong dimension");
        for (double v : l)
            if (!(v > 0.0) || v > 1.0 || !std::isfinite(v))
                fail("BadLambda", "lambda entries must lie in (0, 1]");
    }
    // Aux: z(g) per time-t node, then the residual claim Z per leaf.
    const int G = static_cast<int>(layer.size());
    const int L = static_cast<int>(tree.leaves().size());
    const int naux = G * d + L * d;
    auto z_of = [&](int pos, int k) { return D + pos * d + k; };
    auto big_of = [&](int p, int k) { return D + G * d + p * d + k; };

    std::vector<LpConstraint> rows;
    for (int pos = 0; pos < G; ++pos)
        for (int k = 0; k < d; ++k) {
            // z + diag(lambda)^{-1} E[Z | g] <= 0.
            Vec a(D + naux, 0.0);
            a[z_of(pos, k)] = -1.0;
            for (int leaf : tree.leaves_under(layer[pos]))
                a[big_of(tree.layer_pos(leaf), k)] =
                    -tree.cond_prob(leaf, layer[pos]) / lambda[pos][k];
            rows.push_back({std::move(a), Rel::Ge, 0.0});
        }
    for (int p = 0; p < L; ++p) {
        int pos = tree.layer_pos(tree.ancestor_at(tree.leaves()[p], t));
        for (int k = 0; k < d; ++k) {
            // Z >= -X - z, i.e. Z + X + z >= 0.
            Vec a(D + naux, 0.0);
            a[big_of(p, k)] = 1.0;
            a[p * d + k] = 1.0;
            a[z_of(pos, k)] = 1.0;
            rows.push_back({std::move(a), Rel::Ge, 0.0});
            Vec nn(D + naux, 0.0);
            nn[big_of(p, k)] = 1.0;
            rows.push_back({std::move(nn), Rel::Ge, 0.0});
        }
    }
    return AcceptanceSet(market.tree_ptr(), t, StackedSet(D, naux, std::move(rows)));
}

AcceptanceSet acceptance_from_rows(const TreePtr& tree, int t, std::vector<LpConstraint> rows) {
    return AcceptanceSet(tree, t, StackedSet(stacked_dim(*tree), 0, std::move(rows)));
}

RandomSet risk_from_acceptance(const AcceptanceSet& a, const AdaptedVector& claim,
                               const ConicalMarket& market) {
    const ScenarioTree& tree = *a.tree_ptr();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const int t = a.time();
    const auto& layer = tree.at_time(t);
    const int G = static_cast<int>(layer.size());
    const int m = a.set().aux_dim();
    const int nv = G * d + m;  // [u-blocks | aux]
    const Vec xs = stack_claim(tree, claim);
    const double ctol = default_tols().geo * std::max(1.0, norm_inf(xs));

    // Time-t ancestor of each leaf, as a layer position.
    std::vector<int> anc_pos(tree.leaves().size());
    for (size_t p = 0; p < tree.leaves().size(); ++p)
        anc_pos[p] = tree.layer_pos(tree.ancestor_at(tree.leaves()[p], t));

    struct SubRow {
        Vec a;        // width nv
        Rel rel;
        double b;
        std::vector<int> touched_nodes;  // time-t layer positions in main support
    };
    std::vector<SubRow> sys;
    for (const auto& r : a.set().rows()) {
        SubRow s;
        s.a.assign(nv, 0.0);
        s.rel = r.rel;
        s.b = r.b;
        std::vector<char> seen(G, 0);
        for (size_t p = 0; p < tree.leaves().size(); ++p)
            for (int k = 0; k < d; ++k) {
                double c = r.a[p * d + k];
                if (c == 0.0) continue;
                s.a[anc_pos[p] * d + k] += c;
                s.b -= c * xs[p * d + k];
                seen[anc_pos[p]] = 1;
            }
        for (int j = 0; j < m; ++j) s.a[G * d + j] = r.a[D + j];
        for (double& c : s.a)
            if (std::fabs(c) < kSnap) c = 0.0;
        for (int g = 0; g < G; ++g)
            if (seen[g]) s.touched_nodes.push_back(g);
        sys.push_back(std::move(s));
    }
    // Eligibility of the compensation: u(g) in M_t.
    for (int g = 0; g < G; ++g)
        for (const Vec& c : market.eligible(t).complement_onb()) {
            SubRow s;
            s.a.assign(nv, 0.0);
            for (int k = 0; k < d; ++k) s.a[g * d + k] = c[k];
            s.rel = Rel::Eq;
            s.b = 0.0;
            s.touched_nodes = {g};
            sys.push_back(std::move(s));
        }

    UnionFind uf(nv);
    for (const auto& s : sys) {
        int first = -1;
        for (int j = 0; j < nv; ++j)
            if (s.a[j] != 0.0) {
                if (first < 0) first = j;
                else uf.unite(first, j);
            }
    }

    RandomSet out;
    out.t = t;
    std::vector<char> node_empty(G, 0);
    bool global_empty = false;
    auto attribute = [&](const std::vector<int>& nodes) {
        if (nodes.size() == 1) node_empty[nodes[0]] = 1;
        else global_empty = true;
    };

    // Constant rows and components without compensation variables.
    std::vector<int> row_comp(sys.size(), -1);
    for (size_t i = 0; i < sys.size(); ++i) {
        const auto& s = sys[i];
        int any = -1;
        for (int j = 0; j < nv && any < 0; ++j)
            if (s.a[j] != 0.0) any = j;
        if (any < 0) {
            bool ok = s.rel == Rel::Ge ? 0.0 >= s.b - ctol : std::fabs(s.b) <= ctol;
            if (!ok) attribute(s.touched_nodes);
        } else {
            row_comp[i] = uf.find(any);
        }
    }
    std::vector<char> comp_has_u(nv, 0);
    for (int g = 0; g < G; ++g)
        for (int k = 0; k < d; ++k) comp_has_u[uf.find(g * d + k)] = 1;
    {
        // Feasibility of aux-only components.
        std::vector<std::vector<int>> comp_rows(nv);
        for (size_t i = 0; i < sys.size(); ++i)
            if (row_comp[i] >= 0 && !comp_has_u[row_comp[i]])
                comp_rows[row_comp[i]].push_back(static_cast<int>(i));
        for (int c = 0; c < nv; ++c) {
            if (comp_rows[c].empty()) continue;
            std::vector<int> vars;
            for (int j = 0; j < nv; ++j)
                if (uf.find(j) == c) vars.push_back(j);
            std::vector<LpConstraint> rows;
            std::vector<int> touched;
            for (int i : comp_rows[c]) {
                Vec v(vars.size());
                for (size_t q = 0; q < vars.size(); ++q) v[q] = sys[i].a[vars[q]];
                rows.push_back({std::move(v), sys[i].rel, sys[i].b});
                for (int g : sys[i].touched_nodes) touched.push_back(g);
            }
            if (!lp_feasible(static_cast<int>(vars.size()), rows, nullptr)) {
                std::sort(touched.begin(), touched.end());
                touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
                attribute(touched);
            }
        }
    }

    for (int g = 0; g < G; ++g) {
        if (global_empty || node_empty[g]) {
            out.values.push_back(Polyhedron::empty_set(d));
            continue;
        }
        // All components sharing any of u(g)'s coordinates.
        std::vector<char> comps(nv, 0);
        for (int k = 0; k < d; ++k) comps[uf.find(g * d + k)] = 1;
        std::vector<int> vars;
        for (int k = 0; k < d; ++k) vars.push_back(g * d + k);
        for (int j = 0; j < nv; ++j)
            if (comps[uf.find(j)] && !(j >= g * d && j < (g + 1) * d)) vars.push_back(j);
        std::vector<LpConstraint> rows;
        for (size_t i = 0; i < sys.size(); ++i) {
            if (row_comp[i] < 0 || !comps[row_comp[i]]) continue;
            Vec v(vars.size());
            for (size_t q = 0; q < vars.size(); ++q) v[q] = sys[i].a[vars[q]];
            rows.push_back({std::move(v), sys[i].rel, sys[i].b});
        }
        auto pr = fm_project(static_cast<int>(vars.size()), d, std::move(rows));
        out.values.push_back(pr.infeasible ? Polyhedron::empty_set(d) : poly_from_rows(d, pr.rows));
    }
    if (global_empty) {
        out.empty_everywhere = true;
        for (auto& p : out.values) p = Polyhedron::empty_set(d);
    }
    return out;
}

RandomSet worst_case(const AdaptedVector& claim, int t, const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    if (claim.t != tree.horizon()) fail("TimeOrder", "claims live at the horizon");
    RandomSet out;
    out.t = t;
    for (int g : tree.at_time(t)) {
        Vec lo(d, -kInf);
        for (int leaf : tree.leaves_under(g)) {
            const Vec& x = claim.values[tree.layer_pos(leaf)];
            for (int k = 0; k < d; ++k) lo[k] = std::max(lo[k], -x[k]);
        }
        std::vector<Halfspace> hs;
        for (int k = 0; k < d; ++k) {
            Vec a(d, 0.0);
            a[k] = 1.0;
            hs.push_back({std::move(a), lo[k]});
        }
        for (const Vec& c : market.eligible(t).complement_onb()) {
            hs.push_back({c, 0.0});
            hs.push_back({negate(c), 0.0});
        }
        out.values.push_back(Polyhedron::from_h(d, hs));
    }
    return out;
}

std::vector<RandomSet> shp(const AdaptedVector& claim, const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int T = tree.horizon();
    if (claim.t != T) fail("TimeOrder", "claims live at the horizon");
    std::vector<RandomSet> out(T + 1);
    out[T].t = T;
    out[T].values.resize(tree.leaves().size());
    parallel_for(tree.leaves().size(), [&](size_t p) {
        out[T].values[p] = market.cone(tree.leaves()[p]).translated(claim.values[p]);
    });
    for (int t = T - 1; t >= 0; --t) {
        const auto& layer = tree.at_time(t);
        out[t].t = t;
        out[t].values.resize(layer.size());
        parallel_for(layer.size(), [&](size_t pos) {
            const TreeNode& n = tree.node(layer[pos]);
            Polyhedron cur = out[t + 1].values[tree.layer_pos(n.children[0])];
            for (size_t c = 1; c < n.children.size() && !cur.is_empty(); ++c)
                cur = intersect(cur, out[t + 1].values[tree.layer_pos(n.children[c])]);
            out[t].values[pos] =
                cur.is_empty() ? cur : minkowski_sum(cur, market.cone(layer[pos]));
        });
    }
    return out;
}

RandomSet avar(const AdaptedVector& claim, const std::vector<Vec>& lambda, int t,
               const ConicalMarket& market, bool market_compatible) {
    auto a = acceptance_avar(market, lambda, t);
    RandomSet r = risk_from_acceptance(a, claim, market);
    if (market_compatible) {
        const auto& layer = market.tree().at_time(t);
        for (size_t pos = 0; pos < layer.size(); ++pos)
            if (!r.values[pos].is_empty())
                r.values[pos] =
                    minkowski_sum(r.values[pos], market.solvent_eligible_cone(layer[pos]));
    }
    return r;
}

RandomSet normalize(const RandomSet& at_claim, const RandomSet& at_zero) {
    if (at_claim.t != at_zero.t || at_claim.values.size() != at_zero.values.size())
        fail("TimeMismatch", "normalization operands live at different times");
    RandomSet out;
    out.t = at_claim.t;
    for (size_t i = 0; i < at_claim.values.size(); ++i)
        out.values.push_back(geometric_difference(at_claim.values[i], at_zero.values[i]));
    return out;
}

AcceptanceSet acceptance_from_risk(const RiskMeasure& r, int t) {
    auto a = r.acceptance(t);
    if (!a) fail("NotRepresentable", "measure " + r.name() + " has no polyhedral acceptance set");
    return *a;
}

WorstCaseMeasure::WorstCaseMeasure(std::shared_ptr<const ConicalMarket> market)
    : market_(std::move(market)) {}

RandomSet WorstCaseMeasure::evaluate(const AdaptedVector& claim, int t) const {
    return worst_case(claim, t, *market_);
}

std::optional<AcceptanceSet> WorstCaseMeasure::acceptance(int t) const {
    return acceptance_worst_case(*market_, t);
}

ShpMeasure::ShpMeasure(std::shared_ptr<const ConicalMarket> market) : market_(std::move(market)) {}

RandomSet ShpMeasure::evaluate(const AdaptedVector& claim, int t) const {
    AdaptedVector neg = adapted_scale(-1.0, claim);
    RandomSet r = shp(neg, *market_)[t];
    const Subspace& m = market_->eligible(t);
    if (m.dim() < market_->tree().assets()) {
        // Post-hoc restriction: the recursion itself runs in the full space.
        Polyhedron mp = m.as_polyhedron();
        for (auto& p : r.values) p = intersect(p, mp);
    }
    return r;
}

std::optional<AcceptanceSet> ShpMeasure::acceptance(int t) const {
    return acceptance_shp(*market_, t);
}

AvarMeasure::AvarMeasure(std::shared_ptr<const ConicalMarket> market,
                         std::vector<Vec> lambda_per_node, bool market_compatible)
    : market_(std::move(market)), lambda_(std::move(lambda_per_node)),
      market_compatible_(market_compatible) {
    const ScenarioTree& tree = market_->tree();
    if (static_cast<int>(lambda_.size()) != tree.node_count())
        fail("BadLambda", "one lambda vector per node required");
    for (const Vec& l : lambda_) {
        if (static_cast<int>(l.size()) != tree.assets())
            fail("BadLambda", "lambda has wrong dimension");
        for (double v : l)
            if (!(v > 0.0) || v > 1.0 || !std::isfinite(v))
                fail("BadLambda", "lambda entries must lie in (0, 1]");
    }
}

std::string AvarMeasure::name() const { return market_compatible_ ? "avar-market" : "avar"; }

std::vector<Vec> AvarMeasure::layer_lambda(int t) const {
    std::vector<Vec> out;
    for (int g : market_->tree().at_time(t)) out.push_back(lambda_[g]);
    return out;
}

RandomSet AvarMeasure::evaluate(const AdaptedVector& claim, int t) const {
    return avar(claim, layer_lambda(t), t, *market_, market_compatible_);
}

std::optional<AcceptanceSet> AvarMeasure::acceptance(int t) const {
    auto base = acceptance_avar(*market_, layer_lambda(t), t);
    if (!market_compatible_) return base;
    // Trading at t enlarges acceptance by the embedded eligible-cone
    // selections; the projection identity R_mc = R + K^M then holds exactly.
    auto traded = stacked_sum(base.set(),
                              embedded_cone_selections(market_->tree(), *market_, t, true));
    return AcceptanceSet(market_->tree_ptr(), t, std::move(traded));
}

AcceptanceFamilyMeasure::AcceptanceFamilyMeasure(std::shared_ptr<const ConicalMarket> market,
                                                 std::string name,
                                                 std::vector<AcceptanceSet> per_time)
    : market_(std::move(market)), name_(std::move(name)), per_time_(std::move(per_time)) {
    if (static_cast<int>(per_time_.size()) != market_->tree().horizon() + 1)
        fail("BadTime", "one acceptance set per time required");
    for (int t = 0; t <= market_->tree().horizon(); ++t)
        if (per_time_[t].time() != t) fail("BadTime", "acceptance set at mismatched time");
}

RandomSet AcceptanceFamilyMeasure::evaluate(const AdaptedVector& claim, int t) const {
    return risk_from_acceptance(per_time_[t], claim, *market_);
}

std::optional<AcceptanceSet> AcceptanceFamilyMeasure::acceptance(int t) const {
    return per_time_[t];
}

bool AxiomReport::all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.holds; });
}

const AxiomCheck* AxiomReport::find(const std::string& axiom) const {
    for (const auto& c : checks)
        if (c.axiom == axiom) return &c;
    return nullptr;
}

namespace {

std::string node_tag(const ScenarioTree& tree, int t, int pos) {
    return "node " + tree.node(tree.at_time(t)[pos]).id;
}

}  // namespace

AxiomReport check_axioms(const RiskMeasure& r, const std::vector<AdaptedVector>& claims, int t,
                         Rng& rng, double tol) {
    const ConicalMarket& market = r.market();
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const auto& layer = tree.at_time(t);
    const int G = static_cast<int>(layer.size());
    const Subspace& m = market.eligible(t);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    AxiomReport rep;
    auto add = [&](std::string axiom) -> AxiomCheck& {
        rep.checks.push_back({std::move(axiom), true, ""});
        return rep.checks.back();
    };

    AdaptedVector zero = AdaptedVector::zero(tree, tree.horizon());
    RandomSet at_zero = r.evaluate(zero, t);
    std::vector<RandomSet> at_claim;
    for (const auto& x : claims) at_claim.push_back(r.evaluate(x, t));

    Polyhedron m_poly = m.as_polyhedron();
    {
        auto& c = add("finiteness-at-zero");
        for (int g = 0; g < G && c.holds; ++g) {
            if (at_zero.values[g].is_empty()) {
                c.holds = false;
                c.detail = "R(0) empty at " + node_tag(tree, t, g);
            } else if (subset(m_poly, at_zero.values[g], tol)) {
                c.holds = false;
                c.detail = "R(0) covers all of M at " + node_tag(tree, t, g);
            }
        }
    }

    {
        auto& c = add("translativity");
        for (size_t i = 0; i < claims.size() && c.holds; ++i) {
            // Random eligible time-t translate.
            AdaptedVector mt;
            mt.t = t;
            for (int g = 0; g < G; ++g) {
                Vec v(d, 0.0);
                for (const Vec& b : m.onb()) v = v + (2.0 * sym(rng)) * b;
                mt.values.push_back(std::move(v));
            }
            AdaptedVector shifted = adapted_add(claims[i], extend_to_leaves(tree, mt));
            RandomSet lhs = r.evaluate(shifted, t);
            for (int g = 0; g < G && c.holds; ++g) {
                Polyhedron want = at_claim[i].values[g].translated(negate(mt.values[g]));
                if (!set_equal(lhs.values[g], want, tol)) {
                    c.holds = false;
                    c.detail = "claim " + std::to_string(i) + " at " + node_tag(tree, t, g);
                }
            }
        }
    }

    {
        auto& c = add("monotonicity");
        for (size_t i = 0; i < claims.size() && c.holds; ++i) {
            AdaptedVector bigger = claims[i];
            for (auto& v : bigger.values)
                for (double& x : v) x += u01(rng);
            RandomSet rb = r.evaluate(bigger, t);
            for (int g = 0; g < G && c.holds; ++g)
                if (!subset(at_claim[i].values[g], rb.values[g], tol)) {
                    c.holds = false;
                    c.detail = "claim " + std::to_string(i) + " at " + node_tag(tree, t, g);
                }
        }
    }

    auto convexity_check = [&](AxiomCheck& c, bool conditional) {
        for (size_t i = 0; i + 1 < claims.size() && c.holds; i += 2) {
            const AdaptedVector& x = claims[i];
            const AdaptedVector& y = claims[i + 1];
            Vec lam(G);
            double flat = 0.25 + 0.5 * u01(rng);
            for (int g = 0; g < G; ++g) lam[g] = conditional ? u01(rng) : flat;
            AdaptedVector mix;
            mix.t = tree.horizon();
            for (size_t p = 0; p < tree.leaves().size(); ++p) {
                double l = lam[tree.layer_pos(tree.ancestor_at(tree.leaves()[p], t))];
                mix.values.push_back(l * x.values[p] + (1.0 - l) * y.values[p]);
            }
            RandomSet rm = r.evaluate(mix, t);
            for (int g = 0; g < G && c.holds; ++g) {
                if (at_claim[i].values[g].is_empty() || at_claim[i + 1].values[g].is_empty())
                    continue;
                Polyhedron combo = minkowski_sum(at_claim[i].values[g].scaled(lam[g]),
                                                 at_claim[i + 1].values[g].scaled(1.0 - lam[g]));
                if (!subset(combo, rm.values[g], tol)) {
                    c.holds = false;
                    c.detail = "claims " + std::to_string(i) + "," + std::to_string(i + 1) +
                               " at " + node_tag(tree, t, g);
                }
            }
        }
    };
    convexity_check(add("convexity"), false);
    convexity_check(add("conditional-convexity"), true);

    {
        auto& c = add("positive-homogeneity");
        for (size_t i = 0; i < claims.size() && c.holds; ++i)
            for (double s : {0.5, 2.0}) {
                RandomSet rs = r.evaluate(adapted_scale(s, claims[i]), t);
                for (int g = 0; g < G && c.holds; ++g)
                    if (!set_equal(rs.values[g], at_claim[i].values[g].scaled(s), tol)) {
                        c.holds = false;
                        c.detail = "claim " + std::to_string(i) + ", scale " + std::to_string(s) +
                                   " at " + node_tag(tree, t, g);
                    }
                if (!c.holds) break;
            }
    }

    {
        auto& c = add("subadditivity");
        for (size_t i = 0; i + 1 < claims.size() && c.holds; i += 2) {
            RandomSet rs = r.evaluate(adapted_add(claims[i], claims[i + 1]), t);
            for (int g = 0; g < G && c.holds; ++g) {
                if (at_claim[i].values[g].is_empty() || at_claim[i + 1].values[g].is_empty())
                    continue;
                Polyhedron sum =
                    minkowski_sum(at_claim[i].values[g], at_claim[i + 1].values[g]);
                if (!subset(sum, rs.values[g], tol)) {
                    c.holds = false;
                    c.detail = "claims " + std::to_string(i) + "," + std::to_string(i + 1) +
                               " at " + node_tag(tree, t, g);
                }
            }
        }
    }

    {
        auto& c = add("market-compatibility");
        for (size_t i = 0; i < claims.size() && c.holds; ++i)
            for (int g = 0; g < G && c.holds; ++g) {
                if (at_claim[i].values[g].is_empty()) continue;
                Polyhedron traded = minkowski_sum(at_claim[i].values[g],
                                                  market.solvent_eligible_cone(layer[g]));
                if (!set_equal(traded, at_claim[i].values[g], tol)) {
                    c.holds = false;
                    c.detail = "claim " + std::to_string(i) + " at " + node_tag(tree, t, g);
                }
            }
    }

    {
        auto& c = add("normalization");
        for (size_t i = 0; i < claims.size() && c.holds; ++i)
            for (int g = 0; g < G && c.holds; ++g) {
                if (at_claim[i].values[g].is_empty() || at_zero.values[g].is_empty()) continue;
                Polyhedron sum = minkowski_sum(at_claim[i].values[g], at_zero.values[g]);
                if (!set_equal(sum, at_claim[i].values[g], tol)) {
                    c.holds = false;
                    c.detail = "claim " + std::to_string(i) + " at " + node_tag(tree, t, g);
                }
            }
    }

    return rep;
}

}  // namespace risktool
