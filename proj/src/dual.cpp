#include "risktool/dual.hpp"

#include <algorithm>
#include <cmath>

namespace risktool {

namespace {

std::string node_name(const ScenarioTree& tree, int node) { return tree.node(node).id; }

/// Fallback weight that is valid at any node: nonnegative, inside the dual
/// cone of (M_t)_+, not orthogonal to M_t.
Vec ones_weight(int d) { return Vec(d, 1.0); }

}  // namespace

std::vector<std::string> dual_pair_defects(const DualPair& p, const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const auto& layer = tree.at_time(p.t);
    const double tol = default_tols().num;
    std::vector<std::string> defects;
    if (p.w.size() != layer.size()) {
        defects.push_back("weight count does not match the time layer");
        return defects;
    }
    const Subspace& m = market.eligible(p.t);
    std::vector<Vec> plus_rays = m.positive_part().rays();
    for (size_t pos = 0; pos < layer.size(); ++pos) {
        const Vec& w = p.w[pos];
        if (static_cast<int>(w.size()) != d) {
            defects.push_back("weight dimension mismatch at node " +
                              node_name(tree, layer[pos]));
            continue;
        }
        for (const Vec& r : plus_rays)
            if (dot(w, r) < -tol * std::max(1.0, norm_inf(w))) {
                defects.push_back("weight leaves the dual cone of the eligible orthant at node " +
                                  node_name(tree, layer[pos]));
                break;
            }
        if (norm2(m.project(w)) <= tol)
            defects.push_back("weight orthogonal to the eligible space at node " +
                              node_name(tree, layer[pos]));
        for (int leaf : tree.leaves_under(layer[pos])) {
            Vec ratio = p.q.path_ratio(leaf, layer[pos]);
            for (int i = 0; i < d; ++i)
                if (w[i] * ratio[i] < -tol * std::max(1.0, std::fabs(w[i]))) {
                    defects.push_back("coupling fails for asset " + std::to_string(i) +
                                      " at leaf " + node_name(tree, leaf));
                    break;
                }
        }
    }
    return defects;
}

std::vector<std::string> pricing_process_defects(const PricingProcess& p,
                                                 const ConicalMarket& market, int from_t) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const double tol = default_tols().num;
    std::vector<std::string> defects;
    if (static_cast<int>(p.z.size()) != tree.node_count()) {
        defects.push_back("one value per node required");
        return defects;
    }
    for (int g = 0; g < tree.node_count(); ++g) {
        if (static_cast<int>(p.z[g].size()) != d) {
            defects.push_back("dimension mismatch at node " + node_name(tree, g));
            return defects;
        }
        const TreeNode& n = tree.node(g);
        if (!n.children.empty()) {
            Vec mean(d, 0.0);
            for (int h : n.children) mean = mean + tree.node(h).q * p.z[h];
            for (int i = 0; i < d; ++i)
                if (std::fabs(mean[i] - p.z[g][i]) > tol * std::max(1.0, std::fabs(p.z[g][i]))) {
                    defects.push_back("martingale identity fails at node " + node_name(tree, g));
                    break;
                }
        }
        if (n.t < from_t) continue;
        if (norm2(p.z[g]) <= tol)
            defects.push_back("zero value at node " + node_name(tree, g));
        for (const Vec& r : market.cone(g).rays())
            if (dot(p.z[g], r) < -tol * std::max(1.0, norm_inf(p.z[g]))) {
                defects.push_back("value leaves the dual solvency cone at node " +
                                  node_name(tree, g));
                break;
            }
    }
    return defects;
}

DualPair qw_from_yv(const ConicalMarket& market, const std::vector<Vec>& y_leaf,
                    const std::vector<Vec>& v, int t) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const auto& layer = tree.at_time(t);
    const double tol = default_tols().num;
    if (y_leaf.size() != tree.leaves().size()) fail("NegativeY", "one leaf value per leaf");
    for (const Vec& y : y_leaf) {
        if (static_cast<int>(y.size()) != d) fail("NegativeY", "leaf value dimension mismatch");
        for (double c : y)
            if (!(c >= -tol) || !std::isfinite(c)) fail("NegativeY", "leaf field must be >= 0");
    }

    Vec mean(d, 0.0);
    for (size_t p = 0; p < y_leaf.size(); ++p)
        for (int i = 0; i < d; ++i) mean[i] += tree.node(tree.leaves()[p]).prob * y_leaf[p][i];

    DualPair out;
    out.t = t;
    out.arbitrary.assign(d, 0);
    std::vector<Vec> dens(y_leaf.size(), Vec(d, 1.0));
    for (int i = 0; i < d; ++i) {
        if (mean[i] <= tol) {
            out.arbitrary[i] = 1;  // density stays the constant 1
            continue;
        }
        for (size_t p = 0; p < y_leaf.size(); ++p)
            dens[p][i] = std::max(y_leaf[p][i], 0.0) / mean[i];
    }
    out.q = VectorDensity::build(market.tree_ptr(), dens);

    const Subspace& m = market.eligible(t);
    if (v.size() != layer.size()) fail("OrthogonalV", "one weight per time-t node");
    for (size_t pos = 0; pos < layer.size(); ++pos) {
        Vec w(d, 0.0);
        for (int leaf : tree.leaves_under(layer[pos]))
            for (int i = 0; i < d; ++i)
                w[i] += tree.cond_prob(leaf, layer[pos]) * y_leaf[tree.layer_pos(leaf)][i];
        Vec pv = m.project(v[pos]);
        if (norm2(pv) <= tol)
            fail("OrthogonalV", "weight orthogonal to the eligible space at node " +
                                    node_name(tree, layer[pos]));
        Vec diff = m.project(w) - pv;
        if (norm2(diff) > tol * std::max(1.0, norm2(pv)))
            fail("OrthogonalV", "weight disagrees with E[Y|F_t] modulo the orthogonal "
                                "complement at node " +
                                    node_name(tree, layer[pos]));
        out.w.push_back(std::move(w));
    }
    return out;
}

std::vector<Vec> yv_from_qw(const DualPair& p) {
    const ScenarioTree& tree = *p.q.tree();
    const int d = tree.assets();
    std::vector<Vec> y(tree.leaves().size(), Vec(d, 0.0));
    for (size_t pos = 0; pos < tree.leaves().size(); ++pos) {
        int leaf = tree.leaves()[pos];
        int anc = tree.ancestor_at(leaf, p.t);
        Vec ratio = p.q.path_ratio(leaf, anc);
        for (int i = 0; i < d; ++i) y[pos][i] = p.w[tree.layer_pos(anc)][i] * ratio[i];
    }
    return y;
}

RandomSet conditional_halfspace(const DualPair& p, const AdaptedVector& x,
                                const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    AdaptedVector e = cond_expectation_Q(tree, x, p.q, p.t);
    const Subspace& m = market.eligible(p.t);
    RandomSet out;
    out.t = p.t;
    for (size_t pos = 0; pos < tree.at_time(p.t).size(); ++pos) {
        std::vector<Halfspace> hs = {{p.w[pos], dot(p.w[pos], e.values[pos])}};
        for (const Vec& c : m.complement_onb()) {
            hs.push_back({c, 0.0});
            hs.push_back({negate(c), 0.0});
        }
        out.values.push_back(Polyhedron::from_h(d, hs));
    }
    return out;
}

Vec min_penalty(const DualPair& p, const AcceptanceSet& a) {
    const ScenarioTree& tree = *a.tree_ptr();
    const int d = tree.assets();
    const auto& layer = tree.at_time(a.time());
    Vec beta(layer.size(), 0.0);
    for (size_t pos = 0; pos < layer.size(); ++pos) {
        Vec c(a.set().main_dim(), 0.0);
        for (int leaf : tree.leaves_under(layer[pos])) {
            Vec ratio = p.q.path_ratio(leaf, layer[pos]);
            double pr = tree.cond_prob(leaf, layer[pos]);
            for (int i = 0; i < d; ++i)
                c[tree.layer_pos(leaf) * d + i] = p.w[pos][i] * pr * ratio[i];
        }
        double v = a.set().support(c);
        if (v == kInf) fail("EmptyAcceptance", "penalty over an empty acceptance set");
        beta[pos] = v;
    }
    return beta;
}

bool certify_facet(const AcceptanceSet& a, const ConicalMarket& market, const AdaptedVector& x,
                   int node, const Vec& normal, double offset, double tol, DualPair* out) {
    const ScenarioTree& tree = *a.tree_ptr();
    const int d = tree.assets();
    const int t = a.time();
    const Subspace& m = market.eligible(t);
    Vec am = m.project(normal);
    double scale = norm_inf(am);
    if (scale <= 1e-9 * std::max(1.0, norm_inf(normal))) return false;

    std::vector<int> active;
    for (int i = 0; i < d; ++i) {
        if (am[i] > 1e-9 * scale) active.push_back(i);
        else if (am[i] < -1e-9 * scale) return false;  // outside the sampled dual family
        else am[i] = 0.0;
    }
    if (active.empty()) return false;

    std::vector<int> leaves = tree.leaves_under(node);
    const int L = static_cast<int>(leaves.size());
    const int na = static_cast<int>(active.size());
    const auto& rows_a = a.set().rows();
    const int nmu = static_cast<int>(rows_a.size());
    const int nrho = L * na;
    const int nv = nrho + nmu;
    const int D = a.set().main_dim();
    auto rho_of = [&](int lp, int ai) { return lp * na + ai; };

    std::vector<LpConstraint> cons;
    // Stationarity: sum_r mu_r row_r = c(rho) on every stacked and every
    // auxiliary coordinate.
    for (int j = 0; j < D + a.set().aux_dim(); ++j) {
        Vec v(nv, 0.0);
        bool nonzero = false;
        for (int r = 0; r < nmu; ++r) {
            v[nrho + r] = rows_a[r].a[j];
            nonzero = nonzero || rows_a[r].a[j] != 0.0;
        }
        if (j < D) {
            int p = j / d, i = j % d;
            auto it = std::find(leaves.begin(), leaves.end(), tree.leaves()[p]);
            auto ai = std::find(active.begin(), active.end(), i);
            if (it != leaves.end() && ai != active.end()) {
                double pr = tree.cond_prob(tree.leaves()[p], node);
                v[rho_of(static_cast<int>(it - leaves.begin()),
                         static_cast<int>(ai - active.begin()))] = -am[i] * pr;
                nonzero = true;
            }
        }
        if (nonzero) cons.push_back({std::move(v), Rel::Eq, 0.0});
    }
    for (int r = 0; r < nmu; ++r)
        if (rows_a[r].rel != Rel::Eq) {
            Vec v(nv, 0.0);
            v[nrho + r] = rows_a[r].rel == Rel::Ge ? 1.0 : -1.0;
            cons.push_back({std::move(v), Rel::Ge, 0.0});
        }
    for (int j = 0; j < nrho; ++j) {
        Vec v(nv, 0.0);
        v[j] = 1.0;
        cons.push_back({std::move(v), Rel::Ge, 0.0});
    }
    for (int ai = 0; ai < na; ++ai) {
        Vec v(nv, 0.0);
        for (int lp = 0; lp < L; ++lp) v[rho_of(lp, ai)] = tree.cond_prob(leaves[lp], node);
        cons.push_back({std::move(v), Rel::Eq, 1.0});
    }

    // Maximize mu.b + sum a_i P(l|g) rho (-X_i(l)).
    Vec obj(nv, 0.0);
    for (int r = 0; r < nmu; ++r) obj[nrho + r] = -rows_a[r].b;
    for (int lp = 0; lp < L; ++lp) {
        double pr = tree.cond_prob(leaves[lp], node);
        const Vec& xv = x.values[tree.layer_pos(leaves[lp])];
        for (int ai = 0; ai < na; ++ai)
            obj[rho_of(lp, ai)] = am[active[ai]] * pr * xv[active[ai]];
    }
    LpResult res = solve_lp(obj, cons);
    if (res.status != LpResult::Status::Optimal) return false;
    double achieved = -res.value;
    if (achieved < offset - tol * std::max(1.0, std::fabs(offset))) return false;

    if (out) {
        std::vector<Vec> dens(tree.leaves().size(), Vec(d, 1.0));
        for (int lp = 0; lp < L; ++lp)
            for (int ai = 0; ai < na; ++ai)
                dens[tree.layer_pos(leaves[lp])][active[ai]] =
                    std::max(res.x[rho_of(lp, ai)], 0.0);
        out->q = VectorDensity::build(market.tree_ptr(), dens);
        out->t = t;
        out->arbitrary.assign(d, 0);
        out->w.clear();
        for (int g : tree.at_time(t))
            out->w.push_back(g == node ? am : ones_weight(d));
    }
    return true;
}

DualReport verify_dual_representation(const RiskMeasure& r,
                                      const std::vector<AdaptedVector>& claims, int t,
                                      int n_pairs, Rng& rng, double tol) {
    auto acc_opt = r.acceptance(t);
    if (!acc_opt)
        fail("NotPolyhedral", "measure " + r.name() + " has no polyhedral acceptance set");
    const AcceptanceSet& acc = *acc_opt;
    const ConicalMarket& market = r.market();
    const ScenarioTree& tree = market.tree();
    const auto& layer = tree.at_time(t);
    const Subspace& m = market.eligible(t);

    DualReport rep;
    std::vector<DualPair> pairs = sample_dual_pairs(market, t, n_pairs, rng);
    rep.pairs_tested = static_cast<int>(pairs.size());
    std::vector<Vec> betas;
    for (const auto& p : pairs) betas.push_back(min_penalty(p, acc));

    for (const auto& x : claims) {
        RandomSet primal = r.evaluate(x, t);
        AdaptedVector loss = adapted_scale(-1.0, x);
        for (size_t pi = 0; pi < pairs.size(); ++pi) {
            AdaptedVector e = cond_expectation_Q(tree, loss, pairs[pi].q, t);
            for (size_t pos = 0; pos < layer.size() && rep.outer_holds; ++pos) {
                if (betas[pi][pos] == -kInf || primal.values[pos].is_empty()) continue;
                double rhs = betas[pi][pos] + dot(pairs[pi].w[pos], e.values[pos]);
                double s = support(primal.values[pos], pairs[pi].w[pos]);
                if (s < rhs - tol * std::max(1.0, std::fabs(rhs))) {
                    rep.outer_holds = false;
                    rep.outer_witness = "pair " + std::to_string(pi) + " at node " +
                                        node_name(tree, layer[pos]) + ": support " +
                                        std::to_string(s) + " < " + std::to_string(rhs);
                }
            }
        }
        for (size_t pos = 0; pos < layer.size(); ++pos) {
            if (primal.values[pos].is_empty()) continue;
            for (const auto& h : primal.values[pos].hrep()) {
                if (norm2(m.project(h.a)) <= 1e-9 * std::max(1.0, norm_inf(h.a)))
                    continue;  // eligibility row, not a facet
                FacetCertificate fc;
                fc.node = layer[pos];
                fc.normal = h.a;
                fc.offset = h.b;
                fc.certified = certify_facet(acc, market, x, layer[pos], h.a, h.b, tol, nullptr);
                ++rep.facets_total;
                if (fc.certified) ++rep.facets_certified;
                rep.facets.push_back(std::move(fc));
            }
        }
    }
    return rep;
}

PricingProcess cpp_from_pair(const DualPair& p, const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    PricingProcess out;
    out.tree = market.tree_ptr();
    out.z.assign(tree.node_count(), Vec(d, 0.0));
    std::vector<Vec> y = yv_from_qw(p);
    for (size_t pos = 0; pos < tree.leaves().size(); ++pos) out.z[tree.leaves()[pos]] = y[pos];
    for (int t = tree.horizon() - 1; t >= 0; --t)
        for (int g : tree.at_time(t)) {
            Vec v(d, 0.0);
            for (int h : tree.node(g).children) v = v + tree.node(h).q * out.z[h];
            out.z[g] = std::move(v);
        }
    auto defects = pricing_process_defects(out, market, p.t);
    if (!defects.empty()) fail("ConeViolation", defects.front());
    return out;
}

DualPair pair_from_cpp(const PricingProcess& z, int t, const ConicalMarket& market) {
    auto defects = pricing_process_defects(z, market, t);
    if (!defects.empty()) {
        bool cone = defects.front().find("dual solvency cone") != std::string::npos;
        fail(cone ? "ConeViolation" : "NotMartingale", defects.front());
    }
    const ScenarioTree& tree = market.tree();
    std::vector<Vec> y;
    for (int leaf : tree.leaves()) y.push_back(z.z[leaf]);
    std::vector<Vec> v;
    for (int g : tree.at_time(t)) v.push_back(z.z[g]);
    return qw_from_yv(market, y, v, t);
}

bool avar_dual_membership(const DualPair& p, const std::vector<Vec>& lambda,
                          const ConicalMarket& market) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const auto& layer = tree.at_time(p.t);
    const double tol = default_tols().num;
    if (lambda.size() != layer.size()) fail("BadLambda", "one lambda vector per time-t node");
    for (size_t pos = 0; pos < layer.size(); ++pos) {
        if (static_cast<int>(lambda[pos].size()) != d)
            fail("BadLambda", "lambda has wrong dimension");
        for (double l : lambda[pos])
            if (!(l > 0.0)) fail("BadLambda", "lambda entries must be positive");
        for (int leaf : tree.leaves_under(layer[pos])) {
            Vec ratio = p.q.path_ratio(leaf, layer[pos]);
            for (int i = 0; i < d; ++i)
                if (p.w[pos][i] * (1.0 / lambda[pos][i] - ratio[i]) <
                    -tol * std::max(1.0, std::fabs(p.w[pos][i])))
                    return false;
        }
    }
    return true;
}

std::vector<DualPair> sample_dual_pairs(const ConicalMarket& market, int t, int count, Rng& rng) {
    const ScenarioTree& tree = market.tree();
    const int d = tree.assets();
    const auto& layer = tree.at_time(t);
    const Subspace& m = market.eligible(t);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-0.5, 0.5);
    Vec plus_ray;
    {
        auto rays = m.positive_part().rays();
        plus_ray = rays.empty() ? Vec(d, 1.0) : rays.front();
        double s = norm_inf(plus_ray);
        if (s > 0.0) plus_ray = (1.0 / s) * plus_ray;
    }

    std::vector<DualPair> out;
    for (int rep = 0; rep < count; ++rep) {
        DualPair p;
        p.t = t;
        p.arbitrary.assign(d, 0);
        std::vector<Vec> dens(tree.leaves().size(), Vec(d, 0.0));
        for (int i = 0; i < d; ++i) {
            double mean = 0.0;
            Vec raw(tree.leaves().size());
            for (size_t lp = 0; lp < raw.size(); ++lp) {
                raw[lp] = -std::log(std::max(u01(rng), 1e-12));
                mean += tree.node(tree.leaves()[lp]).prob * raw[lp];
            }
            for (size_t lp = 0; lp < raw.size(); ++lp) dens[lp][i] = raw[lp] / mean;
        }
        p.q = VectorDensity::build(market.tree_ptr(), dens);
        for (size_t pos = 0; pos < layer.size(); ++pos) {
            Vec w(d, 0.0);
            for (int i = 0; i < d; ++i) w[i] = u01(rng);
            Vec skew(d, 0.0);
            for (const Vec& c : m.complement_onb()) skew = skew + sym(rng) * c;
            bool neg = false;
            for (int i = 0; i < d; ++i) neg = neg || w[i] + skew[i] < 0.0;
            if (!neg) w = w + skew;  // keep the coupling condition intact
            if (norm2(m.project(w)) <= 1e-8) w = w + plus_ray;
            p.w.push_back(std::move(w));
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace risktool
