#include "risktool/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace risktool {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Fails: return "fails";
        case Verdict::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(int i, int j) { parent[find(i)] = find(j); }
};

std::string node_name(const ScenarioTree& tree, int t, int pos) {
    return tree.node(tree.at_time(t)[pos]).id;
}

std::string vec_string(const Vec& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ',';
        os << v[k];
    }
    os << ')';
    return os.str();
}

std::string claim_string(const ScenarioTree& tree, const Vec& stacked) {
    const int d = tree.assets();
    std::ostringstream os;
    const auto& lv = tree.leaves();
    for (std::size_t i = 0; i < lv.size(); ++i) {
        if (i) os << ' ';
        Vec v(stacked.begin() + static_cast<long>(i) * d,
              stacked.begin() + static_cast<long>(i + 1) * d);
        os << tree.node(lv[i]).id << ':' << vec_string(v);
    }
    return os.str();
}

std::string selection_string(const ScenarioTree& tree, const AdaptedVector& z) {
    std::ostringstream os;
    const auto& layer = tree.at_time(z.t);
    for (std::size_t j = 0; j < layer.size(); ++j) {
        if (j) os << ' ';
        os << tree.node(layer[j]).id << ':' << vec_string(z.values[j]);
    }
    return os.str();
}

/// Vertices, or a single feasible anchor when the set has none (a shifted
/// subspace).  Empty result only for the empty set.
std::vector<Vec> probe_points(const Polyhedron& p) {
    if (p.is_empty() || !p.vertices().empty()) return p.vertices();
    std::vector<LpConstraint> cons;
    for (const auto& h : p.hrep()) cons.push_back({h.a, Rel::Ge, h.b});
    Vec pt;
    if (lp_feasible(p.dim(), cons, &pt)) return {pt};
    return {};
}

bool node_set_equal(const RandomSet& a, const RandomSet& b, double tol, std::size_t* bad) {
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (!set_equal(a.values[i], b.values[i], tol)) {
            if (bad) *bad = i;
            return false;
        }
    return true;
}

}  // namespace

StackedSet one_step_restriction(const AcceptanceSet& a_t, const ConicalMarket& market) {
    const ScenarioTree& tree = *a_t.tree_ptr();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const int t1 = a_t.time() + 1;
    if (t1 > tree.horizon()) fail("BadTime", "one-step restriction needs a next period");
    const StackedSet& base = a_t.set();
    const int total = D + base.aux_dim();
    std::vector<LpConstraint> rows = base.rows();
    for (int h : tree.at_time(t1)) {
        const auto lv = tree.leaves_under(h);
        const int p0 = tree.layer_pos(lv[0]) * d;
        // measurable at t+1: constant across the leaves below each node
        for (std::size_t j = 1; j < lv.size(); ++j)
            for (int k = 0; k < d; ++k) {
                LpConstraint c;
                c.a.assign(total, 0.0);
                c.rel = Rel::Eq;
                c.a[tree.layer_pos(lv[j]) * d + k] = 1.0;
                c.a[p0 + k] = -1.0;
                rows.push_back(std::move(c));
            }
        // values in M_{t+1}
        for (const Vec& cb : market.eligible(t1).complement_onb()) {
            LpConstraint c;
            c.a.assign(total, 0.0);
            c.rel = Rel::Eq;
            for (int k = 0; k < d; ++k) c.a[p0 + k] = cb[k];
            rows.push_back(std::move(c));
        }
    }
    return StackedSet(D, base.aux_dim(), std::move(rows));
}

ConsistencyReport check_acceptance_decomposition(const AcceptanceSet& a_t,
                                                 const AcceptanceSet& a_t1,
                                                 const ConicalMarket& market) {
    const ScenarioTree& tree = *a_t.tree_ptr();
    const int t = a_t.time();
    if (a_t1.time() != t + 1) fail("BadTime", "decomposition needs consecutive acceptance sets");
    ConsistencyReport rep;
    rep.property = "acceptance-decomposition";
    const bool nested = market.eligible(t).subspace_of(market.eligible(t + 1), default_tols().num);
    rep.hypotheses.push_back({"eligible-nested", nested});
    if (!nested)
        fail("HypothesisViolated", "eligible space at time " + std::to_string(t) +
                                       " is not contained in the next one");
    const StackedSet sum = stacked_sum(a_t1.set(), one_step_restriction(a_t, market));
    const double tol = default_tols().geo;
    Vec w;
    if (!stacked_subset_witness(a_t.set(), sum, tol, &w)) {
        rep.verdict = Verdict::Fails;
        rep.witness = "accepted at time " + std::to_string(t) +
                      " but not decomposable: " + claim_string(tree, w);
    } else if (!stacked_subset_witness(sum, a_t.set(), tol, &w)) {
        rep.verdict = Verdict::Fails;
        rep.witness = "decomposable but not accepted at time " + std::to_string(t) + ": " +
                      claim_string(tree, w);
    }
    return rep;
}

ConsistencyReport check_recursion(const RiskMeasure& r, const std::vector<AdaptedVector>& claims,
                                  int t, Rng& rng) {
    const ConicalMarket& market = r.market();
    const ScenarioTree& tree = market.tree();
    ConsistencyReport rep;
    rep.property = "recursion";
    if (t < 0 || t + 1 > tree.horizon()) {
        rep.verdict = Verdict::NotApplicable;
        rep.note = "needs two consecutive periods";
        return rep;
    }
    const double tol = default_tols().geo;
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const auto& layer0 = tree.at_time(t);
    const auto& layer1 = tree.at_time(t + 1);
    const int nU = static_cast<int>(layer0.size());
    const int nZ = static_cast<int>(layer1.size());
    const auto acc = r.acceptance(t);
    const bool partial = !acc.has_value();
    if (partial) rep.note = "NotPolyhedral: only the union-inside-R_t direction was checked";
    constexpr long kExhaustiveCap = 10000;
    constexpr int kSampled = 64;
    long selections = 0;
    int vertex_lps = 0;

    // leaf position -> ancestor layer positions at t and t+1
    std::vector<int> anc0(tree.leaves().size()), anc1(tree.leaves().size());
    for (std::size_t li = 0; li < tree.leaves().size(); ++li) {
        anc0[li] = tree.layer_pos(tree.ancestor_at(tree.leaves()[li], t));
        anc1[li] = tree.layer_pos(tree.ancestor_at(tree.leaves()[li], t + 1));
    }

    for (std::size_t ci = 0; ci < claims.size(); ++ci) {
        const AdaptedVector& X = claims[ci];
        const RandomSet rt = r.evaluate(X, t);
        const RandomSet rt1 = r.evaluate(X, t + 1);

        bool any_empty1 = rt1.empty_everywhere;
        for (const auto& p : rt1.values) any_empty1 = any_empty1 || p.is_empty();
        if (any_empty1) {
            // the union over selections is empty, so R_t must be empty too
            for (int gi = 0; gi < nU; ++gi)
                if (!rt.values[gi].is_empty()) {
                    rep.verdict = Verdict::Fails;
                    rep.witness = "claim " + std::to_string(ci) +
                                  ": next-period value empty somewhere yet R_t nonempty at node " +
                                  node_name(tree, t, gi);
                    return rep;
                }
            continue;
        }

        std::vector<std::vector<Vec>> pts(layer1.size());
        long total = 1;
        for (std::size_t j = 0; j < layer1.size(); ++j) {
            pts[j] = probe_points(rt1.values[j]);
            if (pts[j].empty()) total = 0;
            if (total > 0)
                total = std::min<long>(kExhaustiveCap + 1,
                                       total * static_cast<long>(pts[j].size()));
        }

        auto run_selection = [&](const std::vector<int>& pick) -> bool {
            AdaptedVector z;
            z.t = t + 1;
            z.values.resize(layer1.size());
            for (std::size_t j = 0; j < layer1.size(); ++j) z.values[j] = pts[j][pick[j]];
            const AdaptedVector minus = adapted_scale(-1.0, extend_to_leaves(tree, z));
            const RandomSet rz = r.evaluate(minus, t);
            ++selections;
            for (int gi = 0; gi < nU; ++gi)
                if (!subset(rz.values[gi], rt.values[gi], tol)) {
                    rep.verdict = Verdict::Fails;
                    rep.witness = "claim " + std::to_string(ci) + ": R_t(-Z) escapes R_t(X) at node " +
                                  node_name(tree, t, gi) + " for Z = " + selection_string(tree, z);
                    return false;
                }
            return true;
        };

        if (total == 0) {
            // no probe point somewhere; the selection direction is vacuous
        } else if (total <= kExhaustiveCap) {
            std::vector<int> pick(layer1.size(), 0);
            for (;;) {
                if (!run_selection(pick)) return rep;
                std::size_t j = 0;
                while (j < pick.size()) {
                    if (++pick[j] < static_cast<int>(pts[j].size())) break;
                    pick[j] = 0;
                    ++j;
                }
                if (j == pick.size()) break;
            }
        } else {
            std::vector<int> pick(layer1.size());
            for (int s = 0; s < kSampled; ++s) {
                for (std::size_t j = 0; j < layer1.size(); ++j)
                    pick[j] = static_cast<int>(rng() % pts[j].size());
                if (!run_selection(pick)) return rep;
            }
        }

        if (partial) continue;

        // reverse direction: each vertex of R_t(X)(g) must be reachable from
        // some adapted selection, decided by one feasibility LP in the
        // variables [Z blocks | acceptance auxiliaries | other compensations]
        const StackedSet& S = acc->set();
        const int naux = S.aux_dim();
        const int nvar = nZ * d + naux + nU * d;
        const auto zoff = [&](int j, int k) { return j * d + k; };
        const auto aoff = [&](int j) { return nZ * d + j; };
        const auto uoff = [&](int g, int k) { return nZ * d + naux + g * d + k; };

        UnionFind uf(nU + nZ + naux);
        std::vector<LpConstraint> srows;
        std::vector<int> scomp;  // -1: constant row, kept everywhere
        auto push_tagged = [&](LpConstraint c, const std::vector<int>& elems) {
            for (std::size_t i = 1; i < elems.size(); ++i) uf.unite(elems[0], elems[i]);
            srows.push_back(std::move(c));
            scomp.push_back(elems.empty() ? -1 : elems[0]);
        };
        for (const auto& row : S.rows()) {
            LpConstraint c;
            c.a.assign(nvar, 0.0);
            c.rel = row.rel;
            c.b = row.b;
            std::vector<int> elems;
            for (std::size_t li = 0; li < tree.leaves().size(); ++li) {
                bool touched = false;
                for (int k = 0; k < d; ++k) {
                    const double v = row.a[static_cast<int>(li) * d + k];
                    if (v == 0.0) continue;
                    c.a[zoff(anc1[li], k)] -= v;
                    c.a[uoff(anc0[li], k)] += v;
                    touched = true;
                }
                if (touched) {
                    elems.push_back(anc0[li]);
                    elems.push_back(nU + anc1[li]);
                }
            }
            for (int j = 0; j < naux; ++j) {
                const double v = row.a[D + j];
                if (v == 0.0) continue;
                c.a[aoff(j)] = v;
                elems.push_back(nU + nZ + j);
            }
            std::sort(elems.begin(), elems.end());
            elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
            push_tagged(std::move(c), elems);
        }
        // compensations live in the eligible space
        for (int g = 0; g < nU; ++g)
            for (const Vec& cb : market.eligible(t).complement_onb()) {
                LpConstraint c;
                c.a.assign(nvar, 0.0);
                c.rel = Rel::Eq;
                for (int k = 0; k < d; ++k) c.a[uoff(g, k)] = cb[k];
                push_tagged(std::move(c), {g});
            }
        // selections stay inside the next-period value
        for (int j = 0; j < nZ; ++j)
            for (const auto& h : rt1.values[j].hrep()) {
                LpConstraint c;
                c.a.assign(nvar, 0.0);
                c.rel = Rel::Ge;
                c.b = h.b;
                for (int k = 0; k < d; ++k) c.a[zoff(j, k)] = h.a[k];
                push_tagged(std::move(c), {nU + j});
            }

        for (int gi = 0; gi < nU; ++gi) {
            const int root = uf.find(gi);
            for (const Vec& u : probe_points(rt.values[gi])) {
                ++vertex_lps;
                std::vector<LpConstraint> cons;
                for (std::size_t ri = 0; ri < srows.size(); ++ri) {
                    if (scomp[ri] != -1 && uf.find(scomp[ri]) != root) continue;
                    LpConstraint c = srows[ri];
                    for (int k = 0; k < d; ++k) {
                        const double v = c.a[uoff(gi, k)];
                        if (v == 0.0) continue;
                        c.b -= v * u[k];
                        c.a[uoff(gi, k)] = 0.0;
                    }
                    cons.push_back(std::move(c));
                }
                if (!lp_feasible(nvar, cons)) {
                    rep.verdict = Verdict::Fails;
                    rep.witness = "claim " + std::to_string(ci) + ": vertex " + vec_string(u) +
                                  " of R_t(X) at node " + node_name(tree, t, gi) +
                                  " is not covered by any next-period selection";
                    return rep;
                }
            }
        }
    }
    {
        std::ostringstream os;
        if (!rep.note.empty()) os << rep.note << "; ";
        os << selections << " selections, " << vertex_lps << " vertex LPs";
        rep.note = os.str();
    }
    return rep;
}

ConsistencyReport check_time_consistency(const RiskMeasure& r,
                                         const std::vector<AdaptedVector>& claims, int t,
                                         Rng& rng) {
    const ScenarioTree& tree = r.market().tree();
    ConsistencyReport rep;
    rep.property = "time-consistency";
    if (t < 0 || t + 1 > tree.horizon()) {
        rep.verdict = Verdict::NotApplicable;
        rep.note = "needs two consecutive periods";
        return rep;
    }
    const double tol = default_tols().geo;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<AdaptedVector> pool = claims;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        AdaptedVector bumped = claims[i];
        for (auto& v : bumped.values)
            for (auto& x : v) x += u01(rng);
        pool.push_back(std::move(bumped));
        pairs.emplace_back(i, claims.size() + i);
    }
    for (std::size_t i = 0; i < claims.size(); ++i)
        for (std::size_t j = 0; j < claims.size(); ++j)
            if (i != j) pairs.emplace_back(i, j);

    int premise_held = 0;
    for (const auto& [xi, yi] : pairs) {
        const RandomSet rx1 = r.evaluate(pool[xi], t + 1);
        const RandomSet ry1 = r.evaluate(pool[yi], t + 1);
        if (!random_set_subset(rx1, ry1, tol)) continue;
        ++premise_held;
        const RandomSet rx0 = r.evaluate(pool[xi], t);
        const RandomSet ry0 = r.evaluate(pool[yi], t);
        for (std::size_t gi = 0; gi < rx0.values.size(); ++gi)
            if (!subset(rx0.values[gi], ry0.values[gi], tol)) {
                rep.verdict = Verdict::Fails;
                rep.witness = "pair (" + std::to_string(xi) + "," + std::to_string(yi) +
                              "): containment at time " + std::to_string(t + 1) +
                              " holds but fails at node " +
                              node_name(tree, t, static_cast<int>(gi));
                rep.note = std::to_string(premise_held) + " of " + std::to_string(pairs.size()) +
                           " pairs satisfied the premise";
                return rep;
            }
    }
    rep.note = std::to_string(premise_held) + " of " + std::to_string(pairs.size()) +
               " pairs satisfied the premise";
    if (premise_held == 0) {
        rep.verdict = Verdict::NotApplicable;
        rep.note += "; nothing to conclude";
    }
    return rep;
}

AcceptanceFamilyMeasure compose_backward(
    const std::vector<std::shared_ptr<const RiskMeasure>>& family,
    std::shared_ptr<const ConicalMarket> market) {
    const ScenarioTree& tree = market->tree();
    const int T = tree.horizon();
    if (static_cast<int>(family.size()) != T + 1)
        fail("BadTime", "backward composition needs one one-step measure per time");
    for (int t = 0; t + 1 <= T; ++t)
        if (!market->eligible(t).subspace_of(market->eligible(t + 1), default_tols().num))
            fail("HypothesisViolated", "eligible space at time " + std::to_string(t) +
                                           " is not contained in the next one");
    const auto accT = family[T]->acceptance(T);
    if (!accT)
        fail("NotPolyhedral",
             "backward composition needs acceptance sets; " + family[T]->name() + " has none");
    std::vector<AcceptanceSet> rev;
    rev.push_back(*accT);
    for (int t = T - 1; t >= 0; --t) {
        const auto at = family[t]->acceptance(t);
        if (!at)
            fail("NotPolyhedral",
                 "backward composition needs acceptance sets; " + family[t]->name() + " has none");
        rev.emplace_back(at->tree_ptr(), t,
                         stacked_sum(rev.back().set(), one_step_restriction(*at, *market)));
    }
    std::vector<AcceptanceSet> per_time(rev.rbegin(), rev.rend());
    bool same = true;
    for (const auto& m : family) same = same && m->name() == family[0]->name();
    const std::string name = same ? "composed-" + family[0]->name() : "composed";
    return AcceptanceFamilyMeasure(std::move(market), name, std::move(per_time));
}

ConsistencyReport check_normalization_of_composition(
    const std::vector<std::shared_ptr<const RiskMeasure>>& family, const RiskMeasure& composed,
    const std::vector<AdaptedVector>& claims, Rng& rng) {
    const ConicalMarket& market = composed.market();
    const ScenarioTree& tree = market.tree();
    const int T = tree.horizon();
    const double tol = default_tols().geo;
    ConsistencyReport rep;
    rep.property = "composition-normalization";
    const AdaptedVector zero = AdaptedVector::zero(tree, T);

    // case (i): every one-step value at zero is the eligible orthant
    bool case_i = true;
    for (int t = 0; t <= T && case_i; ++t) {
        const RandomSet r0 = family[t]->evaluate(zero, t);
        const Polyhedron mplus = market.eligible(t).positive_part();
        for (const auto& p : r0.values) case_i = case_i && set_equal(p, mplus, tol);
    }
    rep.hypotheses.push_back({"one-step-values-at-zero-are-eligible-orthants", case_i});
    if (!case_i) {
        bool tc = true;
        for (int t = 0; t + 1 <= T && tc; ++t)
            tc = check_time_consistency(composed, claims, t, rng).verdict != Verdict::Fails;
        rep.hypotheses.push_back({"composition-time-consistent", tc});
        if (!tc) {
            rep.verdict = Verdict::NotApplicable;
            rep.note = "neither hypothesis route applies";
            return rep;
        }
    }

    // conical acceptance rows make value scaling exact, enabling the
    // degenerate-value trichotomy below
    bool coherent = true;
    for (int t = 0; t <= T; ++t) {
        const auto a = composed.acceptance(t);
        if (!a) {
            coherent = false;
            break;
        }
        for (const auto& row : a->set().rows()) coherent = coherent && std::fabs(row.b) < 1e-12;
    }

    int degenerate_nodes = 0;
    for (int t = 0; t <= T; ++t) {
        const RandomSet r0 = composed.evaluate(zero, t);
        const Polyhedron m_t = market.eligible(t).as_polyhedron();
        std::vector<RandomSet> rxs;
        rxs.reserve(claims.size());
        for (const auto& x : claims) rxs.push_back(composed.evaluate(x, t));
        for (const auto& rx : rxs) {
            for (std::size_t gi = 0; gi < rx.values.size(); ++gi) {
                const Polyhedron sum = minkowski_sum(rx.values[gi], r0.values[gi]);
                if (!set_equal(sum, rx.values[gi], tol)) {
                    rep.verdict = Verdict::Fails;
                    rep.witness = "adding the value at zero changes the value at time " +
                                  std::to_string(t) + ", node " +
                                  node_name(tree, t, static_cast<int>(gi));
                    return rep;
                }
            }
        }
        if (!coherent) continue;
        for (std::size_t gi = 0; gi < r0.values.size(); ++gi) {
            const bool degenerate = r0.values[gi].is_empty() || set_equal(r0.values[gi], m_t, tol);
            if (!degenerate) continue;
            ++degenerate_nodes;
            for (const auto& rx : rxs) {
                const Polyhedron& v = rx.values[gi];
                if (!v.is_empty() && !set_equal(v, m_t, tol)) {
                    rep.verdict = Verdict::Fails;
                    rep.witness = "value at zero is degenerate at time " + std::to_string(t) +
                                  ", node " + node_name(tree, t, static_cast<int>(gi)) +
                                  " but a claim value is a proper subset of the eligible space";
                    return rep;
                }
            }
        }
    }
    rep.note = coherent ? "conical composition; " + std::to_string(degenerate_nodes) +
                              " degenerate nodes checked against the trichotomy"
                        : "not conical; trichotomy skipped";
    return rep;
}

ConsistencyReport check_market_compat_decomposition(const RiskMeasure& r,
                                                    const std::vector<AdaptedVector>& claims,
                                                    int t, Rng&) {
    const ConicalMarket& market = r.market();
    const ScenarioTree& tree = market.tree();
    const int T = tree.horizon();
    const int d = tree.assets();
    const int D = stacked_dim(tree);
    const double tol = default_tols().geo;
    ConsistencyReport rep;
    rep.property = "market-compat-decomposition";
    if (!market.eligible_nested()) {
        rep.hypotheses.push_back({"eligible-nested", false});
        fail("HypothesisViolated", "eligible spaces are not nested");
    }
    rep.hypotheses.push_back({"eligible-nested", true});
    const auto acc = r.acceptance(t);
    if (!acc) fail("NotPolyhedral", r.name() + " exposes no acceptance set");

    // lemma hypothesis: the measure is normalized
    const AdaptedVector zero = AdaptedVector::zero(tree, T);
    const RandomSet r0 = r.evaluate(zero, t);
    bool normalized = true;
    for (const auto& x : claims) {
        const RandomSet rx = r.evaluate(x, t);
        for (std::size_t gi = 0; gi < rx.values.size() && normalized; ++gi)
            normalized = set_equal(minkowski_sum(rx.values[gi], r0.values[gi]), rx.values[gi], tol);
        if (!normalized) break;
    }
    rep.hypotheses.push_back({"normalized", normalized});
    if (!normalized) fail("HypothesisViolated", r.name() + " is not normalized on the claim family");

    // lemma hypothesis: stepwise acceptance decomposition
    bool stepwise = true;
    for (int s = t; s + 1 <= T && stepwise; ++s) {
        const auto as = r.acceptance(s);
        const auto as1 = r.acceptance(s + 1);
        if (!as || !as1) fail("NotPolyhedral", r.name() + " exposes no acceptance set");
        stepwise = check_acceptance_decomposition(*as, *as1, market).verdict == Verdict::Holds;
    }
    rep.hypotheses.push_back({"stepwise-decomposition", stepwise});
    if (!stepwise)
        fail("HypothesisViolated", r.name() + " does not satisfy the stepwise decomposition");

    // adapted sums of solvent eligible cones from t through the horizon
    std::vector<int> block_of_node(tree.node_count(), -1);
    int nblocks = 0;
    for (int s = t; s <= T; ++s)
        for (int h : tree.at_time(s)) block_of_node[h] = nblocks++;
    std::vector<LpConstraint> crows;
    for (std::size_t li = 0; li < tree.leaves().size(); ++li) {
        const int leaf = tree.leaves()[li];
        for (int k = 0; k < d; ++k) {
            LpConstraint c;
            c.a.assign(D + nblocks * d, 0.0);
            c.rel = Rel::Eq;
            c.a[static_cast<int>(li) * d + k] = 1.0;
            for (int s = t; s <= T; ++s)
                c.a[D + block_of_node[tree.ancestor_at(leaf, s)] * d + k] -= 1.0;
            crows.push_back(std::move(c));
        }
    }
    for (int s = t; s <= T; ++s)
        for (int h : tree.at_time(s))
            for (const auto& hs : market.solvent_eligible_cone(h).hrep()) {
                LpConstraint c;
                c.a.assign(D + nblocks * d, 0.0);
                c.rel = Rel::Ge;
                c.b = hs.b;
                for (int k = 0; k < d; ++k) c.a[D + block_of_node[h] * d + k] = hs.a[k];
                crows.push_back(std::move(c));
            }
    const StackedSet cone_sums(D, nblocks * d, std::move(crows));
    const StackedSet sum = stacked_sum(acc->set(), cone_sums);

    Vec w;
    if (!stacked_subset_witness(sum, acc->set(), tol, &w)) {
        rep.verdict = Verdict::Fails;
        rep.witness = "acceptance does not absorb the eligible cone sums: " + claim_string(tree, w);
    } else if (!stacked_subset_witness(acc->set(), sum, tol, &w)) {
        rep.verdict = Verdict::Fails;
        rep.witness = "acceptance escapes its own cone-sum hull: " + claim_string(tree, w);
    }

    // cross-check against node-wise cone absorption of the values
    bool absorbed = true;
    for (const auto& x : claims) {
        const RandomSet rx = r.evaluate(x, t);
        for (std::size_t gi = 0; gi < rx.values.size() && absorbed; ++gi) {
            const Polyhedron& km = market.solvent_eligible_cone(tree.at_time(t)[gi]);
            absorbed = set_equal(minkowski_sum(rx.values[gi], km), rx.values[gi], tol);
        }
        if (!absorbed) break;
    }
    rep.note = std::string("node-wise cone absorption of the values: ") +
               (absorbed ? "holds" : "fails");
    if (rep.verdict == Verdict::Holds && !absorbed)
        rep.note += "; INCONSISTENT with the acceptance-level verdict";
    return rep;
}

}  // namespace risktool
