#include "risktool/tree.hpp"

#include <algorithm>
#include <cmath>

namespace risktool {

ScenarioTree ScenarioTree::build(int T, int d, const std::vector<NodeSpec>& specs) {
    if (T < 1) fail("BadHorizon", "horizon must be at least 1");
    if (d < 1) fail("BadDimension", "asset count must be at least 1");

    ScenarioTree tr;
    tr.T_ = T;
    tr.d_ = d;
    tr.by_time_.resize(T + 1);

    std::map<std::string, const NodeSpec*> spec_by_id;
    for (const auto& s : specs) {
        if (s.id.empty()) fail("BadNodeId", "empty node id");
        if (!spec_by_id.emplace(s.id, &s).second) fail("DuplicateNode", "duplicate node id " + s.id);
        if (s.t < 0 || s.t > T) fail("BadTime", "node " + s.id + " outside [0, T]");
    }

    // Layer order is id order; this ordering is part of the data contract.
    std::vector<std::vector<const NodeSpec*>> layers(T + 1);
    for (const auto& [id, s] : spec_by_id) layers[s->t].push_back(s);

    if (layers[0].size() != 1) fail("BadRoot", "exactly one node must have t = 0");
    for (int t = 0; t <= T; ++t)
        if (layers[t].empty()) fail("NonUniformDepth", "no nodes at time " + std::to_string(t));

    for (int t = 0; t <= T; ++t) {
        for (const NodeSpec* s : layers[t]) {
            TreeNode n;
            n.id = s->id;
            n.t = t;
            n.q = s->q;
            if (t == 0) {
                if (s->parent && !s->parent->empty())
                    fail("BadRoot", "root node must not declare a parent");
                n.q = 1.0;
                n.prob = 1.0;
            } else {
                if (!s->parent || s->parent->empty())
                    fail("OrphanNode", "node " + s->id + " has no parent");
                auto it = tr.by_id_.find(*s->parent);
                if (it == tr.by_id_.end())
                    fail("OrphanNode", "node " + s->id + " references unknown parent " + *s->parent);
                const TreeNode& p = tr.nodes_[it->second];
                if (p.t != t - 1)
                    fail("NonUniformDepth",
                         "node " + s->id + " at time " + std::to_string(t) +
                             " must have its parent at time " + std::to_string(t - 1));
                if (!(s->q > 0.0))
                    fail("ZeroProbability", "branch probability of " + s->id + " must be positive");
                n.parent = it->second;
                n.prob = p.prob * s->q;
            }
            int idx = static_cast<int>(tr.nodes_.size());
            tr.by_id_.emplace(n.id, idx);
            tr.by_time_[t].push_back(idx);
            if (n.parent >= 0) tr.nodes_[n.parent].children.push_back(idx);
            tr.nodes_.push_back(std::move(n));
        }
    }

    const double tol = default_tols().prob;
    for (int t = 0; t < T; ++t) {
        for (int i : tr.by_time_[t]) {
            const TreeNode& n = tr.nodes_[i];
            if (n.children.empty())
                fail("NonUniformDepth", "node " + n.id + " has no successors before the horizon");
            double s = 0.0;
            for (int c : n.children) s += tr.nodes_[c].q;
            if (std::abs(s - 1.0) > tol)
                fail("ProbabilityMismatch",
                     "branch probabilities under " + n.id + " sum to " + std::to_string(s));
        }
    }

    tr.layer_pos_.resize(tr.nodes_.size());
    for (int t = 0; t <= T; ++t)
        for (int p = 0; p < static_cast<int>(tr.by_time_[t].size()); ++p)
            tr.layer_pos_[tr.by_time_[t][p]] = p;
    return tr;
}

int ScenarioTree::index_of(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? -1 : it->second;
}

int ScenarioTree::ancestor_at(int node, int s) const {
    int cur = node;
    while (nodes_[cur].t > s) cur = nodes_[cur].parent;
    if (nodes_[cur].t != s) fail("Internal", "ancestor_at below requested time");
    return cur;
}

std::vector<int> ScenarioTree::leaves_under(int node) const {
    std::vector<int> out;
    for (int leaf : by_time_[T_])
        if (is_descendant(leaf, node)) out.push_back(leaf);
    return out;
}

bool ScenarioTree::is_descendant(int node, int anc) const {
    int cur = node;
    while (cur >= 0) {
        if (cur == anc) return true;
        cur = nodes_[cur].parent;
    }
    return false;
}

double ScenarioTree::cond_prob(int node, int anc) const {
    double p = 1.0;
    int cur = node;
    while (cur != anc) {
        if (cur < 0) fail("Internal", "cond_prob called with a non-ancestor");
        p *= nodes_[cur].q;
        cur = nodes_[cur].parent;
    }
    return p;
}

AdaptedVector AdaptedVector::zero(const ScenarioTree& tree, int t) {
    AdaptedVector v;
    v.t = t;
    v.values.assign(tree.at_time(t).size(), Vec(tree.assets(), 0.0));
    return v;
}

AdaptedVector cond_expectation_P(const ScenarioTree& tree, const AdaptedVector& x, int t) {
    if (t > x.t) fail("TimeOrder", "conditioning time after observation time");
    // Peel one layer at a time; each value is the q-weighted child average.
    AdaptedVector cur = x;
    while (cur.t > t) {
        AdaptedVector up;
        up.t = cur.t - 1;
        for (int i : tree.at_time(up.t)) {
            const TreeNode& n = tree.node(i);
            Vec acc(tree.assets(), 0.0);
            for (int c : n.children) {
                const Vec& cv = cur.values[tree.layer_pos(c)];
                for (int k = 0; k < tree.assets(); ++k) acc[k] += tree.node(c).q * cv[k];
            }
            up.values.push_back(std::move(acc));
        }
        cur = std::move(up);
    }
    return cur;
}

AdaptedVector extend_to_leaves(const ScenarioTree& tree, const AdaptedVector& x) {
    AdaptedVector out;
    out.t = tree.horizon();
    for (int leaf : tree.leaves()) {
        int anc = tree.ancestor_at(leaf, x.t);
        out.values.push_back(x.values[tree.layer_pos(anc)]);
    }
    return out;
}

AdaptedVector adapted_add(const AdaptedVector& a, const AdaptedVector& b) {
    if (a.t != b.t || a.values.size() != b.values.size())
        fail("TimeMismatch", "adapted vectors live at different times");
    AdaptedVector out = a;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = out.values[i] + b.values[i];
    return out;
}

AdaptedVector adapted_scale(double s, const AdaptedVector& a) {
    AdaptedVector out = a;
    for (auto& v : out.values) v = s * v;
    return out;
}

VectorDensity VectorDensity::build(const TreePtr& tree, const std::vector<Vec>& leaf_values) {
    const ScenarioTree& tr = *tree;
    const int d = tr.assets();
    if (leaf_values.size() != tr.leaves().size())
        fail("DensityInvalid", "one leaf value per leaf required");
    for (const auto& v : leaf_values) {
        if (static_cast<int>(v.size()) != d) fail("DensityInvalid", "leaf density has wrong dimension");
        for (double x : v)
            if (!(x >= 0.0) || !std::isfinite(x)) fail("DensityInvalid", "densities must be >= 0");
    }
    const double tol = default_tols().prob;

    VectorDensity q;
    q.tree_ = tree;
    q.leaf_values_ = leaf_values;
    q.running_.assign(tr.node_count(), Vec(d, 0.0));
    q.xi_.assign(tr.node_count(), Vec(d, 1.0));

    for (size_t p = 0; p < leaf_values.size(); ++p)
        q.running_[tr.leaves()[p]] = leaf_values[p];
    for (int t = tr.horizon() - 1; t >= 0; --t) {
        for (int i : tr.at_time(t)) {
            Vec acc(d, 0.0);
            for (int c : tr.node(i).children)
                for (int k = 0; k < d; ++k) acc[k] += tr.node(c).q * q.running_[c][k];
            q.running_[i] = std::move(acc);
        }
    }
    for (int k = 0; k < d; ++k)
        if (std::abs(q.running_[tr.root()][k] - 1.0) > tol)
            fail("DensityInvalid", "each component density must average to 1");

    for (int i = 0; i < tr.node_count(); ++i) {
        const TreeNode& n = tr.node(i);
        if (n.parent < 0) continue;
        for (int k = 0; k < d; ++k) {
            double base = q.running_[n.parent][k];
            q.xi_[i][k] = base > tol ? q.running_[i][k] / base : 1.0;
        }
    }
    return q;
}

Vec VectorDensity::path_ratio(int leaf, int node) const {
    Vec r(tree_->assets(), 1.0);
    int cur = leaf;
    while (cur != node) {
        if (cur < 0) fail("Internal", "path_ratio called with a non-ancestor");
        for (int k = 0; k < tree_->assets(); ++k) r[k] *= xi_[cur][k];
        cur = tree_->node(cur).parent;
    }
    return r;
}

AdaptedVector cond_expectation_Q(const ScenarioTree& tree, const AdaptedVector& x,
                                 const VectorDensity& q, int t) {
    if (x.t != tree.horizon()) fail("TimeOrder", "Q-expectation expects a terminal payoff");
    // Backward one-step recursion through the xi ratios keeps the values
    // finite on null branches by construction.
    AdaptedVector cur = x;
    while (cur.t > t) {
        AdaptedVector up;
        up.t = cur.t - 1;
        for (int i : tree.at_time(up.t)) {
            Vec acc(tree.assets(), 0.0);
            for (int c : tree.node(i).children) {
                const Vec& cv = cur.values[tree.layer_pos(c)];
                const Vec& xi = q.xi(c);
                for (int k = 0; k < tree.assets(); ++k)
                    acc[k] += tree.node(c).q * xi[k] * cv[k];
            }
            up.values.push_back(std::move(acc));
        }
        cur = std::move(up);
    }
    return cur;
}

}  // namespace risktool
