#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "risktool/common.hpp"

namespace risktool {

struct NodeSpec {
    std::string id;
    std::optional<std::string> parent;  // empty for the root
    int t = 0;
    double q = 1.0;  // conditional branch probability given the parent
};

struct TreeNode {
    std::string id;
    int parent = -1;
    int t = 0;
    double q = 1.0;
    double prob = 1.0;  // unconditional
    std::vector<int> children;
};

/// Finite scenario tree with horizon T and d assets.  Nodes are indexed
/// 0..n-1; within each time layer they are ordered by id, which fixes the
/// coordinate layout of every stacked object downstream.
class ScenarioTree {
public:
    static ScenarioTree build(int T, int d, const std::vector<NodeSpec>& nodes);

    int horizon() const { return T_; }
    int assets() const { return d_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int i) const { return nodes_[i]; }
    const std::vector<int>& at_time(int t) const { return by_time_[t]; }
    const std::vector<int>& leaves() const { return by_time_[T_]; }
    int root() const { return by_time_[0][0]; }
    int index_of(const std::string& id) const;  // -1 when unknown

    /// Ancestor of `node` at time s <= t(node).
    int ancestor_at(int node, int s) const;
    /// Leaves below `node` (the node itself at time T), in layer order.
    std::vector<int> leaves_under(int node) const;
    bool is_descendant(int node, int anc) const;
    /// Position of `node` inside at_time(t(node)).
    int layer_pos(int node) const { return layer_pos_[node]; }
    /// P(node | anc) for anc an ancestor.
    double cond_prob(int node, int anc) const;

private:
    int T_ = 0, d_ = 0;
    std::vector<TreeNode> nodes_;
    std::vector<std::vector<int>> by_time_;
    std::vector<int> layer_pos_;
    std::map<std::string, int> by_id_;
};

using TreePtr = std::shared_ptr<const ScenarioTree>;

/// Vector payoffs observed at one time: one R^d value per time-t node, laid
/// out in the layer order of the tree.
struct AdaptedVector {
    int t = 0;
    std::vector<Vec> values;

    static AdaptedVector zero(const ScenarioTree& tree, int t);
    const Vec& at_pos(int pos) const { return values[pos]; }
};

/// E[X | F_t] computed layer by layer.
AdaptedVector cond_expectation_P(const ScenarioTree& tree, const AdaptedVector& x, int t);

/// Constant extension of an intermediate-time payoff to the leaves.
AdaptedVector extend_to_leaves(const ScenarioTree& tree, const AdaptedVector& x);

AdaptedVector adapted_add(const AdaptedVector& a, const AdaptedVector& b);
AdaptedVector adapted_scale(double s, const AdaptedVector& a);

/// Componentwise change of measure dQ_i/dP given by its leaf values.
/// One-step transition ratios are derived once; along branches where the
/// running conditional density vanishes the ratio is set to 1, which keeps
/// conditional expectations finite and well defined everywhere.
class VectorDensity {
public:
    static VectorDensity build(const TreePtr& tree, const std::vector<Vec>& leaf_values);

    const TreePtr& tree() const { return tree_; }
    const Vec& at_leaf_pos(int pos) const { return leaf_values_[pos]; }
    /// E[dQ/dP | F_t] at a node.
    const Vec& running(int node) const { return running_[node]; }
    /// One-step ratio at a non-root node.
    const Vec& xi(int node) const { return xi_[node]; }
    /// Product of one-step ratios from `node` (exclusive) down to a leaf.
    Vec path_ratio(int leaf, int node) const;

private:
    TreePtr tree_;
    std::vector<Vec> leaf_values_;
    std::vector<Vec> running_;  // node-indexed
    std::vector<Vec> xi_;       // node-indexed, identity at the root
};

/// E^Q[X | F_t] under a componentwise change of measure.
AdaptedVector cond_expectation_Q(const ScenarioTree& tree, const AdaptedVector& x,
                                 const VectorDensity& q, int t);

}  // namespace risktool
