#pragma once

#include <vector>

#include "risktool/lp.hpp"
#include "risktool/tree.hpp"

namespace risktool {

/// Rows over stacked claim coordinates plus existential auxiliary variables.
/// Describes {x in R^n_main : exists y in R^n_aux, rows(x, y) hold}; the
/// representation of choice for acceptance sets, whose stacked dimension is
/// too large for generator enumeration.  Variable layout: main then aux.
class StackedSet {
public:
    StackedSet() = default;
    StackedSet(int n_main, int n_aux, std::vector<LpConstraint> rows);

    int main_dim() const { return n_main_; }
    int aux_dim() const { return n_aux_; }
    int total_dim() const { return n_main_ + n_aux_; }
    const std::vector<LpConstraint>& rows() const { return rows_; }

    bool feasible(Vec* witness = nullptr) const;
    /// Membership of a main-space point; auxiliaries are searched by LP.
    bool member(const Vec& x, double tol) const;
    /// Recession test: x + s*dir stays inside for every member x and s >= 0.
    bool recession_member(const Vec& dir, double tol) const;
    /// inf c.x over the set; -inf when unbounded, +inf when empty.
    double support(const Vec& c) const;
    /// Minimizer of c.x (main part); requires a bounded optimum.
    Vec argmin(const Vec& c) const;

private:
    int n_main_ = 0;
    int n_aux_ = 0;
    std::vector<LpConstraint> rows_;
};

StackedSet stacked_intersect(const StackedSet& a, const StackedSet& b);

/// Minkowski sum {x1 + x2 : x1 in a, x2 in b} with the split as auxiliaries.
StackedSet stacked_sum(const StackedSet& a, const StackedSet& b);

/// Containment a <= b up to tol, decided by projecting b's auxiliaries out
/// and testing each resulting facet against a's support function.
bool stacked_subset(const StackedSet& a, const StackedSet& b, double tol);

/// A point of a \ b (within tol), when one exists.
bool stacked_subset_witness(const StackedSet& a, const StackedSet& b, double tol, Vec* witness);

struct ProjectedRows {
    std::vector<LpConstraint> rows;  // over the kept variables only
    bool infeasible = false;
};

/// Fourier-Motzkin projection onto the first `keep` variables.  Equality rows
/// are consumed by Gaussian substitution where they touch eliminated
/// variables; every elimination step is followed by LP redundancy pruning.
/// Deterministic: fixed pivot and elimination order, canonical row sort.
ProjectedRows fm_project(int nvars, int keep, std::vector<LpConstraint> rows);

/// Claim layout: stacked coordinate of asset k at the leaf in layer position
/// p is p*d + k.
int stacked_dim(const ScenarioTree& tree);
Vec stack_claim(const ScenarioTree& tree, const AdaptedVector& x);
AdaptedVector unstack_claim(const ScenarioTree& tree, const Vec& stacked);

}  // namespace risktool
