#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "risktool/market.hpp"
#include "risktool/stacked.hpp"

namespace risktool {

/// Node-wise decomposition of a time-t set-valued object: one polyhedron in
/// ambient R^d per time-t node, each a subset of M_t.
struct RandomSet {
    int t = 0;
    std::vector<Polyhedron> values;  // layer order of at_time(t)
    /// Set when a constraint involving several subtrees failed: the whole
    /// function-space set is empty, not just single nodes.
    bool empty_everywhere = false;

    bool any_empty() const;
    bool all_empty() const;
};

bool random_set_subset(const RandomSet& a, const RandomSet& b, double tol);
bool random_set_equal(const RandomSet& a, const RandomSet& b, double tol);

/// Acceptance set at time t: claims (stacked coordinates) requiring no
/// compensation, with existential auxiliaries for structured forms.
class AcceptanceSet {
public:
    AcceptanceSet(TreePtr tree, int t, StackedSet set);

    const TreePtr& tree_ptr() const { return tree_; }
    int time() const { return t_; }
    const StackedSet& set() const { return set_; }

private:
    TreePtr tree_;
    int t_ = 0;
    StackedSet set_;
};

/// Violations of the acceptance-set contract: must contain some embedded
/// eligible portfolio, must not contain all of them, and must absorb L_+.
/// Empty result means the set is a valid acceptance set.
std::vector<std::string> acceptance_defects(const AcceptanceSet& a, const ConicalMarket& market);

/// Structured acceptance sets.
AcceptanceSet acceptance_worst_case(const ConicalMarket& market, int t);
/// Cone-sum form: all adapted sums of solvency-cone selections from t on.
AcceptanceSet acceptance_shp(const ConicalMarket& market, int t);
/// Average value at risk; lambda is node-indexed over time-t nodes.
AcceptanceSet acceptance_avar(const ConicalMarket& market, const std::vector<Vec>& lambda, int t);
/// User-supplied rows over stacked claim coordinates (no auxiliaries).
AcceptanceSet acceptance_from_rows(const TreePtr& tree, int t, std::vector<LpConstraint> rows);

/// The primal representation {u in M_t : X + u 1_subtree(g) in A}, one
/// polyhedron per time-t node, computed by projecting the substituted
/// constraint system onto each node's compensation variables.
RandomSet risk_from_acceptance(const AcceptanceSet& a, const AdaptedVector& claim,
                               const ConicalMarket& market);

/// {u in M_t : u >= -X componentwise on every leaf of the subtree}.
RandomSet worst_case(const AdaptedVector& claim, int t, const ConicalMarket& market);

/// Superhedging sets of the claim (portfolios from which X is reachable by
/// self-financing trading):  SHP_T = X + K_T,
/// SHP_t(g) = [intersection over successors of SHP_{t+1}] + K_t(g).
/// Index s of the result holds the time-s sets.  Always in M = R^d.
std::vector<RandomSet> shp(const AdaptedVector& claim, const ConicalMarket& market);

/// Set-valued average value at risk at time t via the acceptance projection.
/// market_compatible additionally sums the solvent eligible cone node-wise.
RandomSet avar(const AdaptedVector& claim, const std::vector<Vec>& lambda, int t,
               const ConicalMarket& market, bool market_compatible = false);

/// Node-wise geometric difference R(X) -. R(0).
RandomSet normalize(const RandomSet& at_claim, const RandomSet& at_zero);

/// Risk-measure interface consumed by the consistency and dual checkers.
/// evaluate() must honor the risk-measure sign convention: the value at X is
/// the set of eligible u making X + u acceptable.
class RiskMeasure {
public:
    virtual ~RiskMeasure() = default;
    virtual std::string name() const = 0;
    virtual const ConicalMarket& market() const = 0;
    virtual RandomSet evaluate(const AdaptedVector& claim, int t) const = 0;
    /// Polyhedral acceptance set when one exists; black-box measures decline.
    virtual std::optional<AcceptanceSet> acceptance(int t) const { return std::nullopt; }
};

/// Bijection direction A_{R_t}: the acceptance set of a structured measure.
/// Throws NotRepresentable when the measure cannot produce one.
AcceptanceSet acceptance_from_risk(const RiskMeasure& r, int t);

class WorstCaseMeasure : public RiskMeasure {
public:
    explicit WorstCaseMeasure(std::shared_ptr<const ConicalMarket> market);
    std::string name() const override { return "worst-case"; }
    const ConicalMarket& market() const override { return *market_; }
    RandomSet evaluate(const AdaptedVector& claim, int t) const override;
    std::optional<AcceptanceSet> acceptance(int t) const override;

private:
    std::shared_ptr<const ConicalMarket> market_;
};

/// Superhedging as a risk measure: the value at X is SHP(-X), the capital
/// sets covering the liability side of the claim.
class ShpMeasure : public RiskMeasure {
public:
    explicit ShpMeasure(std::shared_ptr<const ConicalMarket> market);
    std::string name() const override { return "shp"; }
    const ConicalMarket& market() const override { return *market_; }
    RandomSet evaluate(const AdaptedVector& claim, int t) const override;
    std::optional<AcceptanceSet> acceptance(int t) const override;

private:
    std::shared_ptr<const ConicalMarket> market_;
};

class AvarMeasure : public RiskMeasure {
public:
    /// lambda indexed by node id over the whole tree (marginal level used at
    /// the node's own time).  Entries must lie in (0, 1].
    AvarMeasure(std::shared_ptr<const ConicalMarket> market, std::vector<Vec> lambda_per_node,
                bool market_compatible = false);
    std::string name() const override;
    const ConicalMarket& market() const override { return *market_; }
    RandomSet evaluate(const AdaptedVector& claim, int t) const override;
    std::optional<AcceptanceSet> acceptance(int t) const override;
    const std::vector<Vec>& lambda() const { return lambda_; }
    bool market_compatible() const { return market_compatible_; }

private:
    std::vector<Vec> layer_lambda(int t) const;
    std::shared_ptr<const ConicalMarket> market_;
    std::vector<Vec> lambda_;
    bool market_compatible_ = false;
};

/// Measure defined by one acceptance set per time.
class AcceptanceFamilyMeasure : public RiskMeasure {
public:
    AcceptanceFamilyMeasure(std::shared_ptr<const ConicalMarket> market, std::string name,
                            std::vector<AcceptanceSet> per_time);
    std::string name() const override { return name_; }
    const ConicalMarket& market() const override { return *market_; }
    RandomSet evaluate(const AdaptedVector& claim, int t) const override;
    std::optional<AcceptanceSet> acceptance(int t) const override;

private:
    std::shared_ptr<const ConicalMarket> market_;
    std::string name_;
    std::vector<AcceptanceSet> per_time_;
};

struct AxiomCheck {
    std::string axiom;
    bool holds = true;
    std::string detail;  // witness description when failed
};

struct AxiomReport {
    std::vector<AxiomCheck> checks;
    bool all_hold() const;
    const AxiomCheck* find(const std::string& axiom) const;
};

/// Property tests of the risk-measure axioms and the optional structural
/// properties, on the given claims plus generated translates/perturbations.
/// Verdicts are "no counterexample found" over the finite family.
AxiomReport check_axioms(const RiskMeasure& r, const std::vector<AdaptedVector>& claims, int t,
                         Rng& rng, double tol);

}  // namespace risktool
