#pragma once

#include <string>
#include <vector>

#include "risktool/riskmeasure.hpp"

namespace risktool {

/// Dual variable of a set-valued measure at time t: a componentwise change
/// of measure together with one weight vector per time-t node.  The weight
/// lives in the dual cone of (M_t)_+ and must not be orthogonal to M_t; the
/// coupling condition keeps diag(w) times the conditional density ratios
/// nonnegative leaf-wise.
struct DualPair {
    VectorDensity q;
    std::vector<Vec> w;  // layer order of at_time(t)
    int t = 0;
    /// Components whose construction left the density unconstrained
    /// (zero-mass assets); round-trip identities skip them.
    std::vector<char> arbitrary;
};

/// Violated validity conditions; empty means the pair is valid.
std::vector<std::string> dual_pair_defects(const DualPair& p, const ConicalMarket& market);

/// Adapted d-vector process, one value per node.  Valid as a consistent
/// pricing process from time t on when it is a P-martingale and each value
/// lies in the dual of the node's solvency cone, away from zero.
struct PricingProcess {
    TreePtr tree;
    std::vector<Vec> z;  // node-indexed
};

std::vector<std::string> pricing_process_defects(const PricingProcess& p,
                                                 const ConicalMarket& market, int from_t);

/// Forward transform: w = E[Y|F_t] node-wise and density_i = Y_i / E[Y_i]
/// per asset.  Zero-mass assets get the constant density and an `arbitrary`
/// flag.  v must agree with w modulo the orthogonal complement of M_t and
/// must not itself be orthogonal to M_t.
DualPair qw_from_yv(const ConicalMarket& market, const std::vector<Vec>& y_leaf,
                    const std::vector<Vec>& v, int t);

/// Reverse transform: leaf field Y_i = w_i(anc) * conditional density ratio.
std::vector<Vec> yv_from_qw(const DualPair& p);

/// Node-wise (E^Q[X|F_t](g) + {x : w(g).x >= 0}) intersected with M_t.
RandomSet conditional_halfspace(const DualPair& p, const AdaptedVector& x,
                                const ConicalMarket& market);

/// Node-wise minimal penalty offset beta(g) = inf_{Z in A} w(g).E^Q[Z|F_t](g).
/// -inf marks the improper (whole-space) halfspace.  Throws EmptyAcceptance.
Vec min_penalty(const DualPair& p, const AcceptanceSet& a);

struct FacetCertificate {
    int node = 0;  // node index in the tree
    Vec normal;
    double offset = 0.0;
    bool certified = false;
    double achieved = 0.0;  // best dual halfspace offset found
};

struct DualReport {
    bool outer_holds = true;
    std::string outer_witness;
    int pairs_tested = 0;
    int facets_total = 0;
    int facets_certified = 0;
    std::vector<FacetCertificate> facets;

    double coverage() const {
        return facets_total == 0 ? 1.0 : double(facets_certified) / facets_total;
    }
};

/// Checks the dual representation of an acceptance-representable measure on
/// the given claims: (outer) the primal polyhedron lies inside the penalized
/// halfspace of every sampled valid pair; (inner) every facet of the primal
/// polyhedron is reproduced by a pair built from the dual solution of a
/// support program on the acceptance set.  Throws NotPolyhedral.
DualReport verify_dual_representation(const RiskMeasure& r,
                                      const std::vector<AdaptedVector>& claims, int t,
                                      int n_pairs, Rng& rng, double tol);

/// Certify one halfspace {u in M_t : normal.u >= offset} of R(X)(g) at node
/// g.  On success the certifying pair is written to *out when given.
bool certify_facet(const AcceptanceSet& a, const ConicalMarket& market, const AdaptedVector& x,
                   int node, const Vec& normal, double offset, double tol, DualPair* out);

/// Pair -> martingale process with Z_T the reverse-transform leaf field and
/// Z_s its conditional expectations.  Dual-cone membership is enforced from
/// time t on; violations throw ConeViolation.
PricingProcess cpp_from_pair(const DualPair& p, const ConicalMarket& market);

/// Process -> pair at time t: w = Z_t, densities Z_T,i / E[Z_T,i].
DualPair pair_from_cpp(const PricingProcess& z, int t, const ConicalMarket& market);

/// Membership of the pair in the value-at-risk dual set: node-wise,
/// diag(w)(diag(lambda)^{-1} 1 - density ratio) >= 0 at every leaf.
bool avar_dual_membership(const DualPair& p, const std::vector<Vec>& lambda,
                          const ConicalMarket& market);

/// Deterministic sampler of valid pairs: densities from normalized
/// exponential draws, weights from the dual-cone generators of (M_t)_+,
/// adjusted until the coupling and non-orthogonality conditions hold.
std::vector<DualPair> sample_dual_pairs(const ConicalMarket& market, int t, int count, Rng& rng);

}  // namespace risktool
