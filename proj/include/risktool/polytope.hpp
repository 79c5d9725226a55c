#pragma once

#include <string>
#include <vector>

#include "risktool/common.hpp"

namespace risktool {

/// Closed halfspace  {x : a.x >= b}.  Stored with ||a||_2 = 1.
struct Halfspace {
    Vec a;
    double b = 0.0;
};

/// Convex polyhedron in R^d carrying both synchronized representations:
/// the minimal facet list H (equalities appear as paired opposite rows) and
/// the generator list V (vertices and rays; a line shows up as a ray pair).
/// Instances are immutable values; all operations return new objects.
/// The empty set is canonical: no vertices, no rays, a single infeasible row.
class Polyhedron {
public:
    Polyhedron() = default;

    static Polyhedron from_h(int dim, const std::vector<Halfspace>& hs);
    static Polyhedron from_v(int dim, const std::vector<Vec>& vertices,
                             const std::vector<Vec>& rays);
    static Polyhedron full_space(int dim);
    static Polyhedron empty_set(int dim);
    static Polyhedron orthant(int dim);
    static Polyhedron point(const Vec& p);

    int dim() const { return dim_; }
    bool is_empty() const { return empty_; }
    const std::vector<Halfspace>& hrep() const { return h_; }
    const std::vector<Vec>& vertices() const { return vertices_; }
    const std::vector<Vec>& rays() const { return rays_; }

    bool contains(const Vec& x, double tol) const;
    /// Cone test: the only vertex is the origin.
    bool is_cone(double tol) const;

    Polyhedron translated(const Vec& v) const;
    Polyhedron scaled(double s) const;
    Polyhedron negated() const { return scaled(-1.0); }

    /// Structural cross-check of the two representations; throws on mismatch.
    void validate(double tol) const;

private:
    int dim_ = 0;
    bool empty_ = true;
    std::vector<Halfspace> h_;
    std::vector<Vec> vertices_;
    std::vector<Vec> rays_;
};

/// inf_{x in P} dir.x via LP over the H-representation.
/// Returns -inf when unbounded below; throws EmptyPolyhedron on the empty set.
double support(const Polyhedron& p, const Vec& dir);

/// Same quantity from the generators; kept separate so representation
/// consistency can be cross-checked through two independent routes.
double support_vrep(const Polyhedron& p, const Vec& dir);

Polyhedron minkowski_sum(const Polyhedron& a, const Polyhedron& b);
Polyhedron intersect(const Polyhedron& a, const Polyhedron& b);

/// Geometric (Minkowski) difference {u : u + b_set <= a_set}.
/// Throws EmptySubtrahend when b_set is empty.
Polyhedron geometric_difference(const Polyhedron& a_set, const Polyhedron& b_set);

/// Inclusion p <= q via support evaluations against q's facets.
bool subset(const Polyhedron& p, const Polyhedron& q, double tol);

bool set_equal(const Polyhedron& p, const Polyhedron& q, double tol);

/// Intersection with the cube [lo, hi]^d; used for plot output.
Polyhedron clip_box(const Polyhedron& p, double lo, double hi);

}  // namespace risktool
