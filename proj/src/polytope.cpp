#include "risktool/polytope.hpp"

#include <algorithm>
#include <cmath>

#include "risktool/lp.hpp"
#include "dd_impl.hpp"

#if RISKTOOL_EXACT_HULL
#include <boost/multiprecision/cpp_int.hpp>
#endif

namespace risktool {
namespace {

constexpr double kDdTol = 1e-9;
constexpr double kZeroVec = 1e-12;

struct DoublePolicy {
    int sign(double v) const { return v > kDdTol ? 1 : (v < -kDdTol ? -1 : 0); }
    bool normalize(Vec& v) const {
        double n = norm2(v);
        if (n < kZeroVec) return false;
        for (auto& c : v) {
            c /= n;
            if (std::fabs(c) < kZeroVec) c = 0.0;
        }
        return true;
    }
};

struct RowEq {
    Vec a;
    double b = 0.0;
    bool eq = false;
};

void check_finite_vec(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) fail("NonFiniteInput", "non-finite coordinate");
}

// Normalizes, deduplicates and folds opposite-row pairs into equality rows.
// Returns false when a trivially infeasible row is present.
bool clean_rows(int dim, const std::vector<Halfspace>& in, std::vector<RowEq>& out) {
    out.clear();
    for (const auto& h : in) {
        if (static_cast<int>(h.a.size()) != dim) fail("DimMismatch", "halfspace width");
        check_finite_vec(h.a);
        if (!std::isfinite(h.b)) fail("NonFiniteInput", "halfspace offset");
        double n = norm2(h.a);
        if (n < kZeroVec) {
            if (h.b > kDdTol) return false;
            continue;
        }
        RowEq r;
        r.a = (1.0 / n) * h.a;
        r.b = h.b / n;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const RowEq& x, const RowEq& y) {
        if (lex_less(x.a, y.a, kDdTol)) return true;
        if (lex_less(y.a, x.a, kDdTol)) return false;
        return x.b < y.b;
    });
    // same normal: keep the tightest offset
    std::vector<RowEq> ded;
    for (auto& r : out) {
        if (!ded.empty() && approx_eq(ded.back().a, r.a, kDdTol))
            ded.back().b = std::max(ded.back().b, r.b);
        else
            ded.push_back(std::move(r));
    }
    // opposite pairs become equality rows
    std::vector<bool> gone(ded.size(), false);
    for (std::size_t i = 0; i < ded.size(); ++i) {
        if (gone[i] || ded[i].eq) continue;
        for (std::size_t j = i + 1; j < ded.size(); ++j) {
            if (gone[j]) continue;
            if (approx_eq(ded[i].a, negate(ded[j].a), kDdTol)) {
                double gap = ded[i].b + ded[j].b;  // feasible band has width -gap
                if (gap > kDdTol) return false;
                if (gap >= -kDdTol) {
                    ded[i].eq = true;
                    gone[j] = true;
                }
                break;
            }
        }
    }
    out.clear();
    for (std::size_t i = 0; i < ded.size(); ++i)
        if (!gone[i]) out.push_back(std::move(ded[i]));
    return true;
}

std::vector<LpConstraint> rows_to_cons(const std::vector<RowEq>& rows) {
    std::vector<LpConstraint> cons;
    cons.reserve(rows.size());
    for (const auto& r : rows) cons.push_back({r.a, r.eq ? Rel::Eq : Rel::Ge, r.b});
    return cons;
}

// Drops inequality rows implied by the rest.  Safe to skip entirely; DD keeps
// results correct either way, this keeps them minimal and the pivoting stable.
void lp_prune_rows(int dim, std::vector<RowEq>& rows, bool always) {
    if (!always && static_cast<int>(rows.size()) <= dim + 1) return;
    if (rows.size() < 2) return;
    if (!lp_feasible(dim, rows_to_cons(rows))) return;  // emptiness falls out of DD
    std::vector<bool> removed(rows.size(), false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].eq) continue;
        std::vector<LpConstraint> cons;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (j == i || removed[j]) continue;
            cons.push_back({rows[j].a, rows[j].eq ? Rel::Eq : Rel::Ge, rows[j].b});
        }
        LpResult r = solve_lp(rows[i].a, cons);
        if (r.status == LpResult::Status::Optimal && r.value >= rows[i].b - 1e-9)
            removed[i] = true;
    }
    std::vector<RowEq> kept;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!removed[i]) kept.push_back(std::move(rows[i]));
    rows = std::move(kept);
}

// ---- homogenization: polyhedron in R^d <-> cone in R^{d+1} -----------------

detail::DdOut<double> dd_from_rows(int dim, const std::vector<RowEq>& rows) {
    DoublePolicy pol;
    std::vector<detail::DdRow<double>> dd;
    dd.reserve(rows.size() + 1);
    {
        detail::DdRow<double> x0;
        x0.a.assign(dim + 1, 0.0);
        x0.a[dim] = 1.0;
        dd.push_back(std::move(x0));
    }
    for (const auto& r : rows) {
        detail::DdRow<double> row;
        row.a = r.a;
        row.a.push_back(-r.b);
        pol.normalize(row.a);
        row.eq = r.eq;
        dd.push_back(std::move(row));
    }
    return detail::dd_cone<double>(dim + 1, dd, pol);
}

void split_gens(int dim, const detail::DdOut<double>& out, std::vector<Vec>& vs,
                std::vector<Vec>& rs) {
    vs.clear();
    rs.clear();
    for (const auto& g : out.rays) {
        double x0 = g[dim];
        if (x0 > kDdTol) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v[i] = g[i] / x0;
            vs.push_back(std::move(v));
        } else if (x0 >= -kDdTol) {
            Vec r(g.begin(), g.begin() + dim);
            if (norm2(r) > kZeroVec) rs.push_back(std::move(r));
        }
    }
    for (const auto& l : out.lines) {
        Vec r(l.begin(), l.begin() + dim);
        if (norm2(r) > kZeroVec) {
            rs.push_back(r);
            rs.push_back(negate(r));
        }
    }
}

// Minimal H-description of conv(vs) + cone(rs) via the polar cone.
std::vector<RowEq> hmin_from_gens(int dim, const std::vector<Vec>& vs,
                                  const std::vector<Vec>& rs) {
    DoublePolicy pol;
    std::vector<detail::DdRow<double>> dd;
    for (const auto& v : vs) {
        detail::DdRow<double> row;
        row.a = v;
        row.a.push_back(1.0);
        pol.normalize(row.a);
        dd.push_back(std::move(row));
    }
    // opposite ray pairs are lines of the set: fold them into equality rows
    std::vector<bool> used(rs.size(), false);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (used[i]) continue;
        Vec ri = rs[i];
        pol.normalize(ri);
        bool line = false;
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
            if (used[j]) continue;
            Vec rj = rs[j];
            pol.normalize(rj);
            if (approx_eq(ri, negate(rj), 1e-8)) {
                used[j] = true;
                line = true;
                break;
            }
        }
        detail::DdRow<double> row;
        row.a = ri;
        row.a.push_back(0.0);
        row.eq = line;
        dd.push_back(std::move(row));
    }
    auto polar = detail::dd_cone<double>(dim + 1, dd, pol);

    std::vector<RowEq> rows;
    auto push = [&](const Vec& g, bool eq) {
        Vec a(g.begin(), g.begin() + dim);
        double n = norm2(a);
        if (n < 1e-9) return;  // the trivial x0-direction
        RowEq r;
        r.a = (1.0 / n) * a;
        r.b = -g[dim] / n;
        r.eq = eq;
        rows.push_back(std::move(r));
    };
    for (const auto& g : polar.rays) push(g, false);
    for (const auto& g : polar.lines) push(g, true);
    return rows;
}

Vec canon_ray(Vec r) {
    double n = norm_inf(r);
    if (n > 0.0)
        for (auto& c : r) {
            c /= n;
            if (std::fabs(c) < kZeroVec) c = 0.0;
        }
    return r;
}

void sort_gens(std::vector<Vec>& g) {
    std::sort(g.begin(), g.end(),
              [](const Vec& a, const Vec& b) { return lex_less(a, b, kDdTol); });
}

std::vector<Halfspace> expand_rows(std::vector<RowEq> rows) {
    std::vector<Halfspace> hs;
    for (auto& r : rows) {
        if (r.eq) hs.push_back({negate(r.a), -r.b});
        hs.push_back({std::move(r.a), r.b});
    }
    std::sort(hs.begin(), hs.end(), [](const Halfspace& x, const Halfspace& y) {
        if (lex_less(x.a, y.a, kDdTol)) return true;
        if (lex_less(y.a, x.a, kDdTol)) return false;
        return x.b < y.b;
    });
    return hs;
}

}  // namespace

#if RISKTOOL_EXACT_HULL
namespace {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct RatPolicy {
    int sign(const Rat& v) const { return v.sign(); }
    // scale to a coprime integer vector
    bool normalize(std::vector<Rat>& v) const {
        BigInt l = 1;
        for (const auto& c : v)
            if (c != 0) l = boost::multiprecision::lcm(l, denominator(c));
        BigInt g = 0;
        for (auto& c : v) {
            c *= l;
            g = boost::multiprecision::gcd(g, boost::multiprecision::abs(numerator(c)));
        }
        if (g == 0) return false;
        for (auto& c : v) c /= Rat(g);
        return true;
    }
};

// double -> rational is exact (doubles are dyadic)
Rat to_rat(double x) { return Rat(x); }

double to_double(const Rat& r) { return r.convert_to<double>(); }

// Gaussian elimination over the equality rows; drops inequality rows whose
// normal lies in their span (the one redundancy class double description
// modulo lineality cannot see).
void exact_prune_eq_implied(int dim, std::vector<std::vector<Rat>>& eq_a,
                            std::vector<RowEq>& rows) {
    if (eq_a.empty()) return;
    std::vector<int> pivots;
    std::vector<std::vector<Rat>> basis;
    for (auto v : eq_a) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const Rat& p = basis[k][pivots[k]];
            Rat f = v[pivots[k]] / p;
            if (f != Rat(0))
                for (int i = 0; i <= dim; ++i) v[i] -= f * basis[k][i];
        }
        int piv = -1;
        for (int i = 0; i < dim; ++i)
            if (v[i] != Rat(0)) {
                piv = i;
                break;
            }
        if (piv >= 0) {
            pivots.push_back(piv);
            basis.push_back(std::move(v));
        }
    }
    std::vector<RowEq> kept;
    for (auto& r : rows) {
        if (r.eq) {
            kept.push_back(std::move(r));
            continue;
        }
        std::vector<Rat> v(dim + 1);
        for (int i = 0; i < dim; ++i) v[i] = to_rat(r.a[i]);
        v[dim] = to_rat(r.b);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            Rat f = v[pivots[k]] / basis[k][pivots[k]];
            if (f != Rat(0))
                for (int i = 0; i <= dim; ++i) v[i] -= f * basis[k][i];
        }
        bool in_span = true;
        for (int i = 0; i < dim; ++i)
            if (v[i] != Rat(0)) {
                in_span = false;
                break;
            }
        // residual offset <= 0 means the flat already satisfies the row
        if (in_span && v[dim] <= Rat(0)) continue;
        kept.push_back(std::move(r));
    }
    rows = std::move(kept);
}

detail::DdOut<Rat> rat_dd(int dim, const std::vector<detail::DdRow<Rat>>& rows) {
    RatPolicy pol;
    return detail::dd_cone<Rat>(dim, rows, pol);
}

// Exact variants of the two conversion pipelines.  Inputs and outputs stay
// double; every pivot in between is rational.
void exact_h_to_gens(int dim, const std::vector<RowEq>& rows, std::vector<Vec>& vs,
                     std::vector<Vec>& rs) {
    std::vector<detail::DdRow<Rat>> dd;
    {
        detail::DdRow<Rat> x0;
        x0.a.assign(dim + 1, Rat(0));
        x0.a[dim] = Rat(1);
        dd.push_back(std::move(x0));
    }
    for (const auto& r : rows) {
        detail::DdRow<Rat> row;
        row.a.resize(dim + 1);
        for (int i = 0; i < dim; ++i) row.a[i] = to_rat(r.a[i]);
        row.a[dim] = -to_rat(r.b);
        row.eq = r.eq;
        dd.push_back(std::move(row));
    }
    auto out = rat_dd(dim + 1, dd);
    vs.clear();
    rs.clear();
    for (const auto& g : out.rays) {
        if (g[dim] > Rat(0)) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v[i] = to_double(g[i] / g[dim]);
            vs.push_back(std::move(v));
        } else if (g[dim] == Rat(0)) {
            Vec r(dim);
            for (int i = 0; i < dim; ++i) r[i] = to_double(g[i]);
            if (norm2(r) > 0.0) rs.push_back(std::move(r));
        }
    }
    for (const auto& l : out.lines) {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = to_double(l[i]);
        if (norm2(r) > 0.0) {
            rs.push_back(r);
            rs.push_back(negate(r));
        }
    }
}

void exact_gens_to_h(int dim, const std::vector<Vec>& vs, const std::vector<Vec>& rs,
                     std::vector<RowEq>& rows) {
    RatPolicy pol;
    std::vector<detail::DdRow<Rat>> dd;
    for (const auto& v : vs) {
        detail::DdRow<Rat> row;
        row.a.resize(dim + 1);
        for (int i = 0; i < dim; ++i) row.a[i] = to_rat(v[i]);
        row.a[dim] = Rat(1);
        dd.push_back(std::move(row));
    }
    std::vector<std::vector<Rat>> norm_rs;
    for (const auto& r : rs) {
        std::vector<Rat> v(dim + 1, Rat(0));
        for (int i = 0; i < dim; ++i) v[i] = to_rat(r[i]);
        pol.normalize(v);
        norm_rs.push_back(std::move(v));
    }
    std::vector<bool> used(norm_rs.size(), false);
    for (std::size_t i = 0; i < norm_rs.size(); ++i) {
        if (used[i]) continue;
        bool line = false;
        for (std::size_t j = i + 1; j < norm_rs.size(); ++j) {
            if (used[j]) continue;
            bool opp = true;
            for (int k = 0; k <= dim; ++k)
                if (norm_rs[i][k] != -norm_rs[j][k]) {
                    opp = false;
                    break;
                }
            if (opp) {
                used[j] = true;
                line = true;
                break;
            }
        }
        detail::DdRow<Rat> row;
        row.a = norm_rs[i];
        row.eq = line;
        dd.push_back(std::move(row));
    }
    auto polar = rat_dd(dim + 1, dd);

    rows.clear();
    std::vector<std::vector<Rat>> eq_normals;
    auto push = [&](const std::vector<Rat>& g, bool eq) {
        bool zero = true;
        for (int i = 0; i < dim; ++i)
            if (g[i] != Rat(0)) {
                zero = false;
                break;
            }
        if (zero) return;
        Vec a(dim);
        for (int i = 0; i < dim; ++i) a[i] = to_double(g[i]);
        double n = norm2(a);
        RowEq r;
        r.a = (1.0 / n) * a;
        r.b = to_double(-g[dim]) / n;
        r.eq = eq;
        if (eq) {
            std::vector<Rat> na(dim + 1);
            for (int i = 0; i < dim; ++i) na[i] = g[i];
            na[dim] = -g[dim];  // stored as (a, b) for the span test
            eq_normals.push_back(std::move(na));
        }
        rows.push_back(std::move(r));
    };
    for (const auto& g : polar.rays) push(g, false);
    for (const auto& g : polar.lines) push(g, true);
    exact_prune_eq_implied(dim, eq_normals, rows);
}

}  // namespace
#endif  // RISKTOOL_EXACT_HULL

// ---- Polyhedron ------------------------------------------------------------

Polyhedron Polyhedron::empty_set(int dim) {
    Polyhedron p;
    p.dim_ = dim;
    p.empty_ = true;
    return p;
}

Polyhedron Polyhedron::full_space(int dim) { return from_h(dim, {}); }

Polyhedron Polyhedron::orthant(int dim) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < dim; ++i) {
        Vec a(dim, 0.0);
        a[i] = 1.0;
        hs.push_back({a, 0.0});
    }
    return from_h(dim, hs);
}

Polyhedron Polyhedron::point(const Vec& p) {
    return from_v(static_cast<int>(p.size()), {p}, {});
}

Polyhedron Polyhedron::from_h(int dim, const std::vector<Halfspace>& hs) {
    std::vector<RowEq> rows;
    if (!clean_rows(dim, hs, rows)) return empty_set(dim);

    std::vector<Vec> vs, rs;
#if RISKTOOL_EXACT_HULL
    if (default_tols().exact_hull) {
        exact_h_to_gens(dim, rows, vs, rs);
        if (vs.empty()) return empty_set(dim);
        std::vector<RowEq> hmin;
        exact_gens_to_h(dim, vs, rs, hmin);
        Polyhedron p;
        p.dim_ = dim;
        p.empty_ = false;
        for (auto& r : rs) r = canon_ray(std::move(r));
        sort_gens(vs);
        sort_gens(rs);
        p.vertices_ = std::move(vs);
        p.rays_ = std::move(rs);
        p.h_ = expand_rows(std::move(hmin));
        return p;
    }
#endif
    lp_prune_rows(dim, rows, /*always=*/false);
    split_gens(dim, dd_from_rows(dim, rows), vs, rs);
    if (vs.empty()) return empty_set(dim);
    std::vector<RowEq> hmin = hmin_from_gens(dim, vs, rs);
    lp_prune_rows(dim, hmin, /*always=*/true);

    Polyhedron p;
    p.dim_ = dim;
    p.empty_ = false;
    for (auto& r : rs) r = canon_ray(std::move(r));
    sort_gens(vs);
    sort_gens(rs);
    p.vertices_ = std::move(vs);
    p.rays_ = std::move(rs);
    p.h_ = expand_rows(std::move(hmin));
    return p;
}

Polyhedron Polyhedron::from_v(int dim, const std::vector<Vec>& vertices,
                              const std::vector<Vec>& rays) {
    for (const auto& v : vertices) {
        if (static_cast<int>(v.size()) != dim) fail("DimMismatch", "vertex width");
        check_finite_vec(v);
    }
    for (const auto& r : rays) {
        if (static_cast<int>(r.size()) != dim) fail("DimMismatch", "ray width");
        check_finite_vec(r);
    }
    if (vertices.empty()) {
        if (!rays.empty()) fail("EmptyPolyhedron", "rays without a base point");
        return empty_set(dim);
    }
    // dedupe generators before the polar step
    std::vector<Vec> vs, rs;
    for (const auto& v : vertices) {
        bool dup = false;
        for (const auto& u : vs)
            if (approx_eq(u, v, kDdTol)) {
                dup = true;
                break;
            }
        if (!dup) vs.push_back(v);
    }
    DoublePolicy pol;
    for (const auto& r : rays) {
        Vec u = r;
        if (!pol.normalize(u)) continue;
        bool dup = false;
        for (const auto& w : rs)
            if (approx_eq(w, u, kDdTol)) {
                dup = true;
                break;
            }
        if (!dup) rs.push_back(std::move(u));
    }

    std::vector<RowEq> hmin;
#if RISKTOOL_EXACT_HULL
    if (default_tols().exact_hull) {
        exact_gens_to_h(dim, vs, rs, hmin);
        std::vector<Vec> mvs, mrs;
        exact_h_to_gens(dim, hmin, mvs, mrs);
        Polyhedron p;
        p.dim_ = dim;
        p.empty_ = false;
        for (auto& r : mrs) r = canon_ray(std::move(r));
        sort_gens(mvs);
        sort_gens(mrs);
        p.vertices_ = std::move(mvs);
        p.rays_ = std::move(mrs);
        p.h_ = expand_rows(std::move(hmin));
        return p;
    }
#endif
    hmin = hmin_from_gens(dim, vs, rs);
    lp_prune_rows(dim, hmin, /*always=*/true);
    std::vector<Vec> mvs, mrs;
    split_gens(dim, dd_from_rows(dim, hmin), mvs, mrs);
    if (mvs.empty()) fail("EmptyPolyhedron", "generator round-trip lost the base point");

    Polyhedron p;
    p.dim_ = dim;
    p.empty_ = false;
    for (auto& r : mrs) r = canon_ray(std::move(r));
    sort_gens(mvs);
    sort_gens(mrs);
    p.vertices_ = std::move(mvs);
    p.rays_ = std::move(mrs);
    p.h_ = expand_rows(std::move(hmin));
    return p;
}

bool Polyhedron::contains(const Vec& x, double tol) const {
    if (empty_) return false;
    if (static_cast<int>(x.size()) != dim_) fail("DimMismatch", "point width");
    for (const auto& h : h_)
        if (dot(h.a, x) < h.b - tol) return false;
    return true;
}

bool Polyhedron::is_cone(double tol) const {
    if (empty_ || vertices_.size() != 1) return false;
    return norm_inf(vertices_[0]) <= tol;
}

Polyhedron Polyhedron::translated(const Vec& v) const {
    if (static_cast<int>(v.size()) != dim_) fail("DimMismatch", "translation width");
    if (empty_) return *this;
    Polyhedron p(*this);
    for (auto& vert : p.vertices_) vert = vert + v;
    for (auto& h : p.h_) h.b += dot(h.a, v);
    sort_gens(p.vertices_);
    std::sort(p.h_.begin(), p.h_.end(), [](const Halfspace& x, const Halfspace& y) {
        if (lex_less(x.a, y.a, kDdTol)) return true;
        if (lex_less(y.a, x.a, kDdTol)) return false;
        return x.b < y.b;
    });
    return p;
}

Polyhedron Polyhedron::scaled(double s) const {
    if (empty_) return *this;
    if (s == 0.0) return point(Vec(dim_, 0.0));
    std::vector<Vec> vs;
    for (const auto& v : vertices_) vs.push_back(s * v);
    std::vector<Vec> rs;
    for (const auto& r : rays_) rs.push_back(s > 0 ? r : negate(r));
    std::vector<Halfspace> hs;
    for (const auto& h : h_) {
        if (s > 0)
            hs.push_back({h.a, s * h.b});
        else
            hs.push_back({negate(h.a), -s * h.b});
    }
    Polyhedron p;
    p.dim_ = dim_;
    p.empty_ = false;
    sort_gens(vs);
    sort_gens(rs);
    p.vertices_ = std::move(vs);
    p.rays_ = std::move(rs);
    std::sort(hs.begin(), hs.end(), [](const Halfspace& x, const Halfspace& y) {
        if (lex_less(x.a, y.a, kDdTol)) return true;
        if (lex_less(y.a, x.a, kDdTol)) return false;
        return x.b < y.b;
    });
    p.h_ = std::move(hs);
    return p;
}

void Polyhedron::validate(double tol) const {
    if (empty_) {
        if (!vertices_.empty() || !rays_.empty())
            fail("BadPolyhedron", "empty set carries generators");
        return;
    }
    if (vertices_.empty()) fail("BadPolyhedron", "nonempty set without vertices");
    for (const auto& h : h_) {
        for (const auto& v : vertices_)
            if (dot(h.a, v) < h.b - tol) fail("BadPolyhedron", "vertex violates facet");
        for (const auto& r : rays_)
            if (dot(h.a, r) < -tol) fail("BadPolyhedron", "ray escapes facet");
        double s = support_vrep(*this, h.a);
        if (!(std::fabs(s - h.b) <= tol * (1.0 + std::fabs(h.b))))
            fail("BadPolyhedron", "facet not tight against generators");
    }
}

// ---- operations ------------------------------------------------------------

double support(const Polyhedron& p, const Vec& dir) {
    if (p.is_empty()) fail("EmptyPolyhedron", "support of the empty set");
    if (static_cast<int>(dir.size()) != p.dim()) fail("DimMismatch", "direction width");
    std::vector<LpConstraint> cons;
    for (const auto& h : p.hrep()) cons.push_back({h.a, Rel::Ge, h.b});
    LpResult r = solve_lp(dir, cons);
    switch (r.status) {
        case LpResult::Status::Optimal:
            return r.value;
        case LpResult::Status::Unbounded:
            return -kInf;
        default:
            fail("EmptyPolyhedron", "H-representation infeasible for a nonempty set");
    }
}

double support_vrep(const Polyhedron& p, const Vec& dir) {
    if (p.is_empty()) fail("EmptyPolyhedron", "support of the empty set");
    for (const auto& r : p.rays())
        if (dot(dir, r) < -1e-9 * std::max(1.0, norm_inf(dir))) return -kInf;
    double best = kInf;
    for (const auto& v : p.vertices()) best = std::min(best, dot(dir, v));
    return best;
}

Polyhedron minkowski_sum(const Polyhedron& a, const Polyhedron& b) {
    if (a.dim() != b.dim()) fail("DimMismatch", "sum of different dimensions");
    if (a.is_empty() || b.is_empty()) return Polyhedron::empty_set(a.dim());
    std::vector<Vec> vs;
    vs.reserve(a.vertices().size() * b.vertices().size());
    for (const auto& va : a.vertices())
        for (const auto& vb : b.vertices()) vs.push_back(va + vb);
    std::vector<Vec> rs = a.rays();
    rs.insert(rs.end(), b.rays().begin(), b.rays().end());
    return Polyhedron::from_v(a.dim(), vs, rs);
}

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b) {
    if (a.dim() != b.dim()) fail("DimMismatch", "intersection of different dimensions");
    if (a.is_empty() || b.is_empty()) return Polyhedron::empty_set(a.dim());
    std::vector<Halfspace> hs = a.hrep();
    hs.insert(hs.end(), b.hrep().begin(), b.hrep().end());
    return Polyhedron::from_h(a.dim(), hs);
}

Polyhedron geometric_difference(const Polyhedron& a_set, const Polyhedron& b_set) {
    if (a_set.dim() != b_set.dim()) fail("DimMismatch", "difference of different dimensions");
    if (b_set.is_empty()) fail("EmptySubtrahend", "geometric difference by the empty set");
    if (a_set.is_empty()) return Polyhedron::empty_set(a_set.dim());
    std::vector<Halfspace> hs;
    for (const auto& h : a_set.hrep()) {
        double s = support(b_set, h.a);
        if (s == -kInf) return Polyhedron::empty_set(a_set.dim());
        hs.push_back({h.a, h.b - s});
    }
    return Polyhedron::from_h(a_set.dim(), hs);
}

bool subset(const Polyhedron& p, const Polyhedron& q, double tol) {
    if (p.dim() != q.dim()) fail("DimMismatch", "subset of different dimensions");
    if (p.is_empty()) return true;
    if (q.is_empty()) return false;
    for (const auto& h : q.hrep()) {
        double s = support(p, h.a);
        if (s == -kInf || s < h.b - tol) return false;
    }
    return true;
}

bool set_equal(const Polyhedron& p, const Polyhedron& q, double tol) {
    return subset(p, q, tol) && subset(q, p, tol);
}

Polyhedron clip_box(const Polyhedron& p, double lo, double hi) {
    if (p.is_empty()) return p;
    std::vector<Halfspace> hs = p.hrep();
    for (int i = 0; i < p.dim(); ++i) {
        Vec a(p.dim(), 0.0);
        a[i] = 1.0;
        hs.push_back({a, lo});
        a[i] = -1.0;
        hs.push_back({a, -hi});
    }
    return Polyhedron::from_h(p.dim(), hs);
}

}  // namespace risktool
