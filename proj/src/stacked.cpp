#include "risktool/stacked.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace risktool {

namespace {

constexpr double kSnap = 1e-11;  // coefficients below this are treated as 0
constexpr double kFeas = 1e-9;

void snap_row(LpConstraint& r) {
    for (double& c : r.a)
        if (std::fabs(c) < kSnap) c = 0.0;
}

// Scale to inf-norm 1 so tolerances mean the same thing on every row.
// All-zero rows are left for the caller to classify.
void normalize_row(LpConstraint& r) {
    snap_row(r);
    double m = norm_inf(r.a);
    if (m > 0.0) {
        double inv = 1.0 / m;
        for (double& c : r.a) c *= inv;
        r.b *= inv;
        snap_row(r);
    }
}

bool row_zero(const LpConstraint& r) { return norm_inf(r.a) == 0.0; }

bool lex_row_less(const LpConstraint& x, const LpConstraint& y) {
    if (x.rel != y.rel) return static_cast<int>(x.rel) < static_cast<int>(y.rel);
    if (x.a != y.a) return std::lexicographical_compare(x.a.begin(), x.a.end(), y.a.begin(),
                                                        y.a.end());
    return x.b < y.b;
}

// Same-normal duplicates: for Ge keep the largest offset, for Eq keep one
// (coincident) or mark the system infeasible (contradictory).
void dedupe_rows(std::vector<LpConstraint>& rows, bool* infeasible) {
    std::sort(rows.begin(), rows.end(), lex_row_less);
    std::vector<LpConstraint> out;
    for (auto& r : rows) {
        if (!out.empty() && out.back().rel == r.rel && out.back().a == r.a) {
            if (r.rel == Rel::Eq && std::fabs(r.b - out.back().b) > kFeas) *infeasible = true;
            out.back().b = std::max(out.back().b, r.b);
            continue;
        }
        out.push_back(std::move(r));
    }
    rows = std::move(out);
}

// Context bound for the implied-row sweep.  Past this many admitted rows the
// rest are kept untested, so each LP stays small; the only loss is
// minimality of the survivors.
constexpr std::size_t kLpPruneKeepCap = 256;

// Mask of rows surviving the implied-row sweep: a Ge row whose minimum over
// the kept rows already meets its own offset is redundant.  Forward pass
// admits rows against the kept set so far, backward pass re-tests each
// survivor, so every LP runs against roughly the irredundant core rather
// than the whole system.  Implication by a subset is implication by the
// system, so both passes only ever drop redundant rows.
std::vector<char> lp_prune_mask(const std::vector<LpConstraint>& rows, bool* infeasible) {
    std::vector<char> keep(rows.size(), 1);
    if (rows.size() < 2) return keep;
    // Forward context: every non-Ge row plus the admitted Ge rows, frozen
    // once the cap is reached so each LP stays small.  Every row is still
    // tested against that core; implication by a subset is implication by
    // the system, so drops stay sound and only minimality degrades.
    std::vector<LpConstraint> ctx;
    for (const auto& r : rows)
        if (r.rel != Rel::Ge) ctx.push_back(r);
    std::size_t ctx_ge = 0;
    auto implied_by = [&](std::size_t i, const std::vector<LpConstraint>& against) {
        if (against.empty()) return false;
        auto res = solve_lp(rows[i].a, against);
        if (res.status == LpResult::Status::Infeasible) {
            *infeasible = true;
            return false;
        }
        return res.status == LpResult::Status::Optimal && res.value >= rows[i].b - kFeas;
    };
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].rel == Rel::Ge) keep[i] = 0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < rows.size() && !*infeasible; ++i) {
        if (rows[i].rel != Rel::Ge) continue;
        if (!implied_by(i, ctx)) {
            keep[i] = 1;
            ++kept;
            if (ctx_ge < kLpPruneKeepCap) {
                ctx.push_back(rows[i]);
                ++ctx_ge;
            }
        }
    }
    if (*infeasible) return std::vector<char>(rows.size(), 1);
    if (kept <= kLpPruneKeepCap) {
        // Second sweep against the survivors catches rows only implied by
        // later ones; skipped past the cap, where minimality is lost anyway.
        for (std::size_t i = 0; i < rows.size() && !*infeasible; ++i) {
            if (rows[i].rel != Rel::Ge || !keep[i]) continue;
            std::vector<LpConstraint> full;
            for (std::size_t j = 0; j < rows.size(); ++j)
                if (j != i && keep[j]) full.push_back(rows[j]);
            if (implied_by(i, full)) keep[i] = 0;
        }
        if (*infeasible) return std::vector<char>(rows.size(), 1);
    }
    return keep;
}

// Drop Ge rows implied by the rest.  Equality rows are kept as-is.
void lp_prune(std::vector<LpConstraint>& rows, bool* infeasible) {
    bool bad = false;
    auto keep = lp_prune_mask(rows, &bad);
    if (bad) {
        *infeasible = true;
        return;
    }
    std::vector<LpConstraint> out;
    for (size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) out.push_back(std::move(rows[i]));
    rows = std::move(out);
}

// ---- projection by polar double description ----
//
// Fourier-Motzkin dies on systems whose intermediate eliminations are far
// fatter than the answer.  This engine builds the projection in the target
// space instead.  Homogenize the system to a cone over (x, t); a direction u
// is a valid inequality of the projected cone exactly when  inf u.z  over
// the extended cone is zero, which is one support LP.  The valid directions
// form the polar of the projected cone.  Starting from all of R^D the
// polar's generator description is refined: an uncertified generator is
// tested with the LP, and a failure yields a feasible ray of the extended
// cone that strictly cuts it.  Each cut comes from a distinct simplex basis,
// so the refinement terminates, and once every generator is certified the
// generators are exactly the projection's facets.  Work scales with the size
// of the answer, never with elimination bulk.
class PolarDd {
  public:
    PolarDd(int nvars, int keep, const std::vector<LpConstraint>& rows)
        : D_(keep + 1), total_(nvars + 1) {
        hom_.reserve(rows.size() + 1);
        for (const auto& r : rows) {
            Vec v(total_, 0.0);
            std::copy(r.a.begin(), r.a.end(), v.begin());
            v[total_ - 1] = -r.b;
            hom_.push_back({std::move(v), r.rel, 0.0});
        }
        Vec tpos(total_, 0.0);
        tpos[total_ - 1] = 1.0;
        hom_.push_back({std::move(tpos), Rel::Ge, 0.0});
        for (int j = 0; j < D_; ++j) {
            Vec e(D_, 0.0);
            e[j] = 1.0;
            lines_.push_back(std::move(e));
            lines_ok_.push_back(0);
        }
    }

    // Refine until every generator of the outer polar is certified valid.
    void run() {
        for (;;) {
            if (cuts_.size() > kMaxCuts || rays_.size() > kMaxRays)
                fail("ProjectionOverflow", "polar description grew past its caps");
            int li = -1;
            for (std::size_t i = 0; i < lines_.size(); ++i)
                if (!lines_ok_[i]) {
                    li = static_cast<int>(i);
                    break;
                }
            if (li >= 0) {
                Vec cut;
                if (!oracle(lines_[li], &cut)) {
                    add_cut(std::move(cut));
                    continue;
                }
                if (!oracle(negate(lines_[li]), &cut)) {
                    add_cut(std::move(cut));
                    continue;
                }
                lines_ok_[li] = 1;
                continue;
            }
            std::size_t ri = rays_.size();
            for (std::size_t i = 0; i < rays_.size(); ++i)
                if (!rays_[i].ok) {
                    ri = i;
                    break;
                }
            if (ri == rays_.size()) return;
            Vec cut;
            if (oracle(rays_[ri].v, &cut)) {
                rays_[ri].ok = true;
                continue;
            }
            add_cut(std::move(cut));
        }
    }

    // Certified generators, dehomogenized: lines become equalities, rays
    // become Ge rows, pure-t generators become feasibility verdicts.
    void emit(int keep, ProjectedRows* out) const {
        std::vector<LpConstraint> res;
        auto split = [&](const Vec& v, Vec* u, double* ut) {
            u->assign(v.begin(), v.begin() + keep);
            *ut = v[keep];
        };
        for (const auto& l : lines_) {
            Vec u;
            double ut;
            split(l, &u, &ut);
            if (norm_inf(u) == 0.0) {
                if (std::fabs(ut) > kFeas) out->infeasible = true;
                continue;
            }
            res.push_back({std::move(u), Rel::Eq, -ut});
        }
        for (const auto& r : rays_) {
            Vec u;
            double ut;
            split(r.v, &u, &ut);
            if (norm_inf(u) == 0.0) {
                if (-ut > kFeas) out->infeasible = true;
                continue;
            }
            res.push_back({std::move(u), Rel::Ge, -ut});
        }
        for (auto& r : res) normalize_row(r);
        dedupe_rows(res, &out->infeasible);
        if (res.size() <= 2 * kLpPruneKeepCap) lp_prune(res, &out->infeasible);
        if (!out->infeasible && !lp_feasible(keep, res, nullptr)) out->infeasible = true;
        std::sort(res.begin(), res.end(), lex_row_less);
        out->rows = std::move(res);
    }

  private:
    struct Gen {
        Vec v;
        std::vector<std::uint64_t> zero;  // cut hyperplanes this ray lies on
        bool ok = false;
    };

    static constexpr double kTol = 1e-9;
    static constexpr std::size_t kMaxRays = 20000;
    static constexpr std::size_t kMaxCuts = 5000;

    static bool renorm(Vec& v) {
        double m = norm_inf(v);
        if (m <= 1e-12) return false;
        for (double& x : v) {
            x /= m;
            if (std::fabs(x) < kSnap) x = 0.0;
        }
        return true;
    }

    static void zset(std::vector<std::uint64_t>& z, std::size_t k) {
        if (k / 64 >= z.size()) z.resize(k / 64 + 1, 0);
        z[k / 64] |= std::uint64_t{1} << (k % 64);
    }

    // Support LP for direction u: zero optimum certifies u as a valid
    // inequality of the projection, otherwise the violating feasible ray is
    // returned as a cut on the polar.
    bool oracle(const Vec& u, Vec* cut) {
        Vec c(total_, 0.0);
        for (int j = 0; j < D_ - 1; ++j) c[j] = u[j];
        c[total_ - 1] = u[D_ - 1];
        auto res = solve_lp(c, hom_);
        if (res.status == LpResult::Status::Infeasible)
            fail("ProjectionStall", "homogeneous support oracle reported infeasible");
        if (res.status == LpResult::Status::Optimal && res.value >= -1e-8) return true;
        const Vec& src = res.status == LpResult::Status::Unbounded ? res.ray : res.x;
        Vec g(D_);
        for (int j = 0; j < D_ - 1; ++j) g[j] = src[j];
        g[D_ - 1] = src[total_ - 1];
        if (!renorm(g) || dot(u, g) > -1e-12)
            fail("ProjectionStall", "support oracle produced a useless cut");
        *cut = std::move(g);
        return false;
    }

    // Rank of a set of cut normals, pivoting on the largest column entry.
    // The tolerance is tight so near-dependence still counts as independent:
    // overcounting rank only admits extra candidate rays, which the oracle
    // then vets, while undercounting could silently drop a facet.
    int rank_of(const std::vector<int>& idx) const {
        std::vector<Vec> m;
        m.reserve(idx.size());
        for (int k : idx) m.push_back(cuts_[k]);
        int rank = 0;
        for (int col = 0; col < D_ && rank < static_cast<int>(m.size()); ++col) {
            int piv = -1;
            double best = 1e-11;
            for (int i = rank; i < static_cast<int>(m.size()); ++i)
                if (std::fabs(m[i][col]) > best) {
                    best = std::fabs(m[i][col]);
                    piv = i;
                }
            if (piv < 0) continue;
            std::swap(m[rank], m[piv]);
            const double inv = 1.0 / m[rank][col];
            for (int i = rank + 1; i < static_cast<int>(m.size()); ++i) {
                const double f = m[i][col] * inv;
                if (f == 0.0) continue;
                for (int j = col; j < D_; ++j) m[i][j] -= f * m[rank][j];
            }
            ++rank;
        }
        return rank;
    }

    void dedupe_rays() {
        std::sort(rays_.begin(), rays_.end(), [](const Gen& x, const Gen& y) {
            return std::lexicographical_compare(x.v.begin(), x.v.end(), y.v.begin(), y.v.end());
        });
        std::vector<Gen> out;
        for (auto& r : rays_) {
            if (!out.empty() && out.back().v == r.v) {
                auto& k = out.back();
                k.ok = k.ok || r.ok;
                if (r.zero.size() > k.zero.size()) k.zero.resize(r.zero.size(), 0);
                for (std::size_t w = 0; w < r.zero.size(); ++w) k.zero[w] |= r.zero[w];
                continue;
            }
            out.push_back(std::move(r));
        }
        rays_ = std::move(out);
    }

    void add_cut(Vec g) {
        // A line off the cut hyperplane absorbs the cut: it turns into the
        // one ray leaving the hyperplane and everything else is sheared onto
        // the hyperplane, which preserves membership in all earlier cuts
        // because lines lie on every one of them.
        int l0 = -1;
        double lbest = kTol;
        for (std::size_t i = 0; i < lines_.size(); ++i) {
            const double s = std::fabs(dot(lines_[i], g));
            if (s > lbest) {
                lbest = s;
                l0 = static_cast<int>(i);
            }
        }
        const std::size_t ncut = cuts_.size();
        if (l0 >= 0) {
            Vec base = lines_[l0];
            double s = dot(base, g);
            if (s < 0.0) {
                for (double& x : base) x = -x;
                s = -s;
            }
            lines_.erase(lines_.begin() + l0);
            lines_ok_.erase(lines_ok_.begin() + l0);
            for (std::size_t i = 0; i < lines_.size(); ++i) {
                const double f = dot(lines_[i], g) / s;
                if (std::fabs(f) > 0.0) {
                    for (int j = 0; j < D_; ++j) lines_[i][j] -= f * base[j];
                    if (!renorm(lines_[i])) fail("ProjectionStall", "line collapsed in shear");
                    lines_ok_[i] = 0;
                }
            }
            std::vector<Gen> kept;
            kept.reserve(rays_.size() + 1);
            for (auto& r : rays_) {
                const double f = dot(r.v, g) / s;
                if (std::fabs(f) > kTol) {
                    for (int j = 0; j < D_; ++j) r.v[j] -= f * base[j];
                    if (!renorm(r.v)) continue;
                    r.ok = false;
                }
                zset(r.zero, ncut);
                kept.push_back(std::move(r));
            }
            Gen nb;
            nb.v = std::move(base);
            for (std::size_t k = 0; k < ncut; ++k) zset(nb.zero, k);
            kept.push_back(std::move(nb));
            rays_ = std::move(kept);
            cuts_.push_back(std::move(g));
            dedupe_rays();
            return;
        }
        // All lines on the hyperplane: classic double description step on
        // the rays.  A positive-negative pair spawns a ray only when their
        // common cut set pins a two dimensional face.
        std::vector<Gen> rpos, rneg, rzer;
        for (auto& r : rays_) {
            const double s = dot(r.v, g);
            if (s > kTol) rpos.push_back(std::move(r));
            else if (s < -kTol) rneg.push_back(std::move(r));
            else {
                zset(r.zero, ncut);
                rzer.push_back(std::move(r));
            }
        }
        const int need = D_ - static_cast<int>(lines_.size()) - 2;
        std::vector<Gen> born;
        for (const auto& p : rpos)
            for (const auto& n : rneg) {
                std::vector<int> common;
                const std::size_t words = std::min(p.zero.size(), n.zero.size());
                for (std::size_t w = 0; w < words; ++w) {
                    std::uint64_t bits = p.zero[w] & n.zero[w];
                    while (bits) {
                        const int b = std::countr_zero(bits);
                        common.push_back(static_cast<int>(w * 64) + b);
                        bits &= bits - 1;
                    }
                }
                if (static_cast<int>(common.size()) < need) continue;
                if (need > 0 && rank_of(common) < need) continue;
                const double sp = dot(p.v, g), sn = dot(n.v, g);
                Gen w;
                w.v.resize(D_);
                for (int j = 0; j < D_; ++j) w.v[j] = sp * n.v[j] - sn * p.v[j];
                if (!renorm(w.v)) continue;
                for (int k : common) zset(w.zero, k);
                zset(w.zero, ncut);
                born.push_back(std::move(w));
            }
        rays_ = std::move(rzer);
        for (auto& r : rpos) rays_.push_back(std::move(r));
        for (auto& r : born) rays_.push_back(std::move(r));
        cuts_.push_back(std::move(g));
        dedupe_rays();
    }

    int D_;
    int total_;
    std::vector<LpConstraint> hom_;
    std::vector<Vec> lines_;
    std::vector<char> lines_ok_;
    std::vector<Gen> rays_;
    std::vector<Vec> cuts_;
};

ProjectedRows dd_project(int nvars, int keep, const std::vector<LpConstraint>& rows) {
    ProjectedRows out;
    PolarDd dd(nvars, keep, rows);
    dd.run();
    dd.emit(keep, &out);
    if (out.infeasible) out.rows = {{Vec(keep, 0.0), Rel::Ge, 1.0}};
    return out;
}

}  // namespace

StackedSet::StackedSet(int n_main, int n_aux, std::vector<LpConstraint> rows)
    : n_main_(n_main), n_aux_(n_aux), rows_(std::move(rows)) {
    for (auto& r : rows_) {
        if (static_cast<int>(r.a.size()) != n_main_ + n_aux_)
            fail("DimMismatch", "stacked row width does not match declared dimensions");
        for (double c : r.a)
            if (!std::isfinite(c)) fail("NonFiniteInput", "stacked row has a non-finite entry");
        if (!std::isfinite(r.b)) fail("NonFiniteInput", "stacked row has a non-finite offset");
        normalize_row(r);
    }
}

bool StackedSet::feasible(Vec* witness) const {
    Vec full;
    if (!lp_feasible(total_dim(), rows_, witness ? &full : nullptr)) return false;
    if (witness) witness->assign(full.begin(), full.begin() + n_main_);
    return true;
}

bool StackedSet::member(const Vec& x, double tol) const {
    if (static_cast<int>(x.size()) != n_main_) fail("DimMismatch", "membership point width");
    std::vector<LpConstraint> sub;
    for (const auto& r : rows_) {
        double shift = 0.0;
        for (int j = 0; j < n_main_; ++j) shift += r.a[j] * x[j];
        Vec ay(r.a.begin() + n_main_, r.a.end());
        double rhs = r.b - shift;
        if (n_aux_ == 0 || norm_inf(ay) == 0.0) {
            bool ok = r.rel == Rel::Ge   ? 0.0 >= rhs - tol
                      : r.rel == Rel::Le ? 0.0 <= rhs + tol
                                         : std::fabs(rhs) <= tol;
            if (!ok) return false;
            continue;
        }
        if (r.rel == Rel::Eq) {
            sub.push_back({ay, Rel::Ge, rhs - tol});
            sub.push_back({std::move(ay), Rel::Le, rhs + tol});
        } else {
            sub.push_back({std::move(ay), r.rel, r.rel == Rel::Ge ? rhs - tol : rhs + tol});
        }
    }
    return sub.empty() ? true : lp_feasible(n_aux_, sub, nullptr);
}

bool StackedSet::recession_member(const Vec& dir, double tol) const {
    if (static_cast<int>(dir.size()) != n_main_) fail("DimMismatch", "recession direction width");
    // Homogeneous system: the projected recession cone is the projection of
    // the recession cone, so searching an auxiliary direction is exact.
    std::vector<LpConstraint> sub;
    for (const auto& r : rows_) {
        double shift = 0.0;
        for (int j = 0; j < n_main_; ++j) shift += r.a[j] * dir[j];
        Vec ay(r.a.begin() + n_main_, r.a.end());
        double rhs = -shift;
        if (n_aux_ == 0 || norm_inf(ay) == 0.0) {
            bool ok = r.rel == Rel::Ge   ? 0.0 >= rhs - tol
                      : r.rel == Rel::Le ? 0.0 <= rhs + tol
                                         : std::fabs(rhs) <= tol;
            if (!ok) return false;
            continue;
        }
        if (r.rel == Rel::Eq) {
            sub.push_back({ay, Rel::Ge, rhs - tol});
            sub.push_back({std::move(ay), Rel::Le, rhs + tol});
        } else {
            sub.push_back({std::move(ay), r.rel, r.rel == Rel::Ge ? rhs - tol : rhs + tol});
        }
    }
    return sub.empty() ? true : lp_feasible(n_aux_, sub, nullptr);
}

double StackedSet::support(const Vec& c) const {
    if (static_cast<int>(c.size()) != n_main_) fail("DimMismatch", "support direction width");
    Vec ext(total_dim(), 0.0);
    std::copy(c.begin(), c.end(), ext.begin());
    auto res = solve_lp(ext, rows_);
    switch (res.status) {
        case LpResult::Status::Optimal: return res.value;
        case LpResult::Status::Unbounded: return -kInf;
        default: return kInf;
    }
}

Vec StackedSet::argmin(const Vec& c) const {
    Vec ext(total_dim(), 0.0);
    std::copy(c.begin(), c.end(), ext.begin());
    auto res = solve_lp(ext, rows_);
    if (res.status != LpResult::Status::Optimal)
        fail("NoMinimizer", "support direction has no attained minimum");
    return Vec(res.x.begin(), res.x.begin() + n_main_);
}

StackedSet stacked_intersect(const StackedSet& a, const StackedSet& b) {
    if (a.main_dim() != b.main_dim()) fail("DimMismatch", "stacked intersection dims");
    const int nm = a.main_dim(), na = a.aux_dim(), nb = b.aux_dim();
    std::vector<LpConstraint> rows;
    for (const auto& r : a.rows()) {
        Vec v(nm + na + nb, 0.0);
        std::copy(r.a.begin(), r.a.end(), v.begin());
        rows.push_back({std::move(v), r.rel, r.b});
    }
    for (const auto& r : b.rows()) {
        Vec v(nm + na + nb, 0.0);
        std::copy(r.a.begin(), r.a.begin() + nm, v.begin());
        std::copy(r.a.begin() + nm, r.a.end(), v.begin() + nm + na);
        rows.push_back({std::move(v), r.rel, r.b});
    }
    return StackedSet(nm, na + nb, std::move(rows));
}

StackedSet stacked_sum(const StackedSet& a, const StackedSet& b) {
    if (a.main_dim() != b.main_dim()) fail("DimMismatch", "stacked sum dims");
    // Layout [x | z | auxA | auxB]: a's rows act on z, b's on x - z.
    const int nm = a.main_dim(), na = a.aux_dim(), nb = b.aux_dim();
    const int total = nm + nm + na + nb;
    std::vector<LpConstraint> rows;
    for (const auto& r : a.rows()) {
        Vec v(total, 0.0);
        for (int j = 0; j < nm; ++j) v[nm + j] = r.a[j];
        std::copy(r.a.begin() + nm, r.a.end(), v.begin() + nm + nm);
        rows.push_back({std::move(v), r.rel, r.b});
    }
    for (const auto& r : b.rows()) {
        Vec v(total, 0.0);
        for (int j = 0; j < nm; ++j) {
            v[j] = r.a[j];
            v[nm + j] = -r.a[j];
        }
        std::copy(r.a.begin() + nm, r.a.end(), v.begin() + nm + nm + na);
        rows.push_back({std::move(v), r.rel, r.b});
    }
    return StackedSet(nm, nm + na + nb, std::move(rows));
}

ProjectedRows fm_project(int nvars, int keep, std::vector<LpConstraint> rows) {
    ProjectedRows out;
    for (auto& r : rows) {
        if (static_cast<int>(r.a.size()) != nvars) fail("DimMismatch", "projection row width");
        if (r.rel == Rel::Le) {  // canonicalize to Ge/Eq
            for (double& c : r.a) c = -c;
            r.b = -r.b;
            r.rel = Rel::Ge;
        }
        normalize_row(r);
    }

    auto classify = [&](std::vector<LpConstraint>& rs) {
        std::vector<LpConstraint> kept;
        for (auto& r : rs) {
            if (row_zero(r)) {
                bool bad = r.rel == Rel::Eq ? std::fabs(r.b) > kFeas : r.b > kFeas;
                if (bad) out.infeasible = true;
                continue;
            }
            kept.push_back(std::move(r));
        }
        rs = std::move(kept);
    };
    classify(rows);

    // Engine choice: wide systems go straight to the polar engine, whose
    // cost tracks the answer; the rest run Fourier-Motzkin, which is cheaper
    // on small systems but can mire in intermediate bulk, so it keeps a
    // pristine copy to restart from if a round blows past the guards.
    if (!out.infeasible && nvars - keep >= 24 && rows.size() >= 48)
        return dd_project(nvars, keep, rows);
    const std::vector<LpConstraint> pristine =
        nvars > keep ? rows : std::vector<LpConstraint>{};

    // Equality rows touching an eliminated variable are exact substitutions.
    for (;;) {
        if (out.infeasible) break;
        int pr = -1, pv = -1;
        double best = 0.0;
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            if (rows[i].rel != Rel::Eq) continue;
            for (int v = keep; v < nvars; ++v) {
                double c = std::fabs(rows[i].a[v]);
                if (c > kSnap && c > best) {
                    best = c;
                    pr = i;
                    pv = v;
                }
            }
        }
        if (pr < 0) break;
        LpConstraint piv = rows[pr];
        rows.erase(rows.begin() + pr);
        double inv = 1.0 / piv.a[pv];
        for (auto& r : rows) {
            if (r.a[pv] == 0.0) continue;
            double f = r.a[pv] * inv;
            for (int j = 0; j < nvars; ++j) r.a[j] -= f * piv.a[j];
            r.a[pv] = 0.0;
            r.b -= f * piv.b;
            normalize_row(r);
        }
        classify(rows);
    }

    // Fourier-Motzkin on the remaining eliminated variables (Ge rows only by
    // now).  Order: fewest pos*neg combinations first; deterministic ties.
    // Each row carries the set of post-substitution rows it derives from; a
    // combination using more than eliminated+1 of them is implied by the rest
    // and dropped on the spot (Chernikov's rule), a cheap filter for the
    // early rounds.  The LP sweep after every round is what actually keeps
    // the row count from compounding.
    struct DerivedRow {
        LpConstraint c;
        std::vector<std::uint64_t> anc;
        int nanc = 0;
    };
    const int words = static_cast<int>((rows.size() + 63) / 64);
    std::vector<DerivedRow> drows(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        drows[i].c = std::move(rows[i]);
        drows[i].anc.assign(words, 0);
        drows[i].anc[i / 64] = std::uint64_t{1} << (i % 64);
        drows[i].nanc = 1;
    }
    rows.clear();

    auto zero_row_bad = [](const LpConstraint& r) {
        return r.rel == Rel::Eq ? std::fabs(r.b) > kFeas : r.b > kFeas;
    };
    // One elimination round: split on the sign of v, combine each pos row
    // with each neg row, then filter, dedupe and prune the result.  Pruning
    // is skipped on the last round, where bulk no longer compounds.
    auto run_round = [&](std::vector<DerivedRow> cur, int v, int elim, bool do_prune,
                         bool* bad) -> std::vector<DerivedRow> {
        std::vector<DerivedRow> zero, pos, neg;
        for (auto& r : cur) {
            if (r.c.a[v] > kSnap) pos.push_back(std::move(r));
            else if (r.c.a[v] < -kSnap) neg.push_back(std::move(r));
            else {
                r.c.a[v] = 0.0;
                if (row_zero(r.c)) {
                    if (zero_row_bad(r.c)) *bad = true;
                    continue;
                }
                zero.push_back(std::move(r));
            }
        }
        cur = std::move(zero);
        for (const auto& p : pos)
            for (const auto& m : neg) {
                DerivedRow w;
                w.anc.resize(words);
                int nanc = 0;
                for (int k = 0; k < words; ++k) {
                    w.anc[k] = p.anc[k] | m.anc[k];
                    nanc += std::popcount(w.anc[k]);
                }
                if (nanc > elim + 1) continue;
                w.nanc = nanc;
                double sp = 1.0 / p.c.a[v], sm = -1.0 / m.c.a[v];
                w.c.a.resize(nvars);
                for (int j = 0; j < nvars; ++j) w.c.a[j] = sp * p.c.a[j] + sm * m.c.a[j];
                w.c.a[v] = 0.0;
                w.c.b = sp * p.c.b + sm * m.c.b;
                w.c.rel = Rel::Ge;
                normalize_row(w.c);
                if (row_zero(w.c)) {
                    if (zero_row_bad(w.c)) *bad = true;
                    continue;
                }
                cur.push_back(std::move(w));
            }

        // Same-normal merge as dedupe_rows, keeping the smaller ancestor set
        // on ties so later drops stay sharp.
        std::sort(cur.begin(), cur.end(), [](const DerivedRow& x, const DerivedRow& y) {
            return lex_row_less(x.c, y.c);
        });
        std::vector<DerivedRow> merged;
        for (auto& d : cur) {
            if (!merged.empty() && merged.back().c.rel == d.c.rel && merged.back().c.a == d.c.a) {
                auto& kept = merged.back();
                if (d.c.rel == Rel::Eq && std::fabs(d.c.b - kept.c.b) > kFeas) *bad = true;
                if (d.c.b > kept.c.b) {
                    kept.c.b = d.c.b;
                    kept.anc = std::move(d.anc);
                    kept.nanc = d.nanc;
                } else if (d.c.b == kept.c.b && d.nanc < kept.nanc) {
                    kept.anc = std::move(d.anc);
                    kept.nanc = d.nanc;
                }
                continue;
            }
            merged.push_back(std::move(d));
        }
        cur = std::move(merged);

        if (do_prune && cur.size() > 8) {
            std::vector<LpConstraint> cs;
            cs.reserve(cur.size());
            for (const auto& d : cur) cs.push_back(d.c);
            auto mask = lp_prune_mask(cs, bad);
            if (!*bad) {
                std::vector<DerivedRow> left;
                for (std::size_t i = 0; i < cur.size(); ++i)
                    if (mask[i]) left.push_back(std::move(cur[i]));
                cur = std::move(left);
            }
        }
        return cur;
    };

    // The elimination order decides how much intermediate bulk appears, and
    // raw combination count is a poor guide on its own: a round that makes
    // more rows can still collapse to fewer after pruning.  So the cheapest
    // few candidates are simulated and the smallest outcome wins; candidates
    // past the budget are never simulated, and if all of them are past it
    // raw count decides alone.
    constexpr long kLookahead = 512;
    constexpr std::size_t kLookaheadCands = 3;
    std::vector<int> pending;
    for (int v = keep; v < nvars; ++v) pending.push_back(v);
    int eliminated = 0;
    const bool fmlog = getenv("RT_FM_LOG") != nullptr;  // TEMP
    if (fmlog)
        fprintf(stderr, "[fm] start nvars=%d keep=%d rows=%zu\n", nvars, keep, drows.size());
    while (!pending.empty() && !out.infeasible) {
        std::vector<std::pair<long, int>> cost;  // (raw combination count, var)
        cost.reserve(pending.size());
        for (int v : pending) {
            long np = 0, nn = 0;
            for (const auto& r : drows) {
                if (r.c.a[v] > kSnap) ++np;
                else if (r.c.a[v] < -kSnap) ++nn;
            }
            cost.emplace_back(np * nn, v);
        }
        std::sort(cost.begin(), cost.end());
        if (fmlog && getenv("RT_FM_COSTS")) {  // TEMP
            fprintf(stderr, "[fm] costs r%d:", eliminated);
            for (const auto& [cc, vv] : cost) fprintf(stderr, " v%d=%ld", vv, cc);
            fprintf(stderr, "\n");
        }
        const bool last = pending.size() == 1;
        int chosen = -1;
        std::vector<DerivedRow> next;
        if (const char* ord = getenv("RT_FM_ORDER")) {  // TEMP
            int v = -1;
            if (std::string_view(ord) == "asc") v = *std::min_element(pending.begin(), pending.end());
            else if (std::string_view(ord) == "desc") v = *std::max_element(pending.begin(), pending.end());
            else if (std::string_view(ord) == "maxraw") v = cost.back().second;
            if (v >= 0) {
                next = run_round(std::move(drows), v, eliminated + 1, !last, &out.infeasible);
                chosen = v;
                if (out.infeasible) break;
                if (fmlog)
                    fprintf(stderr, "[fm] round=%d var=%d (forced) -> rows=%zu pending=%zu\n",
                            eliminated, chosen, next.size(), pending.size() - 1);
                drows = std::move(next);
                pending.erase(std::find(pending.begin(), pending.end(), chosen));
                ++eliminated;
                continue;
            }
        }
        if (cost.front().first <= kLookahead && !last) {
            std::size_t bestn = 0;
            for (std::size_t k = 0; k < std::min(cost.size(), kLookaheadCands); ++k) {
                if (cost[k].first > kLookahead || out.infeasible) break;
                auto sim = run_round(drows, cost[k].second, eliminated + 1, true,
                                     &out.infeasible);
                if (chosen < 0 || sim.size() < bestn) {
                    chosen = cost[k].second;
                    bestn = sim.size();
                    next = std::move(sim);
                }
            }
        } else {
            chosen = cost.front().second;
            next = run_round(std::move(drows), chosen, eliminated + 1, !last,
                             &out.infeasible);
        }
        if (out.infeasible) break;
        if (fmlog)  // TEMP
            fprintf(stderr, "[fm] round=%d var=%d cheapest=%ld -> rows=%zu pending=%zu\n",
                    eliminated, chosen, cost.front().first, next.size(), pending.size() - 1);
        if (next.size() > 3000 && getenv("RT_FM_DUMP")) {  // TEMP
            static bool dumped = false;
            if (!dumped) {
                dumped = true;
                FILE* f = fopen("/tmp/fm_state.txt", "w");
                fprintf(f, "%d %zu\n", nvars, next.size());
                for (const auto& d : next) {
                    fprintf(f, "%d %.17g ", static_cast<int>(d.c.rel), d.c.b);
                    for (double v : d.c.a) fprintf(f, "%.17g ", v);
                    fprintf(f, "\n");
                }
                fclose(f);
            }
        }
        drows = std::move(next);
        pending.erase(std::find(pending.begin(), pending.end(), chosen));
        ++eliminated;
    }

    if (out.infeasible) {
        out.rows = {{Vec(keep, 0.0), Rel::Ge, 1.0}};
        return out;
    }
    rows.reserve(drows.size());
    for (auto& d : drows) rows.push_back(std::move(d.c));
    for (auto& r : rows) r.a.resize(keep);  // eliminated columns are all zero by now
    dedupe_rows(rows, &out.infeasible);
    // A bulky last round is left as-is: redundant rows cost their consumers
    // one cheap LP each, far less than a sweep at this size would.
    if (rows.size() <= 2 * kLpPruneKeepCap) lp_prune(rows, &out.infeasible);
    if (out.infeasible) {
        out.rows = {{Vec(keep, 0.0), Rel::Ge, 1.0}};
        return out;
    }
    std::sort(rows.begin(), rows.end(), lex_row_less);
    out.rows = std::move(rows);
    return out;
}

bool stacked_subset(const StackedSet& a, const StackedSet& b, double tol) {
    return stacked_subset_witness(a, b, tol, nullptr);
}

bool stacked_subset_witness(const StackedSet& a, const StackedSet& b, double tol, Vec* witness) {
    if (a.main_dim() != b.main_dim()) fail("DimMismatch", "stacked subset dims");
    if (!a.feasible()) return true;
    auto pb = fm_project(b.total_dim(), b.main_dim(), b.rows());
    if (pb.infeasible) {
        if (witness) a.feasible(witness);
        return false;
    }
    auto check_dir = [&](const Vec& dir, double rhs) {
        Vec ext(a.total_dim(), 0.0);
        std::copy(dir.begin(), dir.end(), ext.begin());
        auto res = solve_lp(ext, a.rows());
        if (res.status == LpResult::Status::Infeasible) return true;
        const double s = res.status == LpResult::Status::Optimal ? res.value : -kInf;
        if (s >= rhs - tol) return true;
        if (witness) {
            Vec x = res.x;
            if (res.status == LpResult::Status::Unbounded) {
                // walk the improving ray until the facet is violated by 1
                const double drift = dot(ext, res.ray);
                const double step = std::max(0.0, (dot(ext, x) - rhs + 1.0) /
                                                      std::max(1e-12, -drift));
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += step * res.ray[i];
            }
            *witness = Vec(x.begin(), x.begin() + a.main_dim());
        }
        return false;
    };
    for (const auto& r : pb.rows) {
        if (r.rel == Rel::Eq) {
            if (!check_dir(r.a, r.b)) return false;
            if (!check_dir(negate(r.a), -r.b)) return false;
        } else {
            if (!check_dir(r.a, r.b)) return false;
        }
    }
    return true;
}

int stacked_dim(const ScenarioTree& tree) {
    return static_cast<int>(tree.leaves().size()) * tree.assets();
}

Vec stack_claim(const ScenarioTree& tree, const AdaptedVector& x) {
    if (x.t != tree.horizon()) fail("TimeOrder", "claims are stacked at the horizon");
    Vec out(stacked_dim(tree));
    const int d = tree.assets();
    for (size_t p = 0; p < x.values.size(); ++p)
        for (int k = 0; k < d; ++k) out[p * d + k] = x.values[p][k];
    return out;
}

AdaptedVector unstack_claim(const ScenarioTree& tree, const Vec& stacked) {
    if (static_cast<int>(stacked.size()) != stacked_dim(tree))
        fail("DimMismatch", "stacked claim width");
    AdaptedVector out;
    out.t = tree.horizon();
    const int d = tree.assets();
    out.values.assign(tree.leaves().size(), Vec(d, 0.0));
    for (size_t p = 0; p < out.values.size(); ++p)
        for (int k = 0; k < d; ++k) out.values[p][k] = stacked[p * d + k];
    return out;
}

}  // namespace risktool
