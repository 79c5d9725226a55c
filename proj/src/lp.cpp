#include "risktool/lp.hpp"

#include <cmath>

namespace risktool {
namespace {

constexpr double kPivEps = 1e-9;
constexpr double kFeasEps = 1e-7;
constexpr long kTrustedAge = 64;

// Dense two-phase primal simplex on the standard form  min c.z, Az = b, z >= 0.
// Free variables are split, inequality rows get slacks, every row gets an
// artificial for phase 1.  Dantzig pricing with a permanent switch to Bland's
// rule once the objective stalls, so termination is guaranteed and every
// pivot choice is deterministic.
class Simplex {
public:
    Simplex(const Vec& c, const std::vector<LpConstraint>& cons) : n_(c.size()), m_(cons.size()) {
        for (const auto& con : cons)
            if (con.a.size() != static_cast<std::size_t>(n_))
                fail("DimMismatch", "constraint width does not match variable count");
        nslack_ = 0;
        for (const auto& con : cons)
            if (con.rel != Rel::Eq) ++nslack_;
        cols_ = 2 * n_ + nslack_ + m_;
        art0_ = 2 * n_ + nslack_;

        a_.assign(m_, Vec(cols_ + 1, 0.0));
        scale_.assign(m_, 1.0);
        flip_.assign(m_, 1.0);
        int si = 0;
        for (int i = 0; i < m_; ++i) {
            const auto& con = cons[i];
            double s = std::max(1.0, std::max(norm_inf(con.a), std::fabs(con.b)));
            scale_[i] = s;
            double f = 1.0;
            double b = con.b / s;
            if (b < 0.0) {
                f = -1.0;
                b = -b;
            }
            flip_[i] = f;
            for (int j = 0; j < n_; ++j) {
                double v = f * con.a[j] / s;
                a_[i][j] = v;
                a_[i][n_ + j] = -v;
            }
            if (con.rel != Rel::Eq) {
                double sl = (con.rel == Rel::Ge) ? -1.0 : 1.0;
                a_[i][2 * n_ + si] = f * sl;
                ++si;
            }
            a_[i][art0_ + i] = 1.0;
            a_[i][cols_] = b;
        }
        a0_ = a_;  // pristine copy for the dual solve

        cost_.assign(cols_, 0.0);
        for (int j = 0; j < n_; ++j) {
            cost_[j] = c[j];
            cost_[n_ + j] = -c[j];
        }

        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) basis_[i] = art0_ + i;
    }

    LpResult run() {
        LpResult res;
        // Phase 1: minimize the artificial sum.
        Vec pcost(cols_, 0.0);
        for (int i = 0; i < m_; ++i) pcost[art0_ + i] = 1.0;
        build_obj(pcost);
        // Stop at numerical zero only: anything looser leaks artificial mass
        // into the solution, and downstream tolerances are tighter than that.
        const double p1floor = 1e-12;
        if (!iterate(pcost, /*ban_artificials=*/false, nullptr, &p1floor))
            fail("LpStall", "phase 1 did not converge");
        if (objval(pcost) > kFeasEps) {
            res.status = LpResult::Status::Infeasible;
            return res;
        }
        expel_artificials();

        build_obj(cost_);
        bool unbounded = false;
        if (!iterate(cost_, /*ban_artificials=*/true, &unbounded))
            fail("LpStall", "phase 2 did not converge");

        res.x = extract_x();
        if (unbounded) {
            res.status = LpResult::Status::Unbounded;
            res.ray = unbounded_ray_;
            res.value = -kInf;
            return res;
        }
        res.status = LpResult::Status::Optimal;
        res.value = 0.0;
        for (int j = 0; j < n_; ++j) res.value += cost_[j] * res.x[j];
        res.dual = extract_duals();
        return res;
    }

    // Phase 1 only.
    bool feasible(Vec* point) {
        Vec pcost(cols_, 0.0);
        for (int i = 0; i < m_; ++i) pcost[art0_ + i] = 1.0;
        build_obj(pcost);
        const double p1floor = 1e-12;
        if (!iterate(pcost, false, nullptr, &p1floor))
            fail("LpStall", "phase 1 did not converge");
        if (objval(pcost) > kFeasEps) return false;
        if (point) *point = extract_x();
        return true;
    }

private:
    int n_, m_, nslack_ = 0, cols_ = 0, art0_ = 0;
    std::vector<Vec> a_, a0_;
    Vec cost_, scale_, flip_, obj_;
    std::vector<int> basis_;
    Vec unbounded_ray_;
    long dirty_ = 0;  // dense updates since the tableau was last exact

    void build_obj(const Vec& c) {
        obj_.assign(cols_ + 1, 0.0);
        for (int j = 0; j < cols_; ++j) obj_[j] = c[j];
        for (int i = 0; i < m_; ++i) {
            double cb = c[basis_[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j <= cols_; ++j) obj_[j] -= cb * a_[i][j];
        }
    }

    double objval(const Vec& c) {
        double v = 0.0;
        for (int i = 0; i < m_; ++i) v += c[basis_[i]] * a_[i][cols_];
        return v;
    }

    void pivot(int row, int col) {
        double p = a_[row][col];
        for (int j = 0; j <= cols_; ++j) a_[row][j] /= p;
        a_[row][col] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            double f = a_[i][col];
            if (std::fabs(f) < 1e-13) continue;
            for (int j = 0; j <= cols_; ++j) a_[i][j] -= f * a_[row][j];
            a_[i][col] = 0.0;
        }
        double f = obj_[col];
        if (std::fabs(f) > 0.0) {
            for (int j = 0; j <= cols_; ++j) obj_[j] -= f * a_[row][j];
            obj_[col] = 0.0;
        }
        basis_[row] = col;
        ++dirty_;
    }

    // Rebuilds the tableau at the current basis from the pristine matrix,
    // discarding the rounding error of every dense update since the last
    // rebuild.  Returns false, leaving the tableau alone, when the basis is
    // too close to singular to reproduce.
    bool refactorize(const Vec& c) {
        auto fresh = a0_;
        // Row-to-column pairing is fixed by the basis; the processing order
        // is free, so take the largest remaining pivot each step.
        std::vector<char> done(m_, 0);
        for (int step = 0; step < m_; ++step) {
            int i = -1;
            double best = 1e-13;
            for (int r = 0; r < m_; ++r) {
                if (done[r]) continue;
                const double p = std::fabs(fresh[r][basis_[r]]);
                if (p > best) {
                    best = p;
                    i = r;
                }
            }
            if (i < 0) return false;
            done[i] = 1;
            const int col = basis_[i];
            const double p = fresh[i][col];
            for (int j = 0; j <= cols_; ++j) fresh[i][j] /= p;
            fresh[i][col] = 1.0;
            for (int r = 0; r < m_; ++r) {
                if (r == i) continue;
                const double f = fresh[r][col];
                if (std::fabs(f) < 1e-13) continue;
                for (int j = 0; j <= cols_; ++j) fresh[r][j] -= f * fresh[i][j];
                fresh[r][col] = 0.0;
            }
        }
        a_ = std::move(fresh);
        dirty_ = 0;
        build_obj(c);
        return true;
    }

    // Returns false only on iteration-cap breach.  Sets *unbounded when an
    // improving direction has no blocking row.
    // floor: objective values at or below it are optimal by construction, so
    // iteration can stop there without proving optimality via reduced costs.
    // That matters on fully degenerate bases (cone systems), where the proof
    // would otherwise churn through noise-level pivots.
    bool iterate(const Vec& c, bool ban_artificials, bool* unbounded = nullptr,
                 const double* floor = nullptr) {
        long cap = 20000 + 40L * (m_ + cols_);
        bool bland = false;
        int stall = 0;
        long futile = 0;
        double last = objval(c);
        for (long it = 0; it < cap; ++it) {
            if (floor && objval(c) <= *floor) return true;
            // Numerical cycling guard.  Bland's rule terminates only in exact
            // arithmetic; with float noise a degenerate plateau can repeat
            // bases forever.  After a long futile stretch, reduced costs that
            // are all above noise level mean the basis is optimal in every
            // sense the callers can distinguish.
            if (futile > 4000) {
                double worst = 0.0;
                const int lim = ban_artificials ? art0_ : cols_;
                for (int j = 0; j < lim; ++j) worst = std::min(worst, obj_[j]);
                if (worst >= -1e-8) return true;
            }
            int col = -1;
            if (bland) {
                for (int j = 0; j < cols_; ++j) {
                    if (ban_artificials && j >= art0_) break;
                    if (obj_[j] < -kPivEps) {
                        col = j;
                        break;
                    }
                }
            } else {
                double best = -kPivEps;
                int lim = ban_artificials ? art0_ : cols_;
                for (int j = 0; j < lim; ++j)
                    if (obj_[j] < best) {
                        best = obj_[j];
                        col = j;
                    }
            }
            // Terminal verdicts are only believed near a freshly built
            // tableau; after a long pivot run the reduced costs and columns
            // carry too much accumulated error to decide from.
            if (col < 0) {
                if (dirty_ > kTrustedAge && refactorize(c)) continue;
                return true;  // optimal
            }

            // Lexicographic ratio test.  Ties on the ratio are broken by the
            // rows of B^-1 (the artificial block), which makes every pivot
            // decrease the leaving row lexicographically: no basis repeats,
            // even on the fully degenerate vertices cone problems live at.
            double rmin = kInf;
            for (int i = 0; i < m_; ++i)
                if (a_[i][col] > kPivEps) rmin = std::min(rmin, a_[i][cols_] / a_[i][col]);
            int row = -1;
            if (rmin < kInf) {
                auto lex_less = [&](int i, int j) {
                    const double pi = a_[i][col], pj = a_[j][col];
                    for (int k = 0; k < m_; ++k) {
                        const double vi = a_[i][art0_ + k] / pi;
                        const double vj = a_[j][art0_ + k] / pj;
                        if (vi < vj - 1e-12) return true;
                        if (vj < vi - 1e-12) return false;
                    }
                    return basis_[i] < basis_[j];
                };
                for (int i = 0; i < m_; ++i) {
                    if (a_[i][col] <= kPivEps) continue;
                    if (a_[i][cols_] / a_[i][col] > rmin + 1e-12) continue;
                    if (row < 0 || lex_less(i, row)) row = i;
                }
            }
            if (row < 0) {
                if (dirty_ > kTrustedAge && refactorize(c)) continue;
                if (unbounded) {
                    *unbounded = true;
                    unbounded_ray_ = ray_for(col);
                }
                return true;
            }
            pivot(row, col);

            double now = objval(c);
            if (now < last - 1e-12) {
                stall = 0;
                futile = 0;
                last = now;
            } else {
                ++futile;
                if (++stall > 200) bland = true;
            }
        }
        return false;
    }

    // Pivots each basic artificial out on the largest eligible entry.  When
    // phase 1 exits early this builds most of the basis, so the choice has to
    // follow partial pivoting or the tableau conditioning collapses.
    void expel_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < art0_) continue;
            int col = -1;
            double best = 1e-7;
            for (int j = 0; j < art0_; ++j)
                if (std::fabs(a_[i][j]) > best) {
                    best = std::fabs(a_[i][j]);
                    col = j;
                }
            if (col >= 0) pivot(i, col);
            // else: redundant row, the artificial stays basic at value zero
        }
    }

    Vec extract_x() const {
        Vec z(cols_, 0.0);
        for (int i = 0; i < m_; ++i) z[basis_[i]] = a_[i][cols_];
        Vec x(n_, 0.0);
        for (int j = 0; j < n_; ++j) x[j] = z[j] - z[n_ + j];
        return x;
    }

    Vec ray_for(int col) const {
        Vec d(cols_, 0.0);
        d[col] = 1.0;
        for (int i = 0; i < m_; ++i) d[basis_[i]] = -a_[i][col];
        Vec r(n_, 0.0);
        for (int j = 0; j < n_; ++j) r[j] = d[j] - d[n_ + j];
        return r;
    }

    // Solve B^T y = c_B against the pristine matrix, then unscale per row.
    Vec extract_duals() const {
        std::vector<Vec> sys(m_, Vec(m_ + 1, 0.0));
        for (int k = 0; k < m_; ++k) {
            for (int i = 0; i < m_; ++i) sys[k][i] = a0_[i][basis_[k]];
            sys[k][m_] = cost_safe(basis_[k]);
        }
        // Gaussian elimination with partial pivoting.
        std::vector<int> perm(m_);
        for (int i = 0; i < m_; ++i) perm[i] = i;
        for (int c = 0; c < m_; ++c) {
            int p = c;
            for (int r = c + 1; r < m_; ++r)
                if (std::fabs(sys[r][c]) > std::fabs(sys[p][c])) p = r;
            std::swap(sys[c], sys[p]);
            if (std::fabs(sys[c][c]) < 1e-12) continue;  // redundant direction
            for (int r = 0; r < m_; ++r) {
                if (r == c) continue;
                double f = sys[r][c] / sys[c][c];
                if (f == 0.0) continue;
                for (int j = c; j <= m_; ++j) sys[r][j] -= f * sys[c][j];
            }
        }
        Vec y(m_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (std::fabs(sys[i][i]) > 1e-12) y[i] = sys[i][m_] / sys[i][i];
        Vec out(m_, 0.0);
        for (int i = 0; i < m_; ++i) out[i] = flip_[i] * y[i] / scale_[i];
        return out;
    }

    double cost_safe(int j) const { return (j < cols_) ? cost_[j] : 0.0; }
};

void check_finite(const Vec& c, const std::vector<LpConstraint>& cons) {
    auto bad = [](double v) { return !std::isfinite(v); };
    for (double v : c)
        if (bad(v)) fail("LpBadInput", "non-finite objective coefficient");
    for (const auto& con : cons) {
        if (bad(con.b)) fail("LpBadInput", "non-finite right-hand side");
        for (double v : con.a)
            if (bad(v)) fail("LpBadInput", "non-finite constraint coefficient");
    }
}

}  // namespace

LpResult solve_lp(const Vec& c, const std::vector<LpConstraint>& cons) {
    check_finite(c, cons);
    Simplex s(c, cons);
    return s.run();
}

bool lp_feasible(int nvars, const std::vector<LpConstraint>& cons, Vec* point) {
    Vec c(nvars, 0.0);
    check_finite(c, cons);
    Simplex s(c, cons);
    return s.feasible(point);
}

}  // namespace risktool
