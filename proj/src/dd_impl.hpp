#pragma once

// Double description over an abstract scalar.  Converts between the two
// representations of a polyhedral cone {y : a_j . y >= 0 (or = 0)} by
// inserting constraints one at a time into a generator set that is kept
// minimal throughout.  Lineality is carried explicitly: the cone is
// span(lines) + cone(rays) at every step, which keeps the insertion step
// exact for flat cones (subspaces, halfspaces, equality-constrained sets).

#include <cstdint>
#include <vector>

namespace risktool::detail {

struct Bitset {
    std::vector<std::uint64_t> w;

    explicit Bitset(int nbits = 0) : w((nbits + 63) / 64, 0) {}
    void set(int i) { w[i >> 6] |= std::uint64_t(1) << (i & 63); }
    bool subset_of(const Bitset& o) const {
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] & ~o.w[k]) return false;
        return true;
    }
    static Bitset intersect(const Bitset& a, const Bitset& b) {
        Bitset r;
        r.w.resize(a.w.size());
        for (std::size_t k = 0; k < a.w.size(); ++k) r.w[k] = a.w[k] & b.w[k];
        return r;
    }
};

template <class S>
struct DdRow {
    std::vector<S> a;
    bool eq = false;
};

template <class S>
struct DdOut {
    std::vector<std::vector<S>> rays;
    std::vector<std::vector<S>> lines;
};

// Policy supplies sign(S) -> {-1,0,1} and normalize(vector<S>&) -> bool
// (false when the vector is numerically zero).
template <class S, class Pol>
DdOut<S> dd_cone(int dim, const std::vector<DdRow<S>>& rows, const Pol& pol) {
    std::vector<std::vector<S>> lines;
    lines.reserve(dim);
    for (int i = 0; i < dim; ++i) {
        std::vector<S> e(dim, S(0));
        e[i] = S(1);
        lines.push_back(std::move(e));
    }

    struct Gen {
        std::vector<S> v;
        Bitset tight;
    };
    std::vector<Gen> rays;
    const int nrows = static_cast<int>(rows.size());

    auto dotv = [dim](const std::vector<S>& a, const std::vector<S>& b) {
        S s(0);
        for (int i = 0; i < dim; ++i) s += a[i] * b[i];
        return s;
    };
    auto axpy = [dim](std::vector<S>& y, const S& c, const std::vector<S>& x) {
        for (int i = 0; i < dim; ++i) y[i] -= c * x[i];
    };

    for (int j = 0; j < nrows; ++j) {
        const std::vector<S>& a = rows[j].a;
        const bool is_eq = rows[j].eq;

        // A line not annihilated by the row absorbs it entirely.
        int pl = -1;
        S pv(0);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            S v = dotv(a, lines[i]);
            if (pol.sign(v) != 0) {
                S av = pol.sign(v) < 0 ? S(-v) : v;
                S apv = pol.sign(pv) < 0 ? S(-pv) : pv;
                if (pl < 0 || av > apv) {
                    pl = static_cast<int>(i);
                    pv = v;
                }
            }
        }
        if (pl >= 0) {
            std::vector<S> lstar = lines[pl];
            S vstar = pv;
            if (pol.sign(vstar) < 0) {
                for (auto& c : lstar) c = -c;
                vstar = -vstar;
            }
            lines.erase(lines.begin() + pl);
            for (auto& l : lines) {
                S v = dotv(a, l);
                if (pol.sign(v) != 0) {
                    axpy(l, v / vstar, lstar);
                    pol.normalize(l);
                }
            }
            for (std::size_t i = 0; i < rays.size();) {
                S v = dotv(a, rays[i].v);
                if (pol.sign(v) != 0) axpy(rays[i].v, v / vstar, lstar);
                if (!pol.normalize(rays[i].v)) {
                    rays.erase(rays.begin() + i);
                    continue;
                }
                rays[i].tight.set(j);
                ++i;
            }
            if (!is_eq) {
                Gen g;
                g.v = std::move(lstar);
                pol.normalize(g.v);
                g.tight = Bitset(nrows);
                for (int i = 0; i < j; ++i) g.tight.set(i);
                rays.push_back(std::move(g));
            }
            continue;
        }

        std::vector<S> val(rays.size());
        std::vector<int> sg(rays.size());
        int npos = 0, nneg = 0;
        for (std::size_t i = 0; i < rays.size(); ++i) {
            val[i] = dotv(a, rays[i].v);
            sg[i] = pol.sign(val[i]);
            if (sg[i] > 0) ++npos;
            if (sg[i] < 0) ++nneg;
        }
        if (!is_eq && nneg == 0) {
            for (std::size_t i = 0; i < rays.size(); ++i)
                if (sg[i] == 0) rays[i].tight.set(j);
            continue;
        }
        if (is_eq && nneg == 0 && npos == 0) {
            for (auto& g : rays) g.tight.set(j);
            continue;
        }

        auto adjacent = [&](std::size_t p, std::size_t m) {
            Bitset both = Bitset::intersect(rays[p].tight, rays[m].tight);
            for (std::size_t r = 0; r < rays.size(); ++r) {
                if (r == p || r == m) continue;
                if (both.subset_of(rays[r].tight)) return false;
            }
            return true;
        };

        std::vector<Gen> combos;
        for (std::size_t p = 0; p < rays.size(); ++p) {
            if (sg[p] <= 0) continue;
            for (std::size_t m = 0; m < rays.size(); ++m) {
                if (sg[m] >= 0) continue;
                if (!adjacent(p, m)) continue;
                Gen g;
                g.v.resize(dim);
                for (int i = 0; i < dim; ++i)
                    g.v[i] = val[p] * rays[m].v[i] - val[m] * rays[p].v[i];
                if (!pol.normalize(g.v)) continue;
                g.tight = Bitset::intersect(rays[p].tight, rays[m].tight);
                g.tight.set(j);
                combos.push_back(std::move(g));
            }
        }
        std::vector<Gen> next;
        for (std::size_t i = 0; i < rays.size(); ++i) {
            if (sg[i] == 0) {
                rays[i].tight.set(j);
                next.push_back(std::move(rays[i]));
            } else if (sg[i] > 0 && !is_eq) {
                next.push_back(std::move(rays[i]));
            }
        }
        for (auto& g : combos) next.push_back(std::move(g));
        rays = std::move(next);
    }

    DdOut<S> out;
    out.rays.reserve(rays.size());
    for (auto& g : rays) out.rays.push_back(std::move(g.v));
    out.lines = std::move(lines);
    return out;
}

}  // namespace risktool::detail
