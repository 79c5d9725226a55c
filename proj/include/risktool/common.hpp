#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace risktool {

using Vec = std::vector<double>;

/// Error with a stable machine-readable code ("ProbabilityMismatch", ...) in
/// addition to the human-readable message.  The CLI maps codes to exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

/// All numerical tolerances in one place.  Defaults are the values every test
/// pins against; the CLI may override geo/num via flags.
struct Tolerances {
    double prob = 1e-9;   // probability mass checks
    double num = 1e-9;    // generic numeric comparisons, LP pivots
    double geo = 1e-8;    // geometric predicates (membership, subset)
    double dual = 1e-7;   // dual representation checks
    double nar_margin = 1e-6;  // strict-consistency margin for no-arbitrage certificates
    bool exact_hull = false;   // route hull computations through rational arithmetic
};

inline Tolerances& default_tols() {
    static Tolerances t;
    return t;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::fabs(x));
    return m;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator*(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline Vec negate(const Vec& a) { return -1.0 * a; }

/// Lexicographic comparison with tolerance; used for canonical orderings.
inline bool lex_less(const Vec& a, const Vec& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

inline bool approx_eq(const Vec& a, const Vec& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > tol) return false;
    return true;
}

/// Thread cap from RISKTOOL_THREADS (>=1).  Node computations within a tree
/// layer are independent; results are always merged by index, so the thread
/// count never changes output.
inline unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned cap = std::min(hw, 8u);
    if (const char* env = std::getenv("RISKTOOL_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<unsigned>(std::min<long>(v, 64));
    }
    return cap;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned nt = thread_cap();
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

using Rng = std::mt19937_64;

}  // namespace risktool
