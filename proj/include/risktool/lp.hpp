#pragma once

#include <vector>

#include "risktool/common.hpp"

namespace risktool {

enum class Rel { Ge, Le, Eq };

struct LpConstraint {
    Vec a;
    Rel rel = Rel::Ge;
    double b = 0.0;
};

/// Result of  min c.x  over free variables subject to linear constraints.
///
/// For Optimal, `dual` holds one multiplier per input constraint with the
/// convention  c = sum_i dual[i] * a_i  on the active set, dual >= 0 for Ge
/// rows, <= 0 for Le rows, free for Eq rows, and  value = dual . b.
/// For Unbounded, `x` is a feasible point and `ray` an improving direction
/// (c.ray < 0) so that x + s*ray stays feasible for all s >= 0.
struct LpResult {
    enum class Status { Optimal, Unbounded, Infeasible } status = Status::Infeasible;
    double value = 0.0;
    Vec x;
    Vec dual;
    Vec ray;
};

LpResult solve_lp(const Vec& c, const std::vector<LpConstraint>& cons);

/// Feasibility of the system alone (phase 1 only).
bool lp_feasible(int nvars, const std::vector<LpConstraint>& cons, Vec* point = nullptr);

}  // namespace risktool
