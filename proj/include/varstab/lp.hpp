#pragma once

#include <vector>

#include "varstab/common.hpp"

namespace varstab {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vec x;
    double objective = 0.0;
};

/**
 * Dense two-phase simplex with Bland's rule for small problems:
 *
 *   minimize c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x_j >= 0 where nonneg[j].
 *
 * Empty matrices are allowed for either constraint block (use zero rows
 * with c.size() columns). An empty `nonneg` means all variables are free.
 */
LpResult solve_lp(const Vec& c, const Mat& A_eq, const Vec& b_eq, const Mat& A_ub, const Vec& b_ub,
                  const std::vector<bool>& nonneg = {}, double tol = 1e-10);

} // namespace varstab
