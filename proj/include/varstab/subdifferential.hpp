#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "varstab/polyhedral.hpp"
#include "varstab/problem.hpp"

namespace varstab {

/// Subdifferential of a convex piece at one point.
struct GSubdifferential {
    enum class Kind { empty, polyhedral, ball };
    Kind kind = Kind::empty;
    PolyhedralSet set;  ///< valid for polyhedral (singletons are equality-only sets)
    Vec center;         ///< valid for ball
    double radius = 0;  ///< valid for ball
};

/**
 * dg(z). Points outside dom g give Kind::empty, which is a signal rather
 * than an error. `active_tol` decides which indicator constraints are active.
 */
GSubdifferential subdiff_g(const ConvexPiece& g, const Vec& z, double active_tol = 1e-9);

/// Direct membership test y in dg(z), independent of subdiff_g's set construction.
bool in_subdiff_g(const ConvexPiece& g, const Vec& z, const Vec& y, double tol = 1e-9);

/**
 * Y(x,u,v) = {y in dg(F(x)+u) : grad f0(x) + JF(x)^T y = v} for composite
 * problems. Vertices are enumerated when m <= 6. An infeasible system is a
 * valid (empty) result.
 */
PolyhedralSet multiplier_set(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v,
                             double active_tol = 1e-9);

/// Raw membership in Y(x,u,v): stationarity residual plus direct dg membership.
bool kkt_member(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v, const Vec& y,
                double tol = 1e-9);

struct CQReport {
    bool holds = false;
    /// A strictly feasible direction w when the condition holds, else a
    /// nonzero horizon multiplier y with JF^T y = 0 on the active rows.
    Vec certificate;
    std::string detail;
};

/**
 * Basic constraint qualification at (x,u). For polyhedral g this is MFCQ:
 * an L1-minimal w with grad F_i(x).w <= -1 on active inequalities and
 * grad F_i(x).w = 0 on equalities (which must be linearly independent).
 * Closed forms and finite convex g have full domain and always pass.
 */
CQReport check_basic_cq(const ParametricProblem& p, const Vec& x, const Vec& u, double active_tol = 1e-9);

/**
 * Draws `samples` random convex combinations of the (enumerated) vertices and
 * checks each with `member`. An empty `member` uses the set's own constraints.
 */
bool multiplier_set_convexity_test(const PolyhedralSet& set, int samples,
                                   const std::function<bool(const Vec&)>& member = {},
                                   std::uint64_t seed = 1);

} // namespace varstab
