#pragma once

#include <string>
#include <utility>
#include <vector>

#include "varstab/solver.hpp"

namespace varstab {

enum class Verdict { pass, fail, inconclusive, vacuous };

std::string to_string(Verdict v);

struct TrendPoint {
    double scale = 0;
    double estimate = 0;
};

/**
 * A modulus measured on shrinking neighbourhoods. `trend` scales strictly
 * decrease and `value` is the estimate at the smallest scale.
 */
struct ModulusEstimate {
    double value = kInf;
    std::pair<Vec, Vec> witness;
    std::vector<TrendPoint> trend;
    Verdict verdict = Verdict::inconclusive;
    std::string note;
};

enum class LipschitzMode { v_only, u_only, joint };

std::string to_string(LipschitzMode mode);

struct LipschitzOptions {
    double blowup_factor = 100.0;
    /// Minimum number of distance bands for a growth-based fail.
    int min_trend = 4;
};

/**
 * Sup of |M(p') - M(p)| / |p' - p| over surface row pairs with distance at
 * most rho, for each rho in `scales` (strictly decreasing). v_only pairs
 * share u, u_only pairs share v; distances use the mode's coordinates.
 *
 * Verdict from band quotients (pairs with distance in (rho_{k+1}, rho_k]):
 * fail when the last band exceeds the first by blowup_factor, or when at
 * least min_trend bands increase strictly with a negative log-log slope;
 * pass when the bands do not grow; inconclusive otherwise.
 * Throws ProbeError on a multi-valued row.
 */
ModulusEstimate estimate_lipschitz(const ValueSurface& surface, LipschitzMode mode, const std::vector<double>& scales,
                                   const LipschitzOptions& opts = {});

/// Scales radius * 10^-k (slightly inflated) for k = 0..count-1.
std::vector<double> decade_scales(double radius, int count);

struct EnvelopeResult {
    /// max |FD_v m + (M - xbar)|, the identity under test.
    double residual = 0;
    /// Residuals of the alternative forms grad m = M and grad m = -M.
    double residual_plus_m = 0;
    double residual_minus_m = 0;
    std::size_t nodes = 0;
};

/**
 * Central differences of m_delta(., u) at step h over v_grid against
 * -(M_delta(v,u) - xbar). Throws ConfigError when h < 10 refine_tol and
 * ProbeError on a multi-valued node.
 */
EnvelopeResult envelope_check_v(const ParametricProblem& p, const Localization& loc, const std::vector<Vec>& v_grid,
                                const Vec& u, double h, const SolveConfig& cfg);

struct EnvelopeUResult {
    /// Largest deviation of the u-difference quotients from Y (or its support interval).
    double residual = 0;
    std::size_t smooth_nodes = 0;
    std::size_t polytope_nodes = 0;
};

/**
 * Difference quotients of m_delta(v, .) against the multiplier set
 * Y(M_delta(v,u), u, v). A single multiplier is compared with central
 * differences; a multi-valued Y bounds the forward and backward quotients
 * along each axis by [min, max] of y_j over its vertices. Closed forms use
 * the partial u-gradient of phi at the minimizer.
 */
EnvelopeUResult envelope_check_u(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                 const std::vector<Vec>& u_grid, double h, const SolveConfig& cfg,
                                 double active_tol = 1e-9);

/**
 * Smallest e >= 0 making every midpoint test of m(v, .) + (e/2)|.|^2 on the
 * surface pass with slack -1e-8 (computed in closed form per triple).
 * value = +inf when no e <= e_max suffices.
 */
ModulusEstimate hypoconvexity_modulus(const ValueSurface& surface, double e_max = 1e4);

/// Points (x, v, f(x)) with v a subgradient of f = phi(., 0) at x.
struct GraphPoint {
    Vec x;
    Vec v;
    double f = 0;
};

struct GraphSample {
    std::vector<GraphPoint> points;
    double alpha = kInf;
};

/// A point x' with its value f(x'), used as the second argument of the prox inequality.
struct ProbePoint {
    Vec x;
    double f = 0;
};

struct ProxRegularityResult {
    ModulusEstimate r;  ///< prox-regularity level
    ModulusEstimate s;  ///< monotonicity level
    /// |r + s| per neighbourhood radius.
    std::vector<TrendPoint> gap;
};

/**
 * r = smallest level with f(x') >= f(x) + v.(x'-x) - (r/2)|x'-x|^2 over the
 * sample and probes; s = largest level with (v'-v).(x'-x) >= s|x'-x|^2 over
 * sample pairs. Both are evaluated on the neighbourhoods |x - xbar| <= radius
 * (and |v - vbar| <= v_radius) for each radius. Throws ProbeError with fewer
 * than two sample points.
 */
ProxRegularityResult prox_regularity_level(const GraphSample& sample, const std::vector<ProbePoint>& probes,
                                           const Vec& xbar, const Vec& vbar, const std::vector<double>& radii,
                                           double v_radius = kInf);

/**
 * Exact or sweep-based samples of gph df for f = phi(., 0) near xbar,
 * restricted to |x - xbar| < radius and f < alpha. Closed forms with a
 * subgradient rule are sampled on a grid; composites use stationary points
 * of the tilted problem over a v-grid.
 */
GraphSample build_graph_sample(const ParametricProblem& p, const Localization& loc, double radius, int points,
                               const SolveConfig& cfg);

/// Grid probe points with f = phi(., 0) finite inside the radius.
std::vector<ProbePoint> build_probe_points(const ParametricProblem& p, const Vec& xbar, double radius, int points);

struct DirectionLadder {
    Vec direction;
    std::vector<TrendPoint> quotients;  ///< (tau, |M(v,u+tau w) - M(v,u)| / tau)
    bool monotone = false;
    bool skipped = false;
};

struct InnerNormResult {
    double estimate = 0;
    std::vector<DirectionLadder> directions;
    int skipped = 0;
};

/**
 * max over unit directions w in u-space of the smallest-tau quotient
 * |M(v,u+tau w) - M(v,u)| / tau. Failed solves skip the direction.
 */
InnerNormResult graphical_derivative_inner_norm(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                                const Vec& u, int directions, const std::vector<double>& taus,
                                                const SolveConfig& cfg);

struct ClassifyOptions {
    int ray_steps = 0;  ///< decades per ray; 0 picks 5 for n + m <= 2 and 3 otherwise
    LipschitzOptions lipschitz;
    /// A continuity band at the smallest scale keeping this fraction of the largest band counts as a jump.
    double jump_fraction = 0.5;
};

struct StabilityVerdict {
    Verdict tilt_stable = Verdict::inconclusive;
    Verdict substable = Verdict::inconclusive;
    Verdict full_substable = Verdict::inconclusive;
    Verdict fully_stable = Verdict::inconclusive;
    ModulusEstimate lipschitz_v;
    ModulusEstimate lipschitz_u;
    ModulusEstimate lipschitz_joint;
    std::vector<std::string> notes;
};

/// Symmetric ray grid {0} u {+-radius 10^-k e_i}, lexicographically sorted.
std::vector<Vec> ray_grid(int dim, double radius, int steps);

/// Uniform grid with `points` nodes per axis on [-radius, radius]^dim.
std::vector<Vec> box_grid(int dim, double radius, int points);

StabilityVerdict classify(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                          const ClassifyOptions& opts = {});

} // namespace varstab
