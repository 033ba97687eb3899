#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "varstab/problem.hpp"

namespace varstab {

/// Ball |x - xbar| < delta, attentive level alpha, and the (v,u) box radii.
struct Localization {
    Vec xbar;
    double delta = 0.5;
    double alpha = kInf;
    double v_radius = 0.1;
    double u_radius = 0.1;
};

struct SolveConfig {
    int grid_points_per_axis = 21;  ///< odd, >= 11
    int refine_iters = 200;
    double refine_tol = 1e-9;
    double cluster_tol = 1e-6;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Number of grid basins refined per solve.
    int max_starts = 24;
    /// Cap on grid evaluations; the per-axis count is reduced (kept odd) to fit.
    long max_grid_evals = 20000;
};

/// Localization for problem p with its anchor; throws ConfigError on bad values.
Localization make_localization(const ParametricProblem& p, double delta, double alpha = kInf,
                               double v_radius = 0.1, double u_radius = 0.1);
void validate(const Localization& loc, const ParametricProblem& p);
void validate(const SolveConfig& cfg);

struct ArgminResult {
    std::vector<Vec> minimizers;  ///< cluster representatives, lexicographically sorted
    double value = kInf;          ///< m_delta(v,u)
    bool single_valued = false;
    bool boundary_hit = false;
    long evaluations = 0;
};

/**
 * m_delta(v,u) and M_delta(v,u): minimizes phi(x,u) - v.(x - xbar) over the
 * closed ball of radius delta - refine_tol by grid multi-start and local
 * refinement. Throws EmptyLocalProblem when no feasible point is found.
 */
ArgminResult solve_tilted(const ParametricProblem& p, const Localization& loc, const Vec& v, const Vec& u,
                          const SolveConfig& cfg);

/**
 * Stationary points x with |x - xbar| < delta and phi(x,u) < alpha, i.e. the
 * points where Y(x,u,v) is nonempty, sorted lexicographically. Composite
 * problems use the KKT system; closed forms need a gradient rule.
 */
std::vector<Vec> truncated_stationary_map(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                          const Vec& u, const SolveConfig& cfg);

/// KKT residual of x for the tilted problem: stationarity (minimized over
/// admissible multipliers) plus primal violation, in the max norm.
double stationarity_residual(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v,
                             double active_tol = 1e-8);

struct SurfaceRow {
    Vec v;
    Vec u;
    ArgminResult result;
    bool ok = false;
    std::string error;

    /// First minimizer; throws ProbeError when the row failed.
    const Vec& argmin() const;
};

/// Rows in v-major order: row index = iv * |u_grid| + iu.
struct ValueSurface {
    std::vector<SurfaceRow> rows;
    std::size_t v_count = 0;
    std::size_t u_count = 0;
};

/// One solve per grid node; per-node failures become flagged rows.
ValueSurface value_surface(const ParametricProblem& p, const Localization& loc, const std::vector<Vec>& v_grid,
                           const std::vector<Vec>& u_grid, const SolveConfig& cfg);

/// Columns v_1..v_n, u_1..u_m, m_delta, x_1..x_n, single_valued, boundary_hit.
void write_surface_csv(std::ostream& out, const ValueSurface& surface, int n, int m);

} // namespace varstab
