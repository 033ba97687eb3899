#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varstab/probes.hpp"

namespace varstab {

enum class SubspaceMode { all_active, strict_multipliers };

std::string to_string(SubspaceMode mode);

/// grad^2 f0(x) + sum_i y_i grad^2 F_i(x) for a composite problem with indicator g.
Mat lagrangian_hessian(const ParametricProblem& p, const Vec& x, const Vec& y);

/**
 * Orthonormal basis (columns) of the vectors orthogonal to the active
 * constraint gradients at (x,u). strict_multipliers keeps only inequality
 * rows with y_i > active_tol; equality rows always count. No active rows
 * gives the identity.
 */
Mat critical_subspace(const ParametricProblem& p, const Vec& x, const Vec& y, SubspaceMode mode,
                      const Vec& u = Vec(), double active_tol = 1e-9);

/// Smallest eigenvalue of a symmetric matrix; +inf for an empty matrix.
double min_eigenvalue(const Mat& S);

struct MultiplierCheck {
    Vec y;
    double theta = std::numeric_limits<double>::quiet_NaN();  ///< set on a segment
    double min_eigenvalue = 0;
    bool pass = false;
};

struct SOSCReport {
    std::vector<MultiplierCheck> vertices;
    std::vector<MultiplierCheck> samples;  ///< theta grid on a segment, random interior points otherwise
    Mat basis;                             ///< subspace at the first vertex
    int polytope_dim = -1;
    bool all_multipliers_pass = false;
    bool some_multipliers_pass = false;
    /// theta where the verdict flips along a segment (first flip), if any.
    std::optional<double> crossing_theta;
    SubspaceMode mode = SubspaceMode::all_active;
    double pd_tol = 1e-8;
};

struct SOSCOptions {
    std::vector<double> theta_grid;  ///< empty: 21 evenly spaced points on [0,1]
    SubspaceMode mode = SubspaceMode::all_active;
    double pd_tol = 1e-8;
    double active_tol = 1e-9;
    int interior_samples = 32;
    std::uint64_t seed = 1;
};

/**
 * Restricted-Hessian test over the multiplier polytope Y(x,u,v). Segments
 * are parameterized y(theta) = (1-theta) V0 + theta V1 with V0, V1 the
 * vertices in their stored order. Throws ProbeError on an empty Y.
 */
SOSCReport strong_sosc_over_multipliers(const ParametricProblem& p, const Vec& x, const Vec& v, const Vec& u,
                                        const SOSCOptions& opts = {});

struct Quadruple {
    Vec xi;
    Vec mu;
    double tau = 0;
    Vec x;
    Vec v;
    double xi_norm = 0;
    double ratio = 0;  ///< mu.xi / |xi|^2
};

struct SecondOrderSample {
    std::vector<Quadruple> quadruples;
};

struct DfntEstimate {
    double value = kInf;
    bool vacuous = true;
    std::vector<TrendPoint> trend;  ///< per neighbourhood radius; +inf when vacuous there
    std::size_t admissible = 0;     ///< quadruples with |xi| >= xi_tol at the smallest radius
};

struct DfntOptions {
    double xi_tol = 1e-6;
    /// Difference quotients with |xi| or |mu| above this bound are discarded.
    double quotient_bound = 100.0;
};

/**
 * Harvests (xi, mu) = ((x'-x)/tau, (v'-v)/tau) from graph pairs inside the
 * neighbourhood |x - xbar| <= rho, |v - vbar| <= rho, f < alpha, for every
 * tau and rho. The modulus is the inf of mu.xi/|xi|^2 over quadruples with
 * |xi| >= xi_tol at the smallest rho, or vacuous (+inf) when there are none.
 */
DfntEstimate strict_second_subdiff_estimate(const GraphSample& sample, const Vec& xbar, const Vec& vbar, double alpha,
                                            const std::vector<double>& taus, const std::vector<double>& radii,
                                            SecondOrderSample* harvested = nullptr, const DfntOptions& opts = {});

struct TiltCrosscheck {
    double measured = 0;  ///< tilt Lipschitz constant from a v-sweep at u = 0
    double s_hat = kInf;  ///< definiteness modulus
    bool vacuous = false;
    double inverse_s = kInf;
    double ratio = std::numeric_limits<double>::quiet_NaN();  ///< measured * s_hat
    bool tilt_pass = false;
    bool violation = false;
    bool inconsistent = false;
    DfntEstimate dfnt;  ///< the estimate behind s_hat
};

struct CrosscheckOptions {
    double slack = 0.1;
    int sweep_points = 11;
    int graph_points = 41;
};

TiltCrosscheck tilt_crosscheck(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                               const CrosscheckOptions& opts = {});

/// Graph sample, tau ladder and neighbourhoods used by tilt_crosscheck and the report.
DfntEstimate default_dfnt(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                          int graph_points = 41);

} // namespace varstab
