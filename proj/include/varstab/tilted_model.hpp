#pragma once

#include <vector>

#include "varstab/problem.hpp"

namespace varstab {

/**
 * Smooth-programming view of the tilted problem
 *
 *   minimize phi(x,u) - v.(x - xbar)   in x, for fixed (v,u),
 *
 * as objective + inequality rows c_j(x) <= 0 + equality rows h_k(x) = 0.
 * Smooth parts of g (squared norm) fold into the objective; indicator parts
 * become rows. Closed forms have no rows. A Euclidean-norm g has no smooth
 * view (smooth() == false).
 */
class TiltedModel {
public:
    TiltedModel(const ParametricProblem& p, const Vec& u, const Vec& v);

    int n() const { return n_; }
    bool smooth() const { return smooth_; }
    bool has_gradient() const { return has_gradient_; }
    bool has_hessian() const { return has_hessian_; }
    bool has_rows() const { return !ineq_.empty() || !eq_.empty(); }
    int num_ineq() const { return static_cast<int>(ineq_.size()); }
    int num_eq() const { return static_cast<int>(eq_.size()); }

    /// Smooth part of the objective (no indicator); requires smooth().
    double objective(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    /// Exact when available, else central differences of the gradient.
    Mat hessian(const Vec& x) const;

    Vec ineq(const Vec& x) const;
    Mat ineq_jacobian(const Vec& x) const;
    Vec eq(const Vec& x) const;
    Mat eq_jacobian(const Vec& x) const;
    /// sum_j lam_j hess c_j + sum_k mu_k hess h_k.
    Mat rows_hessian(const Vec& x, const Vec& lam, const Vec& mu) const;

    /// Largest row violation (0 when feasible).
    double violation(const Vec& x) const;

    /**
     * phi(x,u) - v.(x - xbar) with indicator rows accepted up to `feas_tol`;
     * +inf beyond it. Works for every problem kind.
     */
    double tilted_value(const Vec& x, double feas_tol = 0.0) const;

    /// Multiplier vector y for an indicator g reconstructed from row multipliers.
    Vec row_multipliers_to_y(const Vec& lam, const Vec& mu) const;

private:
    struct Row {
        int comp;      // component of F
        double sign;   // row = sign * (F_comp + u_comp) + offset
        double offset;
    };

    const ParametricProblem* p_;
    Vec u_;
    Vec v_;
    int n_ = 0;
    bool smooth_ = true;
    bool has_gradient_ = true;
    bool has_hessian_ = true;
    double sq_weight_ = 0.0;  // folded squared-norm weight
    std::vector<Row> ineq_;
    std::vector<Row> eq_;
};

} // namespace varstab
