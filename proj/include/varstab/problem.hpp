#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "varstab/common.hpp"
#include "varstab/polynomial.hpp"

namespace varstab {

// Convex pieces g: R^m -> (-inf, +inf].

/// Indicator of K = R^s_- x R^(m-s); coordinates past s are unconstrained.
struct OrthantNonpos {
    int s = 0;
    int m = 0;
};

/// Indicator of {0} in R^m (equality constraints).
struct ZeroIndicator {
    int m = 0;
};

/// Indicator of the box [lo, hi]; infinite bounds are allowed.
struct Box {
    Vec lo;
    Vec hi;
};

/// weight * |z|.
struct EuclideanNorm {
    double weight = 1.0;
    int m = 0;
};

/// (weight / 2) * |z|^2.
struct SquaredNorm {
    double weight = 1.0;
    int m = 0;
};

using ConvexPiece = std::variant<OrthantNonpos, ZeroIndicator, Box, EuclideanNorm, SquaredNorm>;

int piece_dim(const ConvexPiece& g);
double piece_value(const ConvexPiece& g, const Vec& z);
/// True for the indicator-type pieces (classical nonlinear programming formats).
bool piece_is_polyhedral(const ConvexPiece& g);
std::string piece_name(const ConvexPiece& g);
void validate_piece(const ConvexPiece& g);

/// phi(x,u) = f0(x) + g(F(x) + u).
struct Composite {
    Polynomial f0;
    SmoothMap F;
    ConvexPiece g;
};

/**
 * Analytic problem given by rules rather than data. Only `value` is
 * mandatory. `subgradients(x, count)` samples the subdifferential of
 * f = phi(., 0) at x (count points along a set-valued piece) and is used for
 * exact graph samples.
 */
struct ClosedForm {
    std::function<double(const Vec& x, const Vec& u)> value;
    std::function<Vec(const Vec& x, const Vec& u)> grad_x;
    std::function<Vec(const Vec& x, const Vec& u)> grad_u;
    std::function<Mat(const Vec& x, const Vec& u)> hess_x;
    std::function<std::vector<Vec>(const Vec& x, int count)> subgradients;
};

struct ParametricProblem {
    std::string name;
    int n = 0;
    int m = 0;
    Vec xbar;
    std::variant<Composite, ClosedForm> body;

    std::string description;
    /// Reference values quoted alongside a built-in example, e.g. a nominal crossing point.
    std::map<std::string, double> reference_values;
    /// Registry id (with parameters) when built from the registry, else empty.
    std::string builtin_id;

    bool is_composite() const { return std::holds_alternative<Composite>(body); }
    const Composite& composite() const;
    const ClosedForm& closed_form() const;
};

/// Checks the structural invariants and that phi(xbar, 0) is finite.
void validate(const ParametricProblem& p);

/// phi(x,u); +inf when an indicator is violated.
double eval_phi(const ParametricProblem& p, const Vec& x, const Vec& u);

/// Gradient of f0 and m x n Jacobian of F at x (Composite only).
std::pair<Vec, Mat> grad_f0_and_jac_F(const ParametricProblem& p, const Vec& x);

} // namespace varstab
