#pragma once

#include <string>
#include <vector>

#include "varstab/problem.hpp"

namespace varstab {

struct RegistryEntry {
    std::string id;
    std::string description;
};

/// Built-in problems in listing order.
const std::vector<RegistryEntry>& registry_entries();

/**
 * Builds a registry problem. Accepted ids: ex32, ex33, quadratic,
 * quadratic:<s> (also quadratic(<s>)), neg_quadratic, abs1d.
 * Throws InputError on an unknown id or a bad parameter.
 */
ParametricProblem registry_build(const std::string& id);

/**
 * phi(x,u) = (s/2)|x - xbar|^2 - u.(x - xbar) + (c/2)|u|^2 on R^dim x R^dim.
 * The minimizer of the tilted problem is xbar + (u+v)/s.
 */
ParametricProblem make_quadratic(double s, int dim = 1, double u_curvature = 0.0, Vec xbar = Vec());

/// f(x) = -x^2/2 coupled to u through the equality x = u (composite, F(x) = -x, g = zero indicator).
ParametricProblem make_neg_quadratic_coupled();

/// The four-constraint nonlinear program with a segment of multipliers; row 0 of F optionally scaled.
ParametricProblem make_ex33(double f1_scale = 1.0);

} // namespace varstab
