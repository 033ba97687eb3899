#pragma once

#include <vector>

#include "varstab/common.hpp"

namespace varstab {

struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

/**
 * Multivariate polynomial in canonical form: exponent patterns are unique,
 * sorted, and carry nonzero coefficients.
 */
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

    /// Builds the canonical form; throws InputError on a bad exponent list.
    Polynomial(int num_vars, std::vector<Monomial> terms);

    int num_vars() const { return num_vars_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    /// Total degree (0 for the zero polynomial).
    int degree() const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    int num_vars_ = 0;
    std::vector<Monomial> terms_;
};

/// Vector-valued polynomial map R^n -> R^m.
struct SmoothMap {
    int domain_dim = 0;
    std::vector<Polynomial> components;

    int range_dim() const { return static_cast<int>(components.size()); }
    Vec value(const Vec& x) const;
    /// m x n Jacobian.
    Mat jacobian(const Vec& x) const;
};

} // namespace varstab
