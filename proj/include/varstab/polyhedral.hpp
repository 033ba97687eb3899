#pragma once

#include <vector>

#include "varstab/common.hpp"

namespace varstab {

/**
 * {y : A_eq y = b_eq, A_in y <= b_in} with an on-demand vertex cache.
 *
 * Vertices are enumerated for dimension <= 6 by solving every square
 * subsystem made of the equalities plus (dim - rank(A_eq)) inequality rows.
 * The cache is filled by enumerate_vertices(); concurrent readers must only
 * call it beforehand.
 */
class PolyhedralSet {
public:
    static constexpr int kMaxVertexDim = 6;

    PolyhedralSet() = default;
    explicit PolyhedralSet(int dim);

    /// The empty set in R^dim (used for points outside dom g).
    static PolyhedralSet empty_set(int dim);

    int dim() const { return dim_; }
    void add_equality(const Vec& row, double rhs);
    void add_inequality(const Vec& row, double rhs);

    const Mat& A_eq() const { return A_eq_; }
    const Vec& b_eq() const { return b_eq_; }
    const Mat& A_in() const { return A_in_; }
    const Vec& b_in() const { return b_in_; }

    /// Constraint check with absolute tolerance scaled by 1 + |rhs|.
    bool contains(const Vec& y, double tol = 1e-9) const;
    /// LP feasibility check (true for sets built by empty_set()).
    bool is_empty() const;

    /// No-op when dim() > kMaxVertexDim.
    void enumerate_vertices(double tol = 1e-9, double dedup_tol = 1e-8);
    bool vertices_enumerated() const { return enumerated_; }
    /// Sorted in descending lexicographic order. Throws ConfigError if not enumerated.
    const std::vector<Vec>& vertices() const;

    /// Dimension of the affine hull of the vertices (-1 when there are none).
    int vertex_affine_dimension(double tol = 1e-9) const;

    /// min and max of w.y over the vertices.
    std::pair<double, double> support_range(const Vec& w) const;

private:
    int dim_ = 0;
    bool known_empty_ = false;
    Mat A_eq_;
    Vec b_eq_;
    Mat A_in_;
    Vec b_in_;
    bool enumerated_ = false;
    std::vector<Vec> vertices_;
};

} // namespace varstab
