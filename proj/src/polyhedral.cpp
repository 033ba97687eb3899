#include "varstab/polyhedral.hpp"

#include <algorithm>
#include <cmath>

#include "varstab/lp.hpp"

namespace varstab {

namespace {

void append_row(Mat& A, Vec& b, const Vec& row, double rhs) {
    A.conservativeResize(A.rows() + 1, row.size());
    A.row(A.rows() - 1) = row.transpose();
    b.conservativeResize(b.size() + 1);
    b[b.size() - 1] = rhs;
}

int matrix_rank(const Mat& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<Mat> qr(M);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

} // namespace

PolyhedralSet::PolyhedralSet(int dim)
    : dim_(dim), A_eq_(0, dim), b_eq_(0), A_in_(0, dim), b_in_(0) {}

PolyhedralSet PolyhedralSet::empty_set(int dim) {
    PolyhedralSet s(dim);
    s.known_empty_ = true;
    s.enumerated_ = true;
    return s;
}

void PolyhedralSet::add_equality(const Vec& row, double rhs) {
    if (row.size() != dim_) throw InputError("PolyhedralSet: row dimension mismatch");
    append_row(A_eq_, b_eq_, row, rhs);
    enumerated_ = known_empty_;
    if (!known_empty_) vertices_.clear();
}

void PolyhedralSet::add_inequality(const Vec& row, double rhs) {
    if (row.size() != dim_) throw InputError("PolyhedralSet: row dimension mismatch");
    append_row(A_in_, b_in_, row, rhs);
    enumerated_ = known_empty_;
    if (!known_empty_) vertices_.clear();
}

bool PolyhedralSet::contains(const Vec& y, double tol) const {
    if (known_empty_ || y.size() != dim_) return false;
    for (Eigen::Index i = 0; i < A_eq_.rows(); ++i)
        if (std::abs(A_eq_.row(i).dot(y) - b_eq_[i]) > tol * (1.0 + std::abs(b_eq_[i]))) return false;
    for (Eigen::Index i = 0; i < A_in_.rows(); ++i)
        if (A_in_.row(i).dot(y) - b_in_[i] > tol * (1.0 + std::abs(b_in_[i]))) return false;
    return true;
}

bool PolyhedralSet::is_empty() const {
    if (known_empty_) return true;
    if (enumerated_ && !vertices_.empty()) return false;
    LpResult r = solve_lp(Vec::Zero(dim_), A_eq_, b_eq_, A_in_, b_in_);
    if (r.status == LpStatus::iteration_limit) throw NumericalFailure("PolyhedralSet: emptiness LP did not terminate");
    return r.status == LpStatus::infeasible;
}

void PolyhedralSet::enumerate_vertices(double tol, double dedup_tol) {
    if (known_empty_ || enumerated_) return;
    if (dim_ > kMaxVertexDim) return;
    vertices_.clear();
    const int r = matrix_rank(A_eq_);
    const int k = dim_ - r;
    const int nin = static_cast<int>(A_in_.rows());
    if (k > nin) {
        enumerated_ = true;
        return;
    }
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        Mat M(A_eq_.rows() + k, dim_);
        Vec rhs(A_eq_.rows() + k);
        M.topRows(A_eq_.rows()) = A_eq_;
        rhs.head(A_eq_.rows()) = b_eq_;
        for (int i = 0; i < k; ++i) {
            M.row(A_eq_.rows() + i) = A_in_.row(pick[i]);
            rhs[A_eq_.rows() + i] = b_in_[pick[i]];
        }
        if (dim_ == 0) {
            Vec y(0);
            if (contains(y, tol)) vertices_.push_back(y);
        } else if (matrix_rank(M) == dim_) {
            Vec y = M.colPivHouseholderQr().solve(rhs);
            double resid = (M * y - rhs).cwiseAbs().maxCoeff();
            if (resid <= tol * (1.0 + rhs.cwiseAbs().maxCoeff()) && contains(y, tol)) {
                bool dup = false;
                for (const auto& w : vertices_)
                    if ((w - y).cwiseAbs().maxCoeff() <= dedup_tol) dup = true;
                if (!dup) vertices_.push_back(y);
            }
        }
        // next k-combination of {0..nin-1}
        int i = k - 1;
        while (i >= 0 && pick[i] == nin - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    std::sort(vertices_.begin(), vertices_.end(), [](const Vec& a, const Vec& b) { return lex_less(b, a); });
    enumerated_ = true;
}

const std::vector<Vec>& PolyhedralSet::vertices() const {
    if (!enumerated_) throw ConfigError("PolyhedralSet: vertices not enumerated");
    return vertices_;
}

int PolyhedralSet::vertex_affine_dimension(double tol) const {
    const auto& v = vertices();
    if (v.empty()) return -1;
    Mat D(dim_, static_cast<Eigen::Index>(v.size()) - 1);
    for (std::size_t i = 1; i < v.size(); ++i) D.col(static_cast<Eigen::Index>(i) - 1) = v[i] - v[0];
    if (D.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<Mat> qr(D);
    qr.setThreshold(tol);
    return static_cast<int>(qr.rank());
}

std::pair<double, double> PolyhedralSet::support_range(const Vec& w) const {
    const auto& v = vertices();
    if (v.empty()) throw ProbeError("support_range on a set without vertices");
    double lo = kInf, hi = -kInf;
    for (const auto& y : v) {
        lo = std::min(lo, w.dot(y));
        hi = std::max(hi, w.dot(y));
    }
    return {lo, hi};
}

} // namespace varstab
