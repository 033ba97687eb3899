#include "varstab/lp.hpp"

#include <cmath>

namespace varstab {

namespace {

// Tableau over standard-form variables; column `cols` holds the right-hand side.
struct Tableau {
    Mat t;
    std::vector<int> basis;
    int rows = 0;
    int cols = 0;

    void pivot(int r, int c) {
        t.row(r) /= t(r, c);
        for (int i = 0; i < t.rows(); ++i) {
            if (i == r) continue;
            double f = t(i, c);
            if (f != 0.0) t.row(i) -= f * t.row(r);
        }
        basis[r] = c;
    }

    // Minimizes the objective stored in the last row (reduced costs), entering
    // only columns with allowed[c] (Bland: first improving column).
    LpStatus run(const std::vector<bool>& allowed, double tol, int max_iter) {
        const int obj = rows;
        for (int it = 0; it < max_iter; ++it) {
            int enter = -1;
            for (int c = 0; c < cols; ++c) {
                if (allowed[c] && t(obj, c) < -tol) {
                    enter = c;
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            int leave = -1;
            double best = kInf;
            for (int r = 0; r < rows; ++r) {
                if (t(r, enter) > tol) {
                    double ratio = t(r, cols) / t(r, enter);
                    if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[r] < basis[leave])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter);
        }
        return LpStatus::iteration_limit;
    }
};

} // namespace

LpResult solve_lp(const Vec& c, const Mat& A_eq, const Vec& b_eq, const Mat& A_ub, const Vec& b_ub,
                  const std::vector<bool>& nonneg, double tol) {
    const int n = static_cast<int>(c.size());
    const int me = static_cast<int>(A_eq.rows());
    const int mu = static_cast<int>(A_ub.rows());
    if ((me > 0 && A_eq.cols() != n) || (mu > 0 && A_ub.cols() != n) || b_eq.size() != me || b_ub.size() != mu)
        throw InputError("solve_lp: inconsistent dimensions");

    // Standard form columns: for each original variable one column (nonneg) or
    // two (free split p - q), then one slack per inequality row.
    std::vector<int> pos_col(n), neg_col(n, -1);
    int ncol = 0;
    for (int j = 0; j < n; ++j) {
        pos_col[j] = ncol++;
        bool nn = !nonneg.empty() && nonneg[j];
        if (!nn) neg_col[j] = ncol++;
    }
    const int slack0 = ncol;
    ncol += mu;
    const int rows = me + mu;
    const int art0 = ncol;
    const int total = ncol + rows;

    Tableau tab;
    tab.rows = rows;
    tab.cols = total;
    tab.t = Mat::Zero(rows + 1, total + 1);
    tab.basis.assign(rows, -1);
    auto fill_row = [&](int r, const Eigen::RowVectorXd& a, double b, int slack) {
        double sign = b < 0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) {
            tab.t(r, pos_col[j]) = sign * a[j];
            if (neg_col[j] >= 0) tab.t(r, neg_col[j]) = -sign * a[j];
        }
        if (slack >= 0) tab.t(r, slack) = sign;
        tab.t(r, art0 + r) = 1.0;
        tab.t(r, total) = sign * b;
        tab.basis[r] = art0 + r;
    };
    for (int r = 0; r < me; ++r) fill_row(r, A_eq.row(r), b_eq[r], -1);
    for (int r = 0; r < mu; ++r) fill_row(me + r, A_ub.row(r), b_ub[r], slack0 + r);

    const int max_iter = 50 * (total + 10);

    // Phase I: minimize the sum of artificials.
    for (int r = 0; r < rows; ++r) tab.t.row(rows) -= tab.t.row(r);
    for (int r = 0; r < rows; ++r) tab.t(rows, art0 + r) = 0.0;
    std::vector<bool> allowed(total, true);
    LpStatus st = tab.run(allowed, tol, max_iter);
    if (st == LpStatus::iteration_limit) return {st, Vec(), 0.0};
    double scale = 1.0 + (rows > 0 ? tab.t.col(total).head(rows).cwiseAbs().maxCoeff() : 0.0);
    if (-tab.t(rows, total) > 1e-9 * scale) return {LpStatus::infeasible, Vec(), 0.0};

    // Drive zero-level artificials out of the basis.
    for (int r = 0; r < rows; ++r) {
        if (tab.basis[r] < art0) continue;
        for (int col = 0; col < art0; ++col) {
            if (std::abs(tab.t(r, col)) > 1e-9) {
                tab.pivot(r, col);
                break;
            }
        }
    }
    for (int col = art0; col < total; ++col) allowed[col] = false;

    // Phase II objective in reduced form.
    tab.t.row(rows).setZero();
    for (int j = 0; j < n; ++j) {
        tab.t(rows, pos_col[j]) = c[j];
        if (neg_col[j] >= 0) tab.t(rows, neg_col[j]) = -c[j];
    }
    for (int r = 0; r < rows; ++r) {
        int b = tab.basis[r];
        double f = tab.t(rows, b);
        if (f != 0.0) tab.t.row(rows) -= f * tab.t.row(r);
    }
    st = tab.run(allowed, tol, max_iter);
    if (st != LpStatus::optimal) return {st, Vec(), 0.0};

    Vec sol = Vec::Zero(total);
    for (int r = 0; r < rows; ++r) sol[tab.basis[r]] = tab.t(r, total);
    LpResult res;
    res.status = LpStatus::optimal;
    res.x.resize(n);
    for (int j = 0; j < n; ++j) res.x[j] = sol[pos_col[j]] - (neg_col[j] >= 0 ? sol[neg_col[j]] : 0.0);
    res.objective = c.dot(res.x);
    return res;
}

} // namespace varstab
