#include <algorithm>
#include <cmath>

#include "varstab/lp.hpp"
#include "varstab/solver.hpp"
#include "varstab/tilted_model.hpp"

namespace varstab {

namespace {

double fb(double a, double b) { return std::hypot(a, b) - a - b; }

// Partial derivatives of fb at (a,b); the kink at the origin uses the
// direction (1,1)/sqrt(2).
std::pair<double, double> fb_grad(double a, double b) {
    double r = std::hypot(a, b);
    if (r == 0) return {1.0 / std::sqrt(2.0) - 1.0, 1.0 / std::sqrt(2.0) - 1.0};
    return {a / r - 1.0, b / r - 1.0};
}

// Residual of the Fischer-Burmeister form of the KKT system in (x, lam, mu).
Vec kkt_fb_residual(const TiltedModel& m, const Vec& z) {
    const int n = m.n(), p = m.num_ineq(), q = m.num_eq();
    Vec x = z.head(n), lam = z.segment(n, p), mu = z.tail(q);
    Vec r(n + p + q);
    Vec grad = m.gradient(x);
    if (p > 0) grad += m.ineq_jacobian(x).transpose() * lam;
    if (q > 0) grad += m.eq_jacobian(x).transpose() * mu;
    r.head(n) = grad;
    if (p > 0) {
        Vec c = m.ineq(x);
        for (int j = 0; j < p; ++j) r[n + j] = fb(-c[j], lam[j]);
    }
    if (q > 0) r.tail(q) = m.eq(x);
    return r;
}

Mat kkt_fb_jacobian(const TiltedModel& m, const Vec& z) {
    const int n = m.n(), p = m.num_ineq(), q = m.num_eq();
    Vec x = z.head(n), lam = z.segment(n, p), mu = z.tail(q);
    Mat J = Mat::Zero(n + p + q, n + p + q);
    J.topLeftCorner(n, n) = m.hessian(x) + m.rows_hessian(x, lam, mu);
    if (p > 0) {
        Mat Jc = m.ineq_jacobian(x);
        Vec c = m.ineq(x);
        J.block(0, n, n, p) = Jc.transpose();
        for (int j = 0; j < p; ++j) {
            auto [da, db] = fb_grad(-c[j], lam[j]);
            J.block(n + j, 0, 1, n) = -da * Jc.row(j);
            J(n + j, n + j) = db;
        }
    }
    if (q > 0) {
        Mat Jh = m.eq_jacobian(x);
        J.block(0, n + p, n, q) = Jh.transpose();
        J.block(n + p, 0, q, n) = Jh;
    }
    return J;
}

// Levenberg-Marquardt on the KKT residual.
Vec levenberg_marquardt(const TiltedModel& m, Vec z, int iters) {
    Vec r = kkt_fb_residual(m, z);
    double cost = r.squaredNorm();
    double nu = 1e-3;
    for (int it = 0; it < iters && cost > 1e-30; ++it) {
        Mat J = kkt_fb_jacobian(m, z);
        Mat JtJ = J.transpose() * J;
        Vec rhs = -J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Mat A = JtJ;
            A.diagonal().array() += nu * (1.0 + JtJ.diagonal().array());
            Vec step = A.ldlt().solve(rhs);
            Vec trial = z + step;
            Vec rt = kkt_fb_residual(m, trial);
            double ct = rt.squaredNorm();
            if (std::isfinite(ct) && ct < cost) {
                z = trial;
                r = rt;
                cost = ct;
                nu = std::max(nu / 10.0, 1e-15);
                improved = true;
                break;
            }
            nu *= 10.0;
        }
        if (!improved) break;
    }
    return z;
}

std::vector<Vec> coarse_seeds(const Vec& xbar, double radius, int n) {
    int k = n == 1 ? 41 : n == 2 ? 11 : n == 3 ? 7 : n == 4 ? 5 : 3;
    std::vector<Vec> out;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    for (long f = 0; f < total; ++f) {
        Vec x(n);
        long rest = f;
        for (int i = 0; i < n; ++i) {
            x[i] = xbar[i] - radius + 2.0 * radius * static_cast<double>(rest % k) / (k - 1);
            rest /= k;
        }
        if ((x - xbar).norm() <= radius * (1 + 1e-12)) out.push_back(x);
    }
    return out;
}

void add_unique(std::vector<Vec>& pts, const Vec& x, double tol) {
    for (const auto& y : pts)
        if ((x - y).norm() <= tol) return;
    pts.push_back(x);
}

} // namespace

double stationarity_residual(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v,
                             double active_tol) {
    TiltedModel m(p, u, v);
    if (!m.smooth()) throw UnsupportedOperation("stationarity residual: g has no polyhedral or smooth form");
    if (!p.is_composite()) {
        const auto& cf = p.closed_form();
        if (!cf.grad_x) throw UnsupportedOperation("stationarity residual: closed form without a gradient rule");
        double r = m.gradient(x).lpNorm<Eigen::Infinity>();
        if (p.n == 1 && cf.subgradients && (u.size() == 0 || u.isZero(0.0))) {
            auto subs = cf.subgradients(x, 2);
            double lo = kInf, hi = -kInf;
            for (const auto& s : subs) {
                lo = std::min(lo, s[0]);
                hi = std::max(hi, s[0]);
            }
            r = std::min(r, std::max({lo - v[0], v[0] - hi, 0.0}));
        }
        return r;
    }
    const int n = p.n, pi = m.num_ineq(), q = m.num_eq();
    double viol = m.violation(x);
    Vec grad = m.gradient(x);
    std::vector<int> act;
    Vec c = m.ineq(x);
    for (int j = 0; j < pi; ++j)
        if (c[j] >= -active_tol) act.push_back(j);
    const int k = static_cast<int>(act.size());
    if (k + q == 0) return std::max(viol, grad.lpNorm<Eigen::Infinity>());

    // min t  s.t.  -t <= grad + Jc_A' lam + Jh' mu <= t,  lam >= 0.
    Mat Jc = m.ineq_jacobian(x);
    Mat Jh = m.eq_jacobian(x);
    const int nv = k + q + 1;
    Mat G(n, k + q);
    for (int i = 0; i < k; ++i) G.col(i) = Jc.row(act[i]).transpose();
    for (int i = 0; i < q; ++i) G.col(k + i) = Jh.row(i).transpose();
    Mat A_ub(2 * n, nv);
    Vec b_ub(2 * n);
    A_ub.topLeftCorner(n, k + q) = G;
    A_ub.col(nv - 1).head(n).setConstant(-1.0);
    b_ub.head(n) = -grad;
    A_ub.bottomLeftCorner(n, k + q) = -G;
    A_ub.col(nv - 1).tail(n).setConstant(-1.0);
    b_ub.tail(n) = grad;
    Vec cost = Vec::Zero(nv);
    cost[nv - 1] = 1.0;
    std::vector<bool> nonneg(nv, false);
    for (int i = 0; i < k; ++i) nonneg[i] = true;
    nonneg[nv - 1] = true;
    LpResult lp = solve_lp(cost, Mat(0, nv), Vec(0), A_ub, b_ub, nonneg);
    if (lp.status != LpStatus::optimal) throw NumericalFailure("stationarity residual: LP failed");
    return std::max(viol, lp.objective);
}

std::vector<Vec> truncated_stationary_map(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                          const Vec& u, const SolveConfig& cfg) {
    if (v.size() != p.n || u.size() != p.m) throw InputError("stationary map: dimension mismatch in (v,u)");
    validate(cfg);
    TiltedModel m(p, u, v);
    if (!m.smooth() || !m.has_gradient())
        throw UnsupportedOperation("stationary map: needs a gradient rule or a polyhedral/smooth g");
    const double radius = loc.delta - cfg.refine_tol;
    auto admissible = [&](const Vec& x) {
        if (!((x - loc.xbar).norm() < loc.delta)) return false;
        double phi = m.tilted_value(x, cfg.refine_tol) + v.dot(x - loc.xbar);
        return std::isfinite(phi) && phi < loc.alpha;
    };
    std::vector<Vec> found;

    if (p.n == 1 && !p.is_composite()) {
        // Sign changes of the derivative on a fine scan, refined by bisection.
        const int N = 4 * (cfg.grid_points_per_axis - 1) + 1;
        auto g = [&](double t) { return m.gradient(Vec::Constant(1, t))[0]; };
        const double a0 = loc.xbar[0] - radius;
        const double h = 2.0 * radius / (N - 1);
        bool any_point = false;
        double prev_x = a0, prev_g = g(a0);
        for (int i = 1; i < N; ++i) {
            double xi = a0 + i * h;
            double gi = g(xi);
            if (prev_g == 0) add_unique(found, Vec::Constant(1, prev_x), cfg.cluster_tol);
            if (prev_g * gi < 0) {
                double lo = prev_x, hi = xi, glo = prev_g;
                for (int it = 0; it < 4000; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    double gm = g(mid);
                    if (gm == 0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((gm < 0) == (glo < 0))
                        lo = mid;
                    else
                        hi = mid;
                }
                bool minimum_type = prev_g < 0;
                double glo_final = g(lo), ghi_final = g(hi);
                double x_star = std::abs(glo_final) <= std::abs(ghi_final) ? lo : hi;
                bool smooth_zero = std::min(std::abs(glo_final), std::abs(ghi_final)) <= cfg.refine_tol;
                if (minimum_type || smooth_zero) add_unique(found, Vec::Constant(1, x_star), cfg.cluster_tol);
            }
            prev_x = xi;
            prev_g = gi;
            any_point = true;
        }
        if (prev_g == 0 && any_point) add_unique(found, Vec::Constant(1, prev_x), cfg.cluster_tol);
    } else {
        const int dim = p.n + m.num_ineq() + m.num_eq();
        for (const auto& seed : coarse_seeds(loc.xbar, radius, p.n)) {
            Vec z = Vec::Zero(dim);
            z.head(p.n) = seed;
            z = levenberg_marquardt(m, z, std::max(cfg.refine_iters, 100));
            Vec x = z.head(p.n);
            if (!x.allFinite()) continue;
            if (stationarity_residual(p, x, u, v) > cfg.refine_tol) continue;
            add_unique(found, x, cfg.cluster_tol);
        }
    }

    std::vector<Vec> out;
    for (const auto& x : found)
        if (admissible(x)) out.push_back(x);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

} // namespace varstab
