#include "varstab/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "varstab/parallel.hpp"
#include "varstab/tilted_model.hpp"

namespace varstab {

namespace {

constexpr int kMaxQpRows = 16;

struct QpSolution {
    bool ok = false;
    Vec d;
    Vec lam;  // one per inequality row
    Vec mu;   // one per equality row
};

// min 0.5 d'Wd + g'd  s.t.  A d <= b, E d = e, with W positive definite.
// Active sets are tried in order of increasing size; the first KKT point wins.
QpSolution solve_small_qp(const Mat& W, const Vec& g, const Mat& A, const Vec& b, const Mat& E, const Vec& e) {
    const int n = static_cast<int>(g.size());
    const int p = static_cast<int>(A.rows());
    const int q = static_cast<int>(E.rows());
    if (p > kMaxQpRows) throw UnsupportedOperation("solver: too many inequality rows for the active-set QP");

    std::vector<unsigned> masks(1u << p);
    for (unsigned s = 0; s < masks.size(); ++s) masks[s] = s;
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned a, unsigned c) { return std::popcount(a) < std::popcount(c); });

    for (unsigned mask : masks) {
        std::vector<int> act;
        for (int j = 0; j < p; ++j)
            if (mask & (1u << j)) act.push_back(j);
        const int k = static_cast<int>(act.size());
        if (k + q > n) continue;
        const int size = n + k + q;
        Mat K = Mat::Zero(size, size);
        Vec rhs(size);
        K.topLeftCorner(n, n) = W;
        rhs.head(n) = -g;
        for (int i = 0; i < k; ++i) {
            K.block(n + i, 0, 1, n) = A.row(act[i]);
            K.block(0, n + i, n, 1) = A.row(act[i]).transpose();
            rhs[n + i] = b[act[i]];
        }
        for (int i = 0; i < q; ++i) {
            K.block(n + k + i, 0, 1, n) = E.row(i);
            K.block(0, n + k + i, n, 1) = E.row(i).transpose();
            rhs[n + k + i] = e[i];
        }
        Eigen::FullPivLU<Mat> lu(K);
        if (!lu.isInvertible()) continue;
        Vec sol = lu.solve(rhs);
        Vec d = sol.head(n);
        bool valid = true;
        for (int i = 0; i < k && valid; ++i)
            if (sol[n + i] < -1e-12) valid = false;
        for (int j = 0; j < p && valid; ++j)
            if (!(mask & (1u << j)) && A.row(j).dot(d) > b[j] + 1e-10 * (1.0 + std::abs(b[j]))) valid = false;
        if (!valid) continue;
        QpSolution out;
        out.ok = true;
        out.d = d;
        out.lam = Vec::Zero(p);
        for (int i = 0; i < k; ++i) out.lam[act[i]] = std::max(sol[n + i], 0.0);
        out.mu = sol.segment(n + k, q);
        return out;
    }
    return {};
}

Mat make_positive_definite(const Mat& H) {
    Mat S = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    double floor = 1e-8 * std::max(1.0, S.cwiseAbs().maxCoeff());
    double lo = es.eigenvalues().minCoeff();
    if (lo < floor) S.diagonal().array() += floor - lo;
    return S;
}

class LocalSolver {
public:
    LocalSolver(const TiltedModel& model, const Vec& xbar, double radius, const SolveConfig& cfg)
        : model_(model), xbar_(xbar), radius_(radius), cfg_(cfg) {}

    long evaluations = 0;

    double value(const Vec& x) {
        ++evaluations;
        if ((x - xbar_).norm() > radius_ * (1 + 1e-12)) return kInf;
        return model_.tilted_value(x, feas_tol());
    }

    double feas_tol() const { return cfg_.refine_tol; }

    Vec refine(const Vec& x0, double spacing) {
        if (!model_.smooth()) return compass(x0, spacing);
        if (model_.n() == 1 && !model_.has_rows() && !model_.has_hessian()) return bisect_1d(x0, spacing);
        if (!model_.has_gradient()) return compass(x0, spacing);
        return sqp(x0);
    }

private:
    const TiltedModel& model_;
    Vec xbar_;
    double radius_;
    const SolveConfig& cfg_;

    double merit(const Vec& x, double rho) {
        ++evaluations;
        double viol = std::max(0.0, (x - xbar_).squaredNorm() - radius_ * radius_);
        if (model_.num_ineq() > 0) viol += model_.ineq(x).cwiseMax(0.0).sum();
        if (model_.num_eq() > 0) viol += model_.eq(x).cwiseAbs().sum();
        return model_.objective(x) + rho * viol;
    }

    double total_violation(const Vec& x) const {
        double viol = std::max(0.0, (x - xbar_).squaredNorm() - radius_ * radius_);
        if (model_.num_ineq() > 0) viol += model_.ineq(x).cwiseMax(0.0).sum();
        if (model_.num_eq() > 0) viol += model_.eq(x).cwiseAbs().sum();
        return viol;
    }

    Vec project_ball(Vec x) const {
        double r = (x - xbar_).norm();
        if (r > radius_) x = xbar_ + (x - xbar_) * (radius_ / r);
        return x;
    }

    // Least-norm step putting the QP-active rows back on their zero level at `y`.
    Vec second_order_correction(const Vec& y, const Mat& A, const Vec& lam, const Mat& E) {
        const int p = model_.num_ineq();
        std::vector<int> act;
        for (int j = 0; j < p; ++j)
            if (lam[j] > 0) act.push_back(j);
        const int q = static_cast<int>(E.rows());
        if (act.empty() && q == 0) return Vec();
        Mat R(static_cast<int>(act.size()) + q, y.size());
        Vec r(R.rows());
        Vec c = p > 0 ? model_.ineq(y) : Vec();
        for (std::size_t i = 0; i < act.size(); ++i) {
            R.row(i) = A.row(act[i]);
            r[i] = -c[act[i]];
        }
        if (q > 0) {
            R.bottomRows(q) = E;
            r.tail(q) = -model_.eq(y);
        }
        Vec corr = R.completeOrthogonalDecomposition().solve(r);
        return corr.allFinite() ? corr : Vec();
    }

    // SQP on the tilted objective with the ball as one more inequality row.
    Vec sqp(Vec x) {
        const int n = model_.n();
        const int p = model_.num_ineq();
        const int q = model_.num_eq();
        Vec lam = Vec::Zero(p + 1);
        Vec mu = Vec::Zero(q);
        double rho = 1.0;
        bool hessian_reset = false;
        for (int it = 0; it < cfg_.refine_iters; ++it) {
            Vec g = model_.gradient(x);
            Mat H = model_.hessian(x) + model_.rows_hessian(x, lam.head(p), mu);
            H.diagonal().array() += 2.0 * lam[p];
            Mat W = make_positive_definite(H);

            Mat A(p + 1, n);
            Vec b(p + 1);
            if (p > 0) {
                A.topRows(p) = model_.ineq_jacobian(x);
                b.head(p) = -model_.ineq(x);
            }
            A.row(p) = 2.0 * (x - xbar_).transpose();
            b[p] = radius_ * radius_ - (x - xbar_).squaredNorm();
            Mat E = model_.eq_jacobian(x);
            Vec e = -model_.eq(x);

            QpSolution qp = solve_small_qp(W, g, A, b, E, e);
            Vec d;
            if (qp.ok) {
                d = qp.d;
                rho = std::max(rho, 1.5 * std::max(qp.lam.cwiseAbs().maxCoeff(),
                                                   q > 0 ? qp.mu.cwiseAbs().maxCoeff() : 0.0) +
                                        1.0);
            } else {
                // Restoration: least-norm step onto the linearized violated rows.
                std::vector<int> rows;
                for (int j = 0; j <= p; ++j)
                    if (b[j] < 0) rows.push_back(j);
                Mat R(static_cast<int>(rows.size()) + q, n);
                Vec r(R.rows());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    R.row(i) = A.row(rows[i]);
                    r[i] = b[rows[i]];
                }
                if (q > 0) {
                    R.bottomRows(q) = E;
                    r.tail(q) = e;
                }
                if (R.rows() == 0) break;
                d = R.completeOrthogonalDecomposition().solve(r);
            }
            if (!d.allFinite()) break;

            double m0 = merit(x, rho);
            double viol0 = total_violation(x);
            double slope = g.dot(d) - rho * viol0;
            double t = 1.0;
            Vec trial;
            bool accepted = false;
            if (qp.ok) {
                // Second-order correction against curved constraints cutting the full step.
                Vec full = x + d;
                if (!(merit(full, rho) <= m0 + 1e-4 * std::min(slope, 0.0))) {
                    Vec corr = second_order_correction(full, A, qp.lam, E);
                    if (corr.size() && merit(full + corr, rho) <= m0 + 1e-4 * std::min(slope, 0.0)) {
                        trial = full + corr;
                        accepted = true;
                    }
                }
            }
            for (int ls = 0; ls < 60 && !accepted; ++ls) {
                trial = x + t * d;
                double m1 = merit(trial, rho);
                if (m1 <= m0 + 1e-4 * t * std::min(slope, 0.0)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            double step = accepted ? (trial - x).lpNorm<Eigen::Infinity>() : 0.0;
            if (step <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
                // A stall under a degenerate Lagrangian Hessian: retry once with the bare objective Hessian.
                if (hessian_reset || (lam.isZero(0.0) && mu.isZero(0.0))) break;
                hessian_reset = true;
                lam.setZero();
                mu.setZero();
                continue;
            }
            hessian_reset = false;
            x = trial;
            if (qp.ok) {
                lam = qp.lam;
                mu = qp.mu;
            }
            if (qp.ok && d.lpNorm<Eigen::Infinity>() <= 1e-3 * cfg_.refine_tol && total_violation(x) <= 1e-14)
                break;
        }
        return project_ball(x);
    }

    double derivative(const Vec& x) const { return model_.gradient(x)[0]; }

    double golden(double a, double b) {
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        auto f = [&](double t) { return value(Vec::Constant(1, t)); };
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + std::abs(a)); ++it) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        return fc <= fd ? c : d;
    }

    // One-dimensional closed forms with a gradient rule: sign bisection on the
    // derivative inside the grid bracket, boundary minima detected by sign.
    Vec bisect_1d(const Vec& x0, double spacing) {
        const double lo_bound = xbar_[0] - radius_;
        const double hi_bound = xbar_[0] + radius_;
        double a = std::max(lo_bound, x0[0] - spacing);
        double b = std::min(hi_bound, x0[0] + spacing);
        double ga = derivative(Vec::Constant(1, a));
        double gb = derivative(Vec::Constant(1, b));
        evaluations += 2;
        if (a == lo_bound && ga >= 0) return Vec::Constant(1, a);
        if (b == hi_bound && gb <= 0) return Vec::Constant(1, b);
        if (!(ga < 0 && gb > 0)) return Vec::Constant(1, golden(a, b));
        double lo = a, hi = b;
        for (int it = 0; it < 4000; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            double gm = derivative(Vec::Constant(1, mid));
            ++evaluations;
            if (gm == 0) return Vec::Constant(1, mid);
            if (gm < 0)
                lo = mid;
            else
                hi = mid;
        }
        Vec xl = Vec::Constant(1, lo), xh = Vec::Constant(1, hi);
        return value(xh) < value(xl) ? xh : xl;
    }

    Vec compass(Vec x, double spacing) {
        double fx = value(x);
        double step = spacing;
        const int n = static_cast<int>(x.size());
        while (step > 1e-3 * cfg_.refine_tol) {
            bool improved = false;
            for (int i = 0; i < n && !improved; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    Vec y = x;
                    y[i] += sgn * step;
                    double fy = value(y);
                    if (fy < fx) {
                        x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        return x;
    }
};

struct GridLayout {
    int per_axis = 0;
    double spacing = 0;
};

GridLayout grid_layout(int n, double radius, const SolveConfig& cfg) {
    GridLayout g;
    g.per_axis = cfg.grid_points_per_axis;
    while (g.per_axis > 5 && std::pow(static_cast<double>(g.per_axis), n) > static_cast<double>(cfg.max_grid_evals))
        g.per_axis -= 2;
    g.spacing = 2.0 * radius / (g.per_axis - 1);
    return g;
}

} // namespace

Localization make_localization(const ParametricProblem& p, double delta, double alpha, double v_radius,
                               double u_radius) {
    Localization loc;
    loc.xbar = p.xbar;
    loc.delta = delta;
    loc.alpha = alpha;
    loc.v_radius = v_radius;
    loc.u_radius = u_radius;
    validate(loc, p);
    return loc;
}

void validate(const Localization& loc, const ParametricProblem& p) {
    if (loc.xbar.size() != p.n) throw ConfigError("localization: xbar dimension mismatch");
    if (!(loc.delta > 0) || !std::isfinite(loc.delta)) throw ConfigError("localization: delta must be positive");
    if (!(loc.v_radius > 0) || !(loc.u_radius > 0)) throw ConfigError("localization: radii must be positive");
    if (std::isfinite(loc.alpha) && !(loc.alpha > eval_phi(p, p.xbar, Vec::Zero(p.m))))
        throw ConfigError("localization: alpha must exceed phi(xbar, 0)");
}

void validate(const SolveConfig& cfg) {
    if (cfg.grid_points_per_axis < 11 || cfg.grid_points_per_axis % 2 == 0)
        throw ConfigError("solver: grid_points_per_axis must be odd and >= 11");
    if (!(cfg.refine_tol > 0) || !(cfg.cluster_tol > 0)) throw ConfigError("solver: tolerances must be positive");
    if (cfg.refine_iters <= 0 || cfg.max_starts <= 0) throw ConfigError("solver: iteration counts must be positive");
}

ArgminResult solve_tilted(const ParametricProblem& p, const Localization& loc, const Vec& v, const Vec& u,
                          const SolveConfig& cfg) {
    if (v.size() != p.n || u.size() != p.m) throw InputError("solve_tilted: dimension mismatch in (v,u)");
    if (p.n > 6) throw UnsupportedOperation("solve_tilted: grid search is limited to n <= 6");
    validate(cfg);
    const double radius = loc.delta - cfg.refine_tol;
    if (!(radius > 0)) throw ConfigError("solve_tilted: delta must exceed refine_tol");

    TiltedModel model(p, u, v);
    LocalSolver local(model, loc.xbar, radius, cfg);
    const int n = p.n;
    GridLayout layout = grid_layout(n, radius, cfg);
    const int G = layout.per_axis;

    long total = 1;
    for (int i = 0; i < n; ++i) total *= G;
    std::vector<double> vals(total, kInf);
    std::vector<double> penalty(total, kInf);
    std::vector<int> idx(n);
    auto point_of = [&](long flat) {
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            int k = static_cast<int>(flat % G);
            flat /= G;
            x[i] = loc.xbar[i] - radius + k * layout.spacing;
        }
        return x;
    };
    bool any_finite = false;
    for (long f = 0; f < total; ++f) {
        Vec x = point_of(f);
        if ((x - loc.xbar).norm() > radius * (1 + 1e-12)) continue;
        vals[f] = local.value(x);
        if (std::isfinite(vals[f])) {
            any_finite = true;
        } else if (model.smooth() && model.has_rows()) {
            penalty[f] = model.objective(x) + 1e3 * model.violation(x);
        }
    }
    const std::vector<double>& rank = any_finite ? vals : penalty;

    // Grid basins: points no worse than their axis neighbours.
    std::vector<long> starts;
    long stride = 1;
    std::vector<long> strides(n);
    for (int i = 0; i < n; ++i) {
        strides[i] = stride;
        stride *= G;
    }
    for (long f = 0; f < total; ++f) {
        if (!std::isfinite(rank[f])) continue;
        bool is_min = true;
        for (int i = 0; i < n && is_min; ++i) {
            int k = static_cast<int>((f / strides[i]) % G);
            if (k > 0 && rank[f - strides[i]] < rank[f]) is_min = false;
            if (k < G - 1 && rank[f + strides[i]] < rank[f]) is_min = false;
        }
        if (is_min) starts.push_back(f);
    }
    if (starts.empty()) throw EmptyLocalProblem("solve_tilted: no feasible point in the localization");
    std::stable_sort(starts.begin(), starts.end(), [&](long a, long b) { return rank[a] < rank[b]; });
    if (static_cast<int>(starts.size()) > cfg.max_starts) starts.resize(cfg.max_starts);

    struct Candidate {
        Vec x;
        double value;
    };
    std::vector<Candidate> cands;
    for (long f : starts) {
        Vec x0 = point_of(f);
        Vec x = local.refine(x0, layout.spacing);
        double fx = local.value(x);
        if (std::isfinite(vals[f]) && !(fx <= vals[f])) {
            x = x0;
            fx = vals[f];
        }
        if (std::isfinite(fx)) cands.push_back({x, fx});
    }
    if (cands.empty()) throw EmptyLocalProblem("solve_tilted: refinement found no feasible point");

    double best = kInf;
    for (const auto& c : cands) best = std::min(best, c.value);
    // Ties are decided at refinement accuracy; cluster_tol only merges nearby points.
    const double value_window = cfg.refine_tol * (1.0 + std::abs(best));
    std::vector<Vec> close;
    for (const auto& c : cands)
        if (c.value <= best + value_window) close.push_back(c.x);
    std::sort(close.begin(), close.end(), lex_less);

    ArgminResult res;
    for (const auto& x : close) {
        bool merged = false;
        for (const auto& rep : res.minimizers)
            if ((x - rep).norm() <= cfg.cluster_tol) {
                merged = true;
                break;
            }
        if (!merged) res.minimizers.push_back(x);
    }
    res.value = best;
    res.single_valued = res.minimizers.size() == 1;
    for (const auto& c : cands)
        if (c.value == best && loc.delta - (c.x - loc.xbar).norm() <= 2.0 * cfg.refine_tol) res.boundary_hit = true;
    res.evaluations = local.evaluations;
    return res;
}

const Vec& SurfaceRow::argmin() const {
    if (!ok || result.minimizers.empty()) throw ProbeError("surface row has no minimizer: " + error);
    return result.minimizers.front();
}

ValueSurface value_surface(const ParametricProblem& p, const Localization& loc, const std::vector<Vec>& v_grid,
                           const std::vector<Vec>& u_grid, const SolveConfig& cfg) {
    ValueSurface s;
    s.v_count = v_grid.size();
    s.u_count = u_grid.size();
    s.rows.resize(v_grid.size() * u_grid.size());
    for (std::size_t iv = 0; iv < v_grid.size(); ++iv)
        for (std::size_t iu = 0; iu < u_grid.size(); ++iu) {
            auto& row = s.rows[iv * u_grid.size() + iu];
            row.v = v_grid[iv];
            row.u = u_grid[iu];
        }
    parallel_for(s.rows.size(), cfg.workers, [&](std::size_t i) {
        auto& row = s.rows[i];
        try {
            row.result = solve_tilted(p, loc, row.v, row.u, cfg);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    return s;
}

void write_surface_csv(std::ostream& out, const ValueSurface& surface, int n, int m) {
    for (int i = 0; i < n; ++i) out << "v_" << i + 1 << ',';
    for (int i = 0; i < m; ++i) out << "u_" << i + 1 << ',';
    out << "m_delta,";
    for (int i = 0; i < n; ++i) out << "x_" << i + 1 << ',';
    out << "single_valued,boundary_hit\n";
    out << std::setprecision(17);
    for (const auto& row : surface.rows) {
        for (int i = 0; i < n; ++i) out << row.v[i] << ',';
        for (int i = 0; i < m; ++i) out << row.u[i] << ',';
        if (row.ok) {
            out << row.result.value << ',';
            for (int i = 0; i < n; ++i) out << row.result.minimizers.front()[i] << ',';
            out << (row.result.single_valued ? 1 : 0) << ',' << (row.result.boundary_hit ? 1 : 0) << '\n';
        } else {
            out << "nan,";
            for (int i = 0; i < n; ++i) out << "nan,";
            out << "0,0\n";
        }
    }
}

} // namespace varstab
