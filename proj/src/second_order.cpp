#include "varstab/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "varstab/subdifferential.hpp"

namespace varstab {

namespace {

struct ActiveRow {
    int index;
    bool equality;
};

std::vector<ActiveRow> active_rows(const ParametricProblem& p, const Vec& x, const Vec& u, double tol) {
    const auto& c = p.composite();
    Vec z = c.F.value(x) + (u.size() ? u : Vec::Zero(p.m));
    std::vector<ActiveRow> out;
    if (auto* k = std::get_if<OrthantNonpos>(&c.g)) {
        for (int i = 0; i < k->s; ++i)
            if (z[i] >= -tol) out.push_back({i, false});
    } else if (std::holds_alternative<ZeroIndicator>(c.g)) {
        for (int i = 0; i < p.m; ++i) out.push_back({i, true});
    } else if (auto* b = std::get_if<Box>(&c.g)) {
        for (int i = 0; i < p.m; ++i) {
            if (b->lo[i] == b->hi[i])
                out.push_back({i, true});
            else if (z[i] <= b->lo[i] + tol || z[i] >= b->hi[i] - tol)
                out.push_back({i, false});
        }
    }
    return out;
}

void require_nlp(const ParametricProblem& p, const char* what) {
    if (!p.is_composite() || !piece_is_polyhedral(p.composite().g))
        throw UnsupportedOperation(std::string(what) + ": needs a composite problem with an indicator g");
}

MultiplierCheck check_multiplier(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& y,
                                 const SOSCOptions& opts, Mat* basis_out = nullptr) {
    Mat H = lagrangian_hessian(p, x, y);
    Mat B = critical_subspace(p, x, y, opts.mode, u, opts.active_tol);
    if (basis_out) *basis_out = B;
    MultiplierCheck c;
    c.y = y;
    c.min_eigenvalue = min_eigenvalue(B.transpose() * H * B);
    c.pass = c.min_eigenvalue > opts.pd_tol;
    return c;
}

} // namespace

std::string to_string(SubspaceMode mode) {
    return mode == SubspaceMode::all_active ? "all_active" : "strict_multipliers";
}

Mat lagrangian_hessian(const ParametricProblem& p, const Vec& x, const Vec& y) {
    require_nlp(p, "lagrangian_hessian");
    if (y.size() != p.m || x.size() != p.n) throw InputError("lagrangian_hessian: dimension mismatch");
    const auto& c = p.composite();
    Mat H = c.f0.hessian(x);
    for (int i = 0; i < p.m; ++i)
        if (y[i] != 0.0) H += y[i] * c.F.components[i].hessian(x);
    return 0.5 * (H + H.transpose());
}

Mat critical_subspace(const ParametricProblem& p, const Vec& x, const Vec& y, SubspaceMode mode, const Vec& u,
                      double active_tol) {
    require_nlp(p, "critical_subspace");
    const auto& F = p.composite().F;
    std::vector<Vec> grads;
    for (const auto& row : active_rows(p, x, u, active_tol)) {
        if (mode == SubspaceMode::strict_multipliers && !row.equality && !(std::abs(y[row.index]) > active_tol))
            continue;
        grads.push_back(F.components[row.index].gradient(x));
    }
    const int n = p.n;
    if (grads.empty()) return Mat::Identity(n, n);
    Mat G(static_cast<int>(grads.size()), n);
    for (std::size_t i = 0; i < grads.size(); ++i) G.row(i) = grads[i].transpose();
    Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cut) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

double min_eigenvalue(const Mat& S) {
    if (S.rows() == 0) return kInf;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

SOSCReport strong_sosc_over_multipliers(const ParametricProblem& p, const Vec& x, const Vec& v, const Vec& u,
                                        const SOSCOptions& opts) {
    require_nlp(p, "strong_sosc_over_multipliers");
    PolyhedralSet Y = multiplier_set(p, x, u, v, opts.active_tol);
    if (!Y.vertices_enumerated()) throw UnsupportedOperation("strong SOSC: multiplier set too large to enumerate");
    const auto& verts = Y.vertices();
    if (verts.empty()) throw ProbeError("strong SOSC: empty multiplier set at the given point");

    SOSCReport rep;
    rep.mode = opts.mode;
    rep.pd_tol = opts.pd_tol;
    rep.polytope_dim = Y.vertex_affine_dimension();
    for (std::size_t k = 0; k < verts.size(); ++k)
        rep.vertices.push_back(check_multiplier(p, x, u, verts[k], opts, k == 0 ? &rep.basis : nullptr));

    if (rep.polytope_dim == 1 && verts.size() == 2) {
        std::vector<double> grid = opts.theta_grid;
        if (grid.empty())
            for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
        auto at = [&](double t) {
            MultiplierCheck c = check_multiplier(p, x, u, (1 - t) * verts[0] + t * verts[1], opts);
            c.theta = t;
            return c;
        };
        for (double t : grid) rep.samples.push_back(at(t));
        for (std::size_t k = 1; k < rep.samples.size(); ++k) {
            if (rep.samples[k].pass == rep.samples[k - 1].pass) continue;
            double a = rep.samples[k - 1].theta, b = rep.samples[k].theta;
            bool pass_a = rep.samples[k - 1].pass;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                if (at(mid).pass == pass_a)
                    a = mid;
                else
                    b = mid;
            }
            rep.crossing_theta = 0.5 * (a + b);
            break;
        }
    } else if (verts.size() > 1) {
        std::mt19937_64 rng(opts.seed);
        std::exponential_distribution<double> expo(1.0);
        for (int s = 0; s < opts.interior_samples; ++s) {
            Vec w(verts.size());
            for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = expo(rng);
            w /= w.sum();
            Vec y = Vec::Zero(p.m);
            for (std::size_t i = 0; i < verts.size(); ++i) y += w[i] * verts[i];
            rep.samples.push_back(check_multiplier(p, x, u, y, opts));
        }
    }

    rep.all_multipliers_pass = true;
    rep.some_multipliers_pass = false;
    for (const auto* list : {&rep.vertices, &rep.samples})
        for (const auto& c : *list) {
            rep.all_multipliers_pass = rep.all_multipliers_pass && c.pass;
            rep.some_multipliers_pass = rep.some_multipliers_pass || c.pass;
        }
    return rep;
}

DfntEstimate strict_second_subdiff_estimate(const GraphSample& sample, const Vec& xbar, const Vec& vbar, double alpha,
                                            const std::vector<double>& taus, const std::vector<double>& radii,
                                            SecondOrderSample* harvested, const DfntOptions& opts) {
    if (sample.points.empty()) throw ProbeError("dfnt: empty graph sample");
    if (taus.empty() || radii.empty()) throw ConfigError("dfnt: tau ladder and neighbourhoods must be nonempty");
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] < radii[k - 1])) throw ConfigError("dfnt: neighbourhood radii must strictly decrease");

    DfntEstimate est;
    for (std::size_t r = 0; r < radii.size(); ++r) {
        const double rho = radii[r];
        const bool last = r + 1 == radii.size();
        std::vector<const GraphPoint*> pts;
        for (const auto& g : sample.points)
            if (g.f < alpha && (g.x - xbar).norm() <= rho && (g.v - vbar).norm() <= rho) pts.push_back(&g);
        double inf_ratio = kInf;
        std::size_t admissible = 0;
        for (double tau : taus) {
            for (const auto* a : pts)
                for (const auto* b : pts) {
                    if (a == b) continue;
                    Vec xi = (b->x - a->x) / tau;
                    Vec mu = (b->v - a->v) / tau;
                    if (xi.norm() > opts.quotient_bound || mu.norm() > opts.quotient_bound) continue;
                    double xn = xi.norm();
                    double ratio = xn > 0 ? mu.dot(xi) / (xn * xn) : kInf;
                    if (last && harvested) harvested->quadruples.push_back({xi, mu, tau, a->x, a->v, xn, ratio});
                    if (xn < opts.xi_tol) continue;
                    ++admissible;
                    inf_ratio = std::min(inf_ratio, ratio);
                }
        }
        est.trend.push_back({rho, inf_ratio});
        if (last) {
            est.value = inf_ratio;
            est.admissible = admissible;
            est.vacuous = admissible == 0;
        }
    }
    return est;
}

DfntEstimate default_dfnt(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                          int graph_points) {
    double radius = 0.5 * loc.delta;
    GraphSample sample = build_graph_sample(p, loc, radius, graph_points, cfg);
    Vec vbar = Vec::Zero(p.n);
    std::vector<double> radii{radius, radius / 2, radius / 4};
    std::vector<double> taus{radius / 4, radius / 16, radius / 64};
    return strict_second_subdiff_estimate(sample, loc.xbar, vbar, loc.alpha, taus, radii);
}

TiltCrosscheck tilt_crosscheck(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                               const CrosscheckOptions& opts) {
    TiltCrosscheck out;
    int per_axis = p.n == 1 ? opts.sweep_points : 5;
    ValueSurface sweep = value_surface(p, loc, box_grid(p.n, loc.v_radius, per_axis), {Vec::Zero(p.m)}, cfg);
    bool rows_ok = true;
    for (const auto& r : sweep.rows)
        if (!r.ok || !r.result.single_valued || r.result.boundary_hit) rows_ok = false;
    if (rows_ok) {
        ModulusEstimate lip = estimate_lipschitz(sweep, LipschitzMode::v_only, decade_scales(2 * loc.v_radius, 2));
        out.measured = lip.value;
        out.tilt_pass = lip.verdict == Verdict::pass;
    } else {
        out.measured = kInf;
    }
    DfntEstimate d = default_dfnt(p, loc, cfg, opts.graph_points);
    out.s_hat = d.value;
    out.dfnt = d;
    out.vacuous = d.vacuous;
    if (!d.vacuous && d.value > 0) {
        out.inverse_s = 1.0 / d.value;
        out.ratio = out.measured * d.value;
        out.violation = out.measured > out.inverse_s * (1 + opts.slack);
    }
    out.inconsistent = !d.vacuous && d.value <= 0 && out.tilt_pass;
    return out;
}

} // namespace varstab
