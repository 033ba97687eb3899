#include "varstab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "varstab/parallel.hpp"
#include "varstab/subdifferential.hpp"

namespace varstab {

namespace {

std::string describe_node(const Vec& v, const Vec& u) {
    std::ostringstream out;
    out << "(v=[";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << "], u=[";
    for (Eigen::Index i = 0; i < u.size(); ++i) out << (i ? "," : "") << u[i];
    out << "])";
    return out.str();
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0; }
bool same_or_empty(const Vec& a, const Vec& b) { return a.size() == 0 ? b.size() == 0 : same(a, b); }

struct PairStat {
    double dist;
    double quotient;
    double jump;  // |M' - M|
    std::size_t i, j;
};

std::vector<PairStat> collect_pairs(const ValueSurface& s, LipschitzMode mode) {
    std::vector<PairStat> out;
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& a = s.rows[i];
        if (!a.ok) continue;
        for (std::size_t j = i + 1; j < s.rows.size(); ++j) {
            const auto& b = s.rows[j];
            if (!b.ok) continue;
            double d = 0;
            switch (mode) {
            case LipschitzMode::v_only:
                if (!same_or_empty(a.u, b.u)) continue;
                d = (a.v - b.v).norm();
                break;
            case LipschitzMode::u_only:
                if (!same(a.v, b.v)) continue;
                d = (a.u - b.u).norm();
                break;
            case LipschitzMode::joint:
                d = std::sqrt((a.v - b.v).squaredNorm() + (a.u - b.u).squaredNorm());
                break;
            }
            if (!(d > 0)) continue;
            for (const auto* row : {&a, &b})
                if (!row->result.single_valued)
                    throw ProbeError("lipschitz estimate: multi-valued argmin at node " +
                                     describe_node(row->v, row->u));
            double jump = (b.argmin() - a.argmin()).norm();
            out.push_back({d, jump / d, jump, i, j});
        }
    }
    return out;
}

void check_scales(const std::vector<double>& scales) {
    if (scales.empty()) throw ConfigError("scales must be nonempty");
    for (std::size_t k = 1; k < scales.size(); ++k)
        if (!(scales[k] < scales[k - 1])) throw ConfigError("scales must strictly decrease");
}

// Band sups of `field` for distances in (scales[k+1], scales[k]]; the last band is (0, scales.back()].
std::vector<TrendPoint> band_sups(const std::vector<PairStat>& pairs, const std::vector<double>& scales,
                                  double PairStat::*field) {
    std::vector<TrendPoint> out;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        double upper = scales[k];
        double lower = k + 1 < scales.size() ? scales[k + 1] : 0.0;
        double sup = -1;
        for (const auto& pr : pairs)
            if (pr.dist <= upper && pr.dist > lower) sup = std::max(sup, pr.*field);
        if (sup >= 0) out.push_back({upper, sup});
    }
    return out;
}

double loglog_slope(const std::vector<TrendPoint>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& t : pts) {
        if (!(t.estimate > 0)) continue;
        double x = std::log(t.scale), y = std::log(t.estimate);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k < 2) return 0.0;
    double den = k * sxx - sx * sx;
    return den == 0 ? 0.0 : (k * sxy - sx * sy) / den;
}

SurfaceRow solve_row(const ParametricProblem& p, const Localization& loc, const Vec& v, const Vec& u,
                     const SolveConfig& cfg) {
    SurfaceRow row;
    row.v = v;
    row.u = u;
    try {
        row.result = solve_tilted(p, loc, v, u, cfg);
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

const Vec& single_argmin(const SurfaceRow& row, const char* probe) {
    if (!row.ok) throw ProbeError(std::string(probe) + ": solve failed at " + describe_node(row.v, row.u) + ": " +
                                  row.error);
    if (!row.result.single_valued)
        throw ProbeError(std::string(probe) + ": multi-valued argmin at " + describe_node(row.v, row.u));
    return row.result.minimizers.front();
}

ValueSurface subset(const ValueSurface& s, const std::function<bool(const SurfaceRow&)>& keep) {
    ValueSurface out;
    for (const auto& r : s.rows)
        if (keep(r)) out.rows.push_back(r);
    return out;
}

struct SliceCheck {
    bool failed = false;
    bool incomplete = false;
    std::vector<std::string> notes;
};

SliceCheck check_rows(const ValueSurface& s, const std::string& label) {
    SliceCheck c;
    std::size_t counts[3] = {0, 0, 0};
    std::string first[3];
    for (const auto& r : s.rows) {
        int kind = !r.ok ? 0 : !r.result.single_valued ? 1 : r.result.boundary_hit ? 2 : -1;
        if (kind < 0) continue;
        if (kind == 0)
            c.incomplete = true;
        else
            c.failed = true;
        if (counts[kind]++ == 0) first[kind] = describe_node(r.v, r.u);
    }
    static const char* what[3] = {"solve failed", "multi-valued argmin", "minimizer on the localization boundary"};
    for (int k = 0; k < 3; ++k)
        if (counts[k] > 0)
            c.notes.push_back(label + ": " + what[k] + " at " + std::to_string(counts[k]) + " node(s), first " +
                              first[k]);
    return c;
}

// Jump detection in u: the smallest-distance band of |M' - M| keeps a fixed
// fraction of the largest band.
Verdict continuity_verdict(const ValueSurface& s, const std::vector<double>& scales, double fraction,
                           std::vector<std::string>& notes) {
    auto pairs = collect_pairs(s, LipschitzMode::u_only);
    auto bands = band_sups(pairs, scales, &PairStat::jump);
    if (bands.size() < 2) return Verdict::pass;
    double first = bands.front().estimate, last = bands.back().estimate;
    if (last > 1e-9 && last >= fraction * first) {
        notes.push_back("argmin jump in u persists at the smallest scale");
        return Verdict::fail;
    }
    return Verdict::pass;
}

Verdict combine_all_pass(std::initializer_list<Verdict> vs) {
    bool any_fail = false, all_pass = true;
    for (Verdict v : vs) {
        if (v == Verdict::fail) any_fail = true;
        if (v != Verdict::pass) all_pass = false;
    }
    return any_fail ? Verdict::fail : all_pass ? Verdict::pass : Verdict::inconclusive;
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    case Verdict::inconclusive:
        return "inconclusive";
    case Verdict::vacuous:
        return "vacuous";
    }
    return "inconclusive";
}

std::string to_string(LipschitzMode mode) {
    switch (mode) {
    case LipschitzMode::v_only:
        return "v_only";
    case LipschitzMode::u_only:
        return "u_only";
    case LipschitzMode::joint:
        return "joint";
    }
    return "joint";
}

std::vector<double> decade_scales(double radius, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(radius * std::pow(10.0, -k) * (1 + 1e-9));
    return out;
}

ModulusEstimate estimate_lipschitz(const ValueSurface& surface, LipschitzMode mode, const std::vector<double>& scales,
                                   const LipschitzOptions& opts) {
    check_scales(scales);
    auto pairs = collect_pairs(surface, mode);
    ModulusEstimate est;
    for (double rho : scales) {
        double sup = 0;
        const PairStat* arg = nullptr;
        for (const auto& pr : pairs)
            if (pr.dist <= rho && (arg == nullptr || pr.quotient > sup)) {
                sup = pr.quotient;
                arg = &pr;
            }
        est.trend.push_back({rho, sup});
        if (rho == scales.back() && arg) {
            const auto& a = surface.rows[arg->i];
            const auto& b = surface.rows[arg->j];
            Vec pa(a.v.size() + a.u.size()), pb(pa.size());
            pa << a.v, a.u;
            pb << b.v, b.u;
            est.witness = {pa, pb};
        }
    }
    est.value = est.trend.back().estimate;

    auto bands = band_sups(pairs, scales, &PairStat::quotient);
    if (bands.empty()) {
        est.verdict = Verdict::inconclusive;
        est.note = "no admissible pairs";
        return est;
    }
    double first = bands.front().estimate, last = bands.back().estimate;
    bool increasing = bands.size() >= 2;
    for (std::size_t k = 1; k < bands.size(); ++k)
        if (!(bands[k].estimate > bands[k - 1].estimate)) increasing = false;
    double slope = loglog_slope(bands);
    std::ostringstream note;
    note << "bands=" << bands.size() << " first=" << first << " last=" << last << " loglog_slope=" << slope;
    if ((first > 0 && last >= opts.blowup_factor * first) || (first == 0 && last > 1e-9) ||
        (static_cast<int>(bands.size()) >= opts.min_trend && increasing && slope < -0.05)) {
        est.verdict = Verdict::fail;
    } else if (last <= first * 1.05 + 1e-12) {
        est.verdict = Verdict::pass;
    } else {
        est.verdict = Verdict::inconclusive;
    }
    est.note = note.str();
    return est;
}

EnvelopeResult envelope_check_v(const ParametricProblem& p, const Localization& loc, const std::vector<Vec>& v_grid,
                                const Vec& u, double h, const SolveConfig& cfg) {
    if (!(h >= 10 * cfg.refine_tol)) throw ConfigError("envelope_check_v: step below 10 x refine_tol");
    const int n = p.n;
    struct NodeOut {
        double derived = 0, plus = 0, minus = 0;
    };
    std::vector<NodeOut> outs(v_grid.size());
    SolveConfig inner = cfg;
    inner.workers = 1;
    parallel_for(v_grid.size(), cfg.workers, [&](std::size_t k) {
        const Vec& v = v_grid[k];
        Vec M = single_argmin(solve_row(p, loc, v, u, inner), "envelope_check_v");
        Vec fd(n);
        for (int j = 0; j < n; ++j) {
            Vec vp = v, vm = v;
            vp[j] += h;
            vm[j] -= h;
            double mp = solve_tilted(p, loc, vp, u, inner).value;
            double mm = solve_tilted(p, loc, vm, u, inner).value;
            fd[j] = (mp - mm) / (2 * h);
        }
        outs[k].derived = (fd + (M - loc.xbar)).lpNorm<Eigen::Infinity>();
        outs[k].plus = (fd - M).lpNorm<Eigen::Infinity>();
        outs[k].minus = (fd + M).lpNorm<Eigen::Infinity>();
    });
    EnvelopeResult r;
    r.nodes = v_grid.size();
    for (const auto& o : outs) {
        r.residual = std::max(r.residual, o.derived);
        r.residual_plus_m = std::max(r.residual_plus_m, o.plus);
        r.residual_minus_m = std::max(r.residual_minus_m, o.minus);
    }
    return r;
}

EnvelopeUResult envelope_check_u(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                 const std::vector<Vec>& u_grid, double h, const SolveConfig& cfg,
                                 double active_tol) {
    if (!(h >= 10 * cfg.refine_tol)) throw ConfigError("envelope_check_u: step below 10 x refine_tol");
    if (p.m == 0) throw ProbeError("envelope_check_u: problem has no parameter u");
    if (!p.is_composite() && !p.closed_form().grad_u)
        throw UnsupportedOperation("envelope_check_u: closed form without a u-gradient rule");
    const int m = p.m;
    struct NodeOut {
        double residual = 0;
        bool polytope = false;
    };
    std::vector<NodeOut> outs(u_grid.size());
    SolveConfig inner = cfg;
    inner.workers = 1;
    parallel_for(u_grid.size(), cfg.workers, [&](std::size_t k) {
        const Vec& u = u_grid[k];
        ArgminResult base = solve_tilted(p, loc, v, u, inner);
        SurfaceRow row;
        row.v = v;
        row.u = u;
        row.result = base;
        row.ok = true;
        Vec M = single_argmin(row, "envelope_check_u");
        Vec fwd(m), bwd(m);
        for (int j = 0; j < m; ++j) {
            Vec up = u, um = u;
            up[j] += h;
            um[j] -= h;
            double mp = solve_tilted(p, loc, v, up, inner).value;
            double mm = solve_tilted(p, loc, v, um, inner).value;
            fwd[j] = (mp - base.value) / h;
            bwd[j] = (base.value - mm) / h;
        }
        Vec central = 0.5 * (fwd + bwd);
        if (!p.is_composite()) {
            Vec y = p.closed_form().grad_u(M, u);
            outs[k].residual = (central - y).lpNorm<Eigen::Infinity>();
            return;
        }
        PolyhedralSet Y = multiplier_set(p, M, u, v, active_tol);
        if (!Y.vertices_enumerated()) Y.enumerate_vertices();
        const auto& verts = Y.vertices();
        if (verts.empty())
            throw ProbeError("envelope_check_u: empty multiplier set at " + describe_node(v, u) +
                             " (stationarity lost)");
        double spread = 0;
        for (const auto& y : verts) spread = std::max(spread, (y - verts.front()).lpNorm<Eigen::Infinity>());
        if (spread <= 1e-9) {
            outs[k].residual = (central - verts.front()).lpNorm<Eigen::Infinity>();
            return;
        }
        outs[k].polytope = true;
        double res = 0;
        for (int j = 0; j < m; ++j) {
            auto [lo, hi] = Y.support_range(Vec::Unit(m, j));
            for (double q : {fwd[j], bwd[j]}) res = std::max({res, lo - q, q - hi});
        }
        outs[k].residual = res;
    });
    EnvelopeUResult r;
    for (const auto& o : outs) {
        r.residual = std::max(r.residual, o.residual);
        (o.polytope ? r.polytope_nodes : r.smooth_nodes) += 1;
    }
    return r;
}

ModulusEstimate hypoconvexity_modulus(const ValueSurface& surface, double e_max) {
    ModulusEstimate est;
    est.value = 0;
    double radius = 0;
    bool any = false;
    const auto& rows = surface.rows;
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (!rows[a].ok) continue;
        radius = std::max(radius, rows[a].u.norm());
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            if (!rows[b].ok || !same(rows[a].v, rows[b].v)) continue;
            Vec mid = 0.5 * (rows[a].u + rows[b].u);
            double dist2 = (rows[a].u - rows[b].u).squaredNorm();
            if (!(dist2 > 0)) continue;
            for (std::size_t c = 0; c < rows.size(); ++c) {
                if (!rows[c].ok || !same(rows[c].v, rows[a].v)) continue;
                if ((rows[c].u - mid).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + mid.lpNorm<Eigen::Infinity>()))
                    continue;
                any = true;
                double gap = 0.5 * rows[a].result.value + 0.5 * rows[b].result.value - rows[c].result.value;
                double need = 8.0 * (-gap - 1e-8) / dist2;
                if (need > est.value) {
                    est.value = need;
                    est.witness = {rows[a].u, rows[b].u};
                }
                break;
            }
        }
    }
    if (!any) throw ProbeError("hypoconvexity_modulus: the surface has no midpoint triples in u");
    if (est.value > e_max) {
        est.value = kInf;
        est.verdict = Verdict::fail;
        est.note = "no elicitation level up to e_max";
    } else {
        est.verdict = Verdict::pass;
    }
    est.trend.push_back({radius, est.value});
    return est;
}

ProxRegularityResult prox_regularity_level(const GraphSample& sample, const std::vector<ProbePoint>& probes,
                                           const Vec& xbar, const Vec& vbar, const std::vector<double>& radii,
                                           double v_radius) {
    if (sample.points.size() < 2) throw ProbeError("prox_regularity_level: sample needs at least two points");
    check_scales(radii);
    ProxRegularityResult res;
    for (double rho : radii) {
        std::vector<const GraphPoint*> pts;
        for (const auto& g : sample.points)
            if ((g.x - xbar).norm() <= rho && (g.v - vbar).norm() <= v_radius) pts.push_back(&g);
        std::vector<ProbePoint> targets;
        for (const auto& q : probes)
            if ((q.x - xbar).norm() <= rho) targets.push_back(q);
        for (const auto* g : pts) targets.push_back({g->x, g->f});

        double r_hat = -kInf, s_hat = kInf;
        std::pair<Vec, Vec> r_wit, s_wit;
        for (const auto* g : pts) {
            for (const auto& t : targets) {
                Vec d = t.x - g->x;
                double d2 = d.squaredNorm();
                if (!(d2 > 1e-28)) continue;
                double need = 2.0 * (g->f + g->v.dot(d) - t.f) / d2;
                if (need > r_hat) {
                    r_hat = need;
                    r_wit = {g->x, t.x};
                }
            }
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                Vec dx = pts[j]->x - pts[i]->x;
                double d2 = dx.squaredNorm();
                if (!(d2 > 1e-28)) continue;
                double lvl = (pts[j]->v - pts[i]->v).dot(dx) / d2;
                if (lvl < s_hat) {
                    s_hat = lvl;
                    s_wit = {pts[i]->x, pts[j]->x};
                }
            }
        res.r.trend.push_back({rho, r_hat});
        res.s.trend.push_back({rho, s_hat});
        res.gap.push_back({rho, std::abs(r_hat + s_hat)});
        res.r.value = r_hat;
        res.s.value = s_hat;
        res.r.witness = r_wit;
        res.s.witness = s_wit;
    }
    res.r.verdict = std::isfinite(res.r.value) ? Verdict::pass : Verdict::vacuous;
    res.s.verdict = std::isfinite(res.s.value) ? Verdict::pass : Verdict::vacuous;
    return res;
}

InnerNormResult graphical_derivative_inner_norm(const ParametricProblem& p, const Localization& loc, const Vec& v,
                                                const Vec& u, int directions, const std::vector<double>& taus,
                                                const SolveConfig& cfg) {
    if (p.m == 0) throw ProbeError("inner norm: problem has no parameter u");
    check_scales(taus);
    const int m = p.m;
    std::vector<Vec> dirs;
    if (m == 1) {
        dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    } else if (m == 2) {
        int k = std::max(directions, 4);
        for (int i = 0; i < k; ++i) {
            double a = 2.0 * std::numbers::pi * i / k;
            Vec w(2);
            w << std::cos(a), std::sin(a);
            dirs.push_back(w);
        }
    } else {
        for (int i = 0; i < m; ++i) {
            dirs.push_back(Vec::Unit(m, i));
            dirs.push_back(-Vec::Unit(m, i));
        }
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> gauss;
        while (static_cast<int>(dirs.size()) < directions) {
            Vec w(m);
            for (int i = 0; i < m; ++i) w[i] = gauss(rng);
            dirs.push_back(w / w.norm());
        }
    }

    SolveConfig inner = cfg;
    inner.workers = 1;
    Vec M0 = single_argmin(solve_row(p, loc, v, u, inner), "inner norm");
    const std::size_t nt = taus.size();
    std::vector<SurfaceRow> rows(dirs.size() * nt);
    parallel_for(rows.size(), cfg.workers, [&](std::size_t k) {
        rows[k] = solve_row(p, loc, v, u + taus[k % nt] * dirs[k / nt], inner);
    });

    InnerNormResult res;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        DirectionLadder lad;
        lad.direction = dirs[d];
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& row = rows[d * nt + t];
            if (!row.ok || !row.result.single_valued) {
                lad.skipped = true;
                break;
            }
            lad.quotients.push_back({taus[t], (row.result.minimizers.front() - M0).norm() / taus[t]});
        }
        if (lad.skipped) {
            ++res.skipped;
            lad.quotients.clear();
        } else {
            bool up = true, down = true;
            for (std::size_t t = 1; t < lad.quotients.size(); ++t) {
                if (lad.quotients[t].estimate < lad.quotients[t - 1].estimate) up = false;
                if (lad.quotients[t].estimate > lad.quotients[t - 1].estimate) down = false;
            }
            lad.monotone = up || down;
            res.estimate = std::max(res.estimate, lad.quotients.back().estimate);
        }
        res.directions.push_back(std::move(lad));
    }
    return res;
}

std::vector<Vec> ray_grid(int dim, double radius, int steps) {
    std::vector<Vec> out{Vec::Zero(dim)};
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < steps; ++k)
            for (double sgn : {-1.0, 1.0}) out.push_back(sgn * radius * std::pow(10.0, -k) * Vec::Unit(dim, i));
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

std::vector<Vec> box_grid(int dim, double radius, int points) {
    if (points < 2) throw ConfigError("box_grid: need at least two points per axis");
    std::vector<Vec> out;
    long total = 1;
    for (int i = 0; i < dim; ++i) total *= points;
    for (long f = 0; f < total; ++f) {
        Vec x(dim);
        long rest = f;
        for (int i = 0; i < dim; ++i) {
            x[i] = -radius + 2.0 * radius * static_cast<double>(rest % points) / (points - 1);
            rest /= points;
        }
        out.push_back(x);
    }
    return out;
}

StabilityVerdict classify(const ParametricProblem& p, const Localization& loc, const SolveConfig& cfg,
                          const ClassifyOptions& opts) {
    const int n = p.n, m = p.m;
    const int steps = opts.ray_steps > 0 ? opts.ray_steps : (n + m <= 2 ? 5 : 3);
    auto v_grid = ray_grid(n, loc.v_radius, steps);
    auto u_grid = ray_grid(m, loc.u_radius, steps);
    std::vector<Vec> u_slices = u_grid;
    if (v_grid.size() * u_grid.size() > 400) u_slices = ray_grid(m, loc.u_radius, 1);

    ValueSurface full = value_surface(p, loc, v_grid, u_slices, cfg);
    ValueSurface sub = value_surface(p, loc, {Vec::Zero(n)}, u_grid, cfg);
    ValueSurface tilt = subset(full, [](const SurfaceRow& r) { return r.u.size() == 0 || r.u.isZero(0.0); });
    ValueSurface joint = full;
    for (const auto& r : sub.rows) {
        bool dup = false;
        for (const auto& q : full.rows)
            if (same(q.v, r.v) && same_or_empty(q.u, r.u)) dup = true;
        if (!dup) joint.rows.push_back(r);
    }

    StabilityVerdict out;
    auto v_scales = decade_scales(loc.v_radius, steps);
    auto u_scales = decade_scales(loc.u_radius, steps);
    auto j_scales = decade_scales(std::max(loc.v_radius, loc.u_radius), steps);
    auto lipschitz = [&](const ValueSurface& s, LipschitzMode mode, const std::vector<double>& sc) {
        try {
            return estimate_lipschitz(s, mode, sc, opts.lipschitz);
        } catch (const ProbeError& e) {
            ModulusEstimate bad;
            bad.verdict = Verdict::fail;
            bad.note = e.what();
            return bad;
        }
    };

    // Tilt stability at u = 0.
    SliceCheck tc = check_rows(tilt, "tilt");
    out.notes.insert(out.notes.end(), tc.notes.begin(), tc.notes.end());
    out.lipschitz_v = lipschitz(tilt, LipschitzMode::v_only, v_scales);
    if (tc.failed)
        out.tilt_stable = Verdict::fail;
    else if (tc.incomplete)
        out.tilt_stable = Verdict::inconclusive;
    else
        out.tilt_stable = out.lipschitz_v.verdict;

    // Substability along the v = 0 slice.
    SliceCheck sc = check_rows(sub, "substability");
    out.notes.insert(out.notes.end(), sc.notes.begin(), sc.notes.end());
    out.lipschitz_u = m > 0 ? lipschitz(sub, LipschitzMode::u_only, u_scales) : out.lipschitz_v;
    if (sc.failed)
        out.substable = Verdict::fail;
    else if (sc.incomplete)
        out.substable = Verdict::inconclusive;
    else
        out.substable = m > 0 ? continuity_verdict(sub, u_scales, opts.jump_fraction, out.notes) : Verdict::pass;

    // Full substability: tilt uniformly over the u-slices plus continuity in u.
    SliceCheck fc = check_rows(full, "full substability");
    Verdict uniform_tilt = fc.failed ? Verdict::fail
                           : fc.incomplete
                               ? Verdict::inconclusive
                               : lipschitz(full, LipschitzMode::v_only, v_scales).verdict;
    Verdict u_continuity = Verdict::pass;
    if (!fc.failed && !fc.incomplete && m > 0)
        u_continuity = continuity_verdict(full, u_scales, opts.jump_fraction, out.notes);
    if (fc.failed) out.notes.insert(out.notes.end(), fc.notes.begin(), fc.notes.end());
    out.full_substable = combine_all_pass({out.tilt_stable, out.substable, uniform_tilt, u_continuity});

    // Full stability: joint Lipschitz behaviour.
    SliceCheck jc = check_rows(joint, "full stability");
    out.lipschitz_joint = jc.failed || jc.incomplete ? ModulusEstimate{} : lipschitz(joint, LipschitzMode::joint, j_scales);
    if (jc.failed) out.lipschitz_joint.verdict = Verdict::fail;
    if (out.lipschitz_joint.verdict == Verdict::fail || out.tilt_stable == Verdict::fail)
        out.fully_stable = Verdict::fail;
    else
        out.fully_stable = combine_all_pass({out.lipschitz_joint.verdict, out.tilt_stable, out.full_substable});
    if (!jc.failed && out.lipschitz_joint.verdict == Verdict::fail)
        out.notes.push_back("joint (v,u) Lipschitz quotients grow as the pair distance shrinks");
    return out;
}

} // namespace varstab
