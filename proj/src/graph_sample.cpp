#include <cmath>

#include "varstab/probes.hpp"
#include "varstab/tilted_model.hpp"

namespace varstab {

namespace {

std::vector<Vec> ball_grid(const Vec& xbar, double radius, int points) {
    std::vector<Vec> out;
    for (const auto& d : box_grid(static_cast<int>(xbar.size()), radius, points))
        if (d.norm() <= radius * (1 + 1e-12)) out.push_back(xbar + d);
    return out;
}

int per_axis(int n, int points) {
    if (n == 1) return points;
    if (n == 2) return std::max(5, points / 4);
    return 5;
}

} // namespace

std::vector<ProbePoint> build_probe_points(const ParametricProblem& p, const Vec& xbar, double radius, int points) {
    std::vector<ProbePoint> out;
    for (const auto& x : ball_grid(xbar, radius, per_axis(p.n, points))) {
        double f = eval_phi(p, x, Vec::Zero(p.m));
        if (std::isfinite(f)) out.push_back({x, f});
    }
    return out;
}

GraphSample build_graph_sample(const ParametricProblem& p, const Localization& loc, double radius, int points,
                               const SolveConfig& cfg) {
    GraphSample s;
    s.alpha = loc.alpha;
    const Vec u0 = Vec::Zero(p.m);
    auto keep = [&](const Vec& x, const Vec& v, double f) {
        if (std::isfinite(f) && f < loc.alpha) s.points.push_back({x, v, f});
    };
    if (!p.is_composite()) {
        const auto& cf = p.closed_form();
        if (!cf.subgradients && !cf.grad_x)
            throw UnsupportedOperation("graph sample: closed form without subgradient or gradient rule");
        for (const auto& x : ball_grid(loc.xbar, radius, per_axis(p.n, points))) {
            double f = cf.value(x, u0);
            if (cf.subgradients) {
                for (const auto& v : cf.subgradients(x, points)) keep(x, v, f);
            } else {
                keep(x, cf.grad_x(x, u0), f);
            }
        }
        return s;
    }
    Localization inner = loc;
    inner.delta = radius;
    for (const auto& v : box_grid(p.n, loc.v_radius, per_axis(p.n, points))) {
        TiltedModel m(p, u0, v);
        for (const auto& x : truncated_stationary_map(p, inner, v, u0, cfg))
            keep(x, v, m.tilted_value(x, cfg.refine_tol) + v.dot(x - loc.xbar));
    }
    return s;
}

} // namespace varstab
