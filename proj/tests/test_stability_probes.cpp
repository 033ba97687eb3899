#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "varstab/probes.hpp"
#include "varstab/registry.hpp"
#include "varstab/solver.hpp"

using namespace varstab;

namespace {

Vec scalar(double x) { return Vec::Constant(1, x); }

std::vector<Vec> line(double lo, double hi, int count) {
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) out.push_back(scalar(lo + (hi - lo) * i / (count - 1)));
    return out;
}

std::vector<Vec> ex32_u_ladder() {
    std::vector<Vec> out{scalar(0)};
    for (double u = 1e-2; u >= 0.99e-6; u /= 10) out.push_back(scalar(u));
    return out;
}

} // namespace

TEST(Lipschitz, QuadraticJointMatchesPairwiseOracle) {
    auto p = registry_build("quadratic");
    auto loc = make_localization(p, 0.5);
    auto grid = box_grid(1, 0.1, 21);
    auto s = value_surface(p, loc, grid, grid, SolveConfig{});
    auto scales = decade_scales(0.3, 2);
    auto e = estimate_lipschitz(s, LipschitzMode::joint, scales);
    ASSERT_EQ(e.trend.size(), 2u);
    // M = u + v: sup of |dv + du| / |(dv, du)| over grid pairs within each radius.
    for (std::size_t k = 0; k < scales.size(); ++k) {
        double sup = 0;
        for (const auto& a : s.rows)
            for (const auto& b : s.rows) {
                double dv = b.v[0] - a.v[0], du = b.u[0] - a.u[0], d = std::hypot(dv, du);
                if (d > 0 && d <= scales[k]) sup = std::max(sup, std::abs(dv + du) / d);
            }
        EXPECT_NEAR(e.trend[k].estimate, sup, 1e-6);
        EXPECT_NEAR(e.trend[k].estimate, std::sqrt(2.0), 1e-6);
    }
    EXPECT_EQ(e.verdict, Verdict::pass);
    EXPECT_DOUBLE_EQ(e.value, e.trend.back().estimate);
    // Along a single coordinate the constant is 1.
    EXPECT_NEAR(estimate_lipschitz(s, LipschitzMode::v_only, scales).value, 1.0, 1e-6);
    EXPECT_NEAR(estimate_lipschitz(s, LipschitzMode::u_only, scales).value, 1.0, 1e-6);
}

TEST(Lipschitz, Ex32BoundedInVGrowingJointly) {
    auto p = registry_build("ex32");
    auto loc = make_localization(p, 0.5);
    SolveConfig cfg;
    auto sv = value_surface(p, loc, ray_grid(1, 0.1, 5), {scalar(0)}, cfg);
    auto ev = estimate_lipschitz(sv, LipschitzMode::v_only, decade_scales(0.2, 5));
    EXPECT_EQ(ev.verdict, Verdict::pass);

    auto su = value_surface(p, loc, {scalar(0)}, ex32_u_ladder(), cfg);
    auto eu = estimate_lipschitz(su, LipschitzMode::u_only, decade_scales(0.02, 5));
    EXPECT_EQ(eu.verdict, Verdict::fail);
    // The sup over pairs is attained by the pair (0, 1e-6).
    EXPECT_NEAR(eu.value, oracle::ex32_argmin(1e-6) / 1e-6, 1e-3 * eu.value);
}

TEST(Lipschitz, TrendNonIncreasingAsScaleShrinks) {
    for (const std::string id : {"quadratic", "ex32", "abs1d", "neg_quadratic"}) {
        auto p = registry_build(id);
        auto loc = make_localization(p, 0.5);
        auto vg = ray_grid(p.n, 0.1, 4);
        std::vector<Vec> ug = p.m ? ray_grid(p.m, 0.1, 4) : std::vector<Vec>{Vec()};
        auto s = value_surface(p, loc, vg, ug, SolveConfig{});
        bool single = true;
        for (const auto& r : s.rows) single = single && r.ok && r.result.single_valued;
        if (!single) continue;
        for (auto mode : {LipschitzMode::v_only, LipschitzMode::joint}) {
            auto e = estimate_lipschitz(s, mode, decade_scales(0.3, 4));
            for (std::size_t k = 1; k < e.trend.size(); ++k) {
                EXPECT_LT(e.trend[k].scale, e.trend[k - 1].scale);
                EXPECT_LE(e.trend[k].estimate, e.trend[k - 1].estimate + 1e-9) << id;
            }
        }
    }
}

TEST(Lipschitz, MultiValuedRowIsAProbeError) {
    auto p = registry_build("neg_quadratic");
    auto loc = make_localization(p, 0.5);
    auto s = value_surface(p, loc, {scalar(0), scalar(0.01)}, {Vec()}, SolveConfig{});
    EXPECT_THROW(estimate_lipschitz(s, LipschitzMode::v_only, decade_scales(0.1, 2)), ProbeError);
}

TEST(EnvelopeV, QuadraticAndShiftedAnchor) {
    SolveConfig cfg;
    auto q = registry_build("quadratic");
    auto r = envelope_check_v(q, make_localization(q, 0.5), line(-0.05, 0.05, 5), scalar(0.02), 1e-3, cfg);
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_EQ(r.nodes, 5u);

    // M = 1 + u + v, so -(M - xbar) = -(u + v) while -M and +M are off by about 1.
    auto shifted = make_quadratic(1.0, 1, 0.0, scalar(1.0));
    auto s = envelope_check_v(shifted, make_localization(shifted, 0.5), line(-0.05, 0.05, 5), scalar(0.02), 1e-3, cfg);
    EXPECT_LE(s.residual, 1e-6);
    EXPECT_GT(s.residual_plus_m, 0.5);
    EXPECT_GT(s.residual_minus_m, 0.5);
}

TEST(EnvelopeV, Ex32AtPositiveU) {
    auto p = registry_build("ex32");
    auto r = envelope_check_v(p, make_localization(p, 0.5), line(-1e-2, 1e-2, 5), scalar(1e-3), 1e-4, SolveConfig{});
    EXPECT_LE(r.residual, 1e-4);
}

TEST(EnvelopeV, CentralDifferencesDecayQuadratically) {
    // m is exactly quadratic in v for quadratic(1); ex32 has a third-order term, so the h^2 error shows.
    auto p = registry_build("ex32");
    auto loc = make_localization(p, 0.5);
    SolveConfig cfg;
    cfg.refine_tol = 1e-12;
    std::vector<Vec> grid{scalar(0.05)};
    double a = envelope_check_v(p, loc, grid, scalar(0.05), 4e-2, cfg).residual;
    double b = envelope_check_v(p, loc, grid, scalar(0.05), 2e-2, cfg).residual;
    double c = envelope_check_v(p, loc, grid, scalar(0.05), 1e-2, cfg).residual;
    EXPECT_NEAR(std::log2(a / b), 2.0, 0.3);
    EXPECT_NEAR(std::log2(b / c), 2.0, 0.3);
}

TEST(EnvelopeV, StepBelowSolverToleranceIsAConfigError) {
    auto q = registry_build("quadratic");
    EXPECT_THROW(envelope_check_v(q, make_localization(q, 0.5), {scalar(0)}, scalar(0), 1e-10, SolveConfig{}),
                 ConfigError);
}

TEST(EnvelopeU, QuadraticMatchesMultiplier) {
    auto q = registry_build("quadratic");
    auto r = envelope_check_u(q, make_localization(q, 0.5), scalar(0.01), line(-0.05, 0.05, 5), 1e-3, SolveConfig{});
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_EQ(r.smooth_nodes, 5u);
}

TEST(EnvelopeU, Ex32AgainstPartialDerivative) {
    auto p = registry_build("ex32");
    auto r = envelope_check_u(p, make_localization(p, 0.5), scalar(0), line(1e-3, 1e-2, 5), 1e-5, SolveConfig{});
    EXPECT_LE(r.residual, 1e-4);
    // Independent check at one node.
    double u = 5e-3, x = oracle::ex32_argmin(u);
    auto loc = make_localization(p, 0.5);
    double h = 1e-5;
    double fd = (solve_tilted(p, loc, scalar(0), scalar(u + h), SolveConfig{}).value -
                 solve_tilted(p, loc, scalar(0), scalar(u - h), SolveConfig{}).value) /
                (2 * h);
    EXPECT_NEAR(fd, oracle::ex32_dphi_du(x, u), 1e-4);
}

TEST(EnvelopeU, Ex33PolytopeBounds) {
    auto p = registry_build("ex33");
    double t = 1e-3;
    auto r = envelope_check_u(p, make_localization(p, 0.5), Vec::Zero(4), {Vec::Constant(4, -t)}, 1e-5, SolveConfig{});
    EXPECT_LE(r.residual, 1e-4);
    EXPECT_EQ(r.polytope_nodes, 1u);
}

TEST(Hypoconvexity, QuadraticIsOne) {
    auto q = registry_build("quadratic");
    auto s = value_surface(q, make_localization(q, 0.5), {scalar(-0.05), scalar(0), scalar(0.05)}, box_grid(1, 0.1, 9),
                           SolveConfig{});
    EXPECT_NEAR(hypoconvexity_modulus(s).value, 1.0, 0.05);
}

TEST(Hypoconvexity, Ex32IsZero) {
    auto p = registry_build("ex32");
    auto s = value_surface(p, make_localization(p, 0.5), {scalar(-0.05), scalar(0), scalar(0.05)},
                           box_grid(1, 0.1, 9), SolveConfig{});
    EXPECT_EQ(hypoconvexity_modulus(s).value, 0.0);
}

TEST(Hypoconvexity, CoupledNegativeQuadraticIsOne) {
    auto p = make_neg_quadratic_coupled();
    auto s = value_surface(p, make_localization(p, 0.5), {scalar(0)}, box_grid(1, 0.1, 9), SolveConfig{});
    EXPECT_NEAR(hypoconvexity_modulus(s).value, 1.0, 0.05);
}

TEST(Hypoconvexity, ShiftsUnderAddedCurvatureInU) {
    for (double c : {0.0, 0.5, 1.0, 2.0}) {
        auto p = make_quadratic(1.0, 1, c);
        auto s = value_surface(p, make_localization(p, 0.5), {scalar(0), scalar(0.05)}, box_grid(1, 0.1, 9),
                               SolveConfig{});
        EXPECT_NEAR(hypoconvexity_modulus(s).value, std::max(1.0 - c, 0.0), 0.05) << c;
    }
}

TEST(ProxRegularity, QuadraticLevels) {
    for (double sc : {0.5, 1.0, 2.0}) {
        auto p = make_quadratic(sc);
        auto loc = make_localization(p, 0.5);
        auto sample = build_graph_sample(p, loc, 0.25, 41, SolveConfig{});
        auto probes = build_probe_points(p, loc.xbar, 0.25, 41);
        auto r = prox_regularity_level(sample, probes, loc.xbar, Vec::Zero(1), {0.25, 0.125});
        EXPECT_NEAR(r.s.value, sc, 1e-3) << sc;
        EXPECT_NEAR(r.r.value, -sc, 1e-3) << sc;
        for (const auto& g : r.gap) EXPECT_LE(g.estimate, 2e-3);
    }
}

TEST(ProxRegularity, NegativeQuadraticLevels) {
    auto p = registry_build("neg_quadratic");
    auto loc = make_localization(p, 0.5);
    auto sample = build_graph_sample(p, loc, 0.25, 41, SolveConfig{});
    auto probes = build_probe_points(p, loc.xbar, 0.25, 41);
    auto r = prox_regularity_level(sample, probes, loc.xbar, Vec::Zero(1), {0.25, 0.125});
    EXPECT_NEAR(r.r.value, 1.0, 1e-3);
    EXPECT_NEAR(r.s.value, -1.0, 1e-3);
}

TEST(ProxRegularity, AbsoluteValueTrendsTowardZero) {
    auto p = registry_build("abs1d");
    auto loc = make_localization(p, 0.5);
    auto sample = build_graph_sample(p, loc, 0.25, 41, SolveConfig{});
    auto probes = build_probe_points(p, loc.xbar, 0.25, 41);
    auto r = prox_regularity_level(sample, probes, loc.xbar, Vec::Zero(1), {0.25, 0.125, 0.0625});
    ASSERT_EQ(r.s.trend.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GE(r.s.trend[k].estimate, -1e-12);
        EXPECT_LE(r.r.trend[k].estimate, 1e-12);
    }
    EXPECT_LE(std::abs(r.s.value), 1e-9);
    EXPECT_LE(std::abs(r.r.value), 1e-9);
}

TEST(ProxRegularity, TooSmallSampleIsAProbeError) {
    GraphSample one;
    one.points.push_back({scalar(0), scalar(0), 0.0});
    EXPECT_THROW(prox_regularity_level(one, {}, scalar(0), scalar(0), {0.1}), ProbeError);
}

TEST(InnerNorm, QuadraticIsOne) {
    auto q = registry_build("quadratic");
    auto r = graphical_derivative_inner_norm(q, make_localization(q, 0.5), scalar(0.01), scalar(-0.02), 8,
                                             {1e-3, 1e-4, 1e-5}, SolveConfig{});
    EXPECT_NEAR(r.estimate, 1.0, 1e-3);
    EXPECT_EQ(r.skipped, 0);
}

TEST(InnerNorm, Ex32MatchesOracleDerivative) {
    auto p = registry_build("ex32");
    double u = 1e-4;
    auto r = graphical_derivative_inner_norm(p, make_localization(p, 0.5), scalar(0), scalar(u), 8,
                                             {1e-6, 1e-7, 1e-8}, SolveConfig{});
    double h = 1e-8;
    double fd = (oracle::ex32_argmin(u + h) - oracle::ex32_argmin(u - h)) / (2 * h);
    EXPECT_NEAR(r.estimate, std::abs(fd), 1e-2 * std::abs(fd));
    // x ~ (u^2/2)^(3/7) gives dx/du ~ (6/7)(1/2)^(3/7) u^(-1/7); the z^(1/3) correction keeps it within 1.3.
    double asymptote = (6.0 / 7.0) * std::pow(0.5, 3.0 / 7.0) * std::pow(u, -1.0 / 7.0);
    EXPECT_GT(r.estimate, asymptote / 1.3);
    EXPECT_LT(r.estimate, asymptote);
}

TEST(InnerNorm, Ex32IncreasesAsUShrinks) {
    auto p = registry_build("ex32");
    auto loc = make_localization(p, 0.5);
    double prev = 0;
    for (double u = 1e-2; u >= 0.99e-6; u /= 10) {
        auto r = graphical_derivative_inner_norm(p, loc, scalar(0), scalar(u), 4, {1e-2 * u, 1e-3 * u, 1e-4 * u},
                                                 SolveConfig{});
        EXPECT_GT(r.estimate, prev) << u;
        prev = r.estimate;
    }
}

TEST(Classify, QuadraticFullyStable) {
    auto p = registry_build("quadratic");
    auto v = classify(p, make_localization(p, 0.5), SolveConfig{});
    EXPECT_EQ(v.tilt_stable, Verdict::pass);
    EXPECT_EQ(v.full_substable, Verdict::pass);
    EXPECT_EQ(v.fully_stable, Verdict::pass);
}

TEST(Classify, Ex32TiltButNotFully) {
    auto p = registry_build("ex32");
    for (std::uint64_t seed : {1u, 7u}) {
        SolveConfig cfg;
        cfg.seed = seed;
        auto v = classify(p, make_localization(p, 0.5), cfg);
        EXPECT_EQ(v.tilt_stable, Verdict::pass);
        EXPECT_EQ(v.full_substable, Verdict::pass);
        EXPECT_EQ(v.fully_stable, Verdict::fail);
    }
}

TEST(Classify, NegativeQuadraticNotTiltStable) {
    auto p = registry_build("neg_quadratic");
    auto v = classify(p, make_localization(p, 0.5), SolveConfig{});
    EXPECT_EQ(v.tilt_stable, Verdict::fail);
}

TEST(Classify, FullyStableImpliesTiltAndFullSubstable) {
    for (const std::string id : {"quadratic", "ex32", "neg_quadratic", "abs1d"}) {
        auto p = registry_build(id);
        auto v = classify(p, make_localization(p, 0.5), SolveConfig{});
        if (v.fully_stable == Verdict::pass) {
            EXPECT_EQ(v.tilt_stable, Verdict::pass) << id;
            EXPECT_EQ(v.full_substable, Verdict::pass) << id;
        }
    }
}
