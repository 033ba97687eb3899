#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "varstab/probes.hpp"
#include "varstab/registry.hpp"
#include "varstab/solver.hpp"

using namespace varstab;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(xs.size());
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Vec scalar(double x) { return Vec::Constant(1, x); }

ParametricProblem squared_equality() {
    // x^2 + u = 0: feasible at u = 0, empty for u > 0.
    ParametricProblem p;
    p.name = "squared_equality";
    p.n = 1;
    p.m = 1;
    p.xbar = Vec::Zero(1);
    Composite c;
    c.f0 = Polynomial(1, {{1.0, {1}}});
    c.F.domain_dim = 1;
    c.F.components = {Polynomial(1, {{1.0, {2}}})};
    c.g = ZeroIndicator{1};
    p.body = c;
    return p;
}

std::vector<std::string> registry_ids() { return {"ex32", "ex33", "quadratic", "neg_quadratic", "abs1d"}; }

} // namespace

TEST(SolveTilted, QuadraticClosedForm) {
    auto p = registry_build("quadratic");
    auto r = solve_tilted(p, make_localization(p, 1.0), scalar(0.2), scalar(0.1), SolveConfig{});
    ASSERT_TRUE(r.single_valued);
    EXPECT_NEAR(r.minimizers[0][0], 0.3, 1e-9);
    EXPECT_NEAR(r.value, -0.045, 1e-12);
    EXPECT_FALSE(r.boundary_hit);
    EXPECT_GT(r.evaluations, 0);
}

TEST(SolveTilted, Ex32AtAnchor) {
    auto p = registry_build("ex32");
    auto r = solve_tilted(p, make_localization(p, 0.5), scalar(0), scalar(0), SolveConfig{});
    ASSERT_TRUE(r.single_valued);
    EXPECT_NEAR(r.minimizers[0][0], 0.0, 1e-9);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(SolveTilted, Ex32MatchesRootFindingOracle) {
    auto p = registry_build("ex32");
    auto loc = make_localization(p, 0.5);
    for (double u : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        auto r = solve_tilted(p, loc, scalar(0), scalar(u), SolveConfig{});
        ASSERT_TRUE(r.single_valued);
        double x = oracle::ex32_argmin(u);
        EXPECT_NEAR(r.minimizers[0][0], x, 1e-9 * std::max(1.0, x / u)) << u;
        EXPECT_NEAR(r.value, oracle::ex32_phi(x, u), 1e-14) << u;
    }
    // The asymptotic form (u^2/2)^(3/7) at u = 1e-4.
    double x = solve_tilted(p, loc, scalar(0), scalar(1e-4), SolveConfig{}).minimizers[0][0];
    EXPECT_NEAR(x / std::pow(5e-9, 3.0 / 7.0), 1.0, 0.05);
}

TEST(SolveTilted, NegQuadraticHitsBoundary) {
    auto p = registry_build("neg_quadratic");
    auto loc = make_localization(p, 0.5);
    auto r0 = solve_tilted(p, loc, scalar(0), Vec(), SolveConfig{});
    EXPECT_FALSE(r0.single_valued);
    EXPECT_TRUE(r0.boundary_hit);
    ASSERT_EQ(r0.minimizers.size(), 2u);
    EXPECT_LT(r0.minimizers[0][0], 0);  // lexicographic order
    auto r1 = solve_tilted(p, loc, scalar(0.1), Vec(), SolveConfig{});
    EXPECT_TRUE(r1.single_valued);
    EXPECT_TRUE(r1.boundary_hit);
    EXPECT_NEAR(r1.minimizers[0][0], 0.5, 1e-8);
}

TEST(SolveTilted, Abs1dSharpMinimum) {
    auto p = registry_build("abs1d");
    auto r = solve_tilted(p, make_localization(p, 0.5), scalar(0.3), Vec(), SolveConfig{});
    ASSERT_TRUE(r.single_valued);
    EXPECT_NEAR(r.minimizers[0][0], 0.0, 1e-8);
}

TEST(SolveTilted, Ex33DiagonalPerturbation) {
    auto p = registry_build("ex33");
    auto loc = make_localization(p, 0.5);
    for (double t : {-1e-2, -1e-3, 0.0, 1e-3}) {
        auto r = solve_tilted(p, loc, Vec::Zero(4), Vec::Constant(4, t), SolveConfig{});
        ASSERT_TRUE(r.single_valued) << t;
        EXPECT_LE((r.minimizers[0] - vec({0, 0, t, 0})).cwiseAbs().maxCoeff(), 1e-7) << t;
        EXPECT_NEAR(r.value, t, 1e-9);
    }
}

TEST(SolveTilted, Ex33SingleValuedExactlyOnBalancedPerturbations) {
    // With A = (u1+u2)/2 and C = (u3+u4)/2 the minimizers satisfy x1 = (u2-u1)/2, x3 >= A,
    // x3 + x4^2/2 >= C; when A != C either x2 or x4 keeps a free interval.
    auto p = registry_build("ex33");
    auto loc = make_localization(p, 0.5);
    for (int mask = 0; mask < 16; ++mask) {
        Vec u(4);
        for (int i = 0; i < 4; ++i) u[i] = (mask >> i) & 1 ? -1e-2 : 0.0;
        auto r = solve_tilted(p, loc, Vec::Zero(4), u, SolveConfig{});
        bool balanced = std::abs(u[0] + u[1] - u[2] - u[3]) < 1e-15;
        EXPECT_EQ(r.single_valued, balanced) << u.transpose();
        EXPECT_NEAR(r.value, 0.5 * std::max(u[0] + u[1], u[2] + u[3]), 1e-9) << u.transpose();
    }
}

TEST(SolveTilted, ErrorsAndValidation) {
    auto q = registry_build("quadratic");
    auto loc = make_localization(q, 0.5);
    EXPECT_THROW(solve_tilted(q, loc, Vec::Zero(2), scalar(0), SolveConfig{}), InputError);
    SolveConfig even;
    even.grid_points_per_axis = 20;
    EXPECT_THROW(solve_tilted(q, loc, scalar(0), scalar(0), even), ConfigError);
    SolveConfig bad_tol;
    bad_tol.refine_tol = 0;
    EXPECT_THROW(solve_tilted(q, loc, scalar(0), scalar(0), bad_tol), ConfigError);
    EXPECT_THROW(make_localization(q, -1.0), ConfigError);

    auto e = squared_equality();
    auto le = make_localization(e, 0.5);
    EXPECT_NO_THROW(solve_tilted(e, le, scalar(0), scalar(0), SolveConfig{}));
    EXPECT_THROW(solve_tilted(e, le, scalar(0), scalar(1.0), SolveConfig{}), EmptyLocalProblem);
}

TEST(SolveTilted, MinimizersInsideBallAndNearValue) {
    SolveConfig cfg;
    for (const auto& id : registry_ids()) {
        auto p = registry_build(id);
        auto loc = make_localization(p, 0.5);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> unif(-0.1, 0.1);
        for (int k = 0; k < 5; ++k) {
            Vec v(p.n), u(p.m);
            for (int i = 0; i < p.n; ++i) v[i] = unif(rng);
            for (int i = 0; i < p.m; ++i) u[i] = unif(rng);
            auto r = solve_tilted(p, loc, v, u, cfg);
            for (const auto& x : r.minimizers) {
                EXPECT_LT((x - loc.xbar).norm(), loc.delta) << id;
                double val = eval_phi(p, x, u);
                if (p.is_composite() && !std::isfinite(val)) {
                    // Indicator rows hold up to refinement accuracy.
                    const auto& c = p.composite();
                    Vec w = c.F.value(x) + u;
                    EXPECT_LE(w.maxCoeff(), cfg.refine_tol) << id;
                    val = c.f0.value(x);
                }
                val -= v.dot(x - loc.xbar);
                EXPECT_LE(std::abs(val - r.value), cfg.cluster_tol + 1e-9) << id;
            }
        }
    }
}

TEST(SolveTilted, ValueBelowSampledProbes) {
    for (const auto& id : registry_ids()) {
        auto p = registry_build(id);
        auto loc = make_localization(p, 0.5);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif(0, 1);
        Vec v = Vec::Constant(p.n, 0.05), u = Vec::Constant(p.m, -0.02);
        auto r = solve_tilted(p, loc, v, u, SolveConfig{});
        for (int k = 0; k < 500; ++k) {
            Vec d(p.n);
            for (int i = 0; i < p.n; ++i) d[i] = normal(rng);
            Vec x = loc.xbar + d.normalized() * (loc.delta * 0.999 * unif(rng));
            double f = eval_phi(p, x, u);
            if (!std::isfinite(f)) continue;
            EXPECT_LE(r.value, f - v.dot(x - loc.xbar) + 1e-9) << id;
        }
    }
}

TEST(SolveTilted, GridRefinementChangesValuesByLittle) {
    SolveConfig coarse, fine;
    fine.grid_points_per_axis = 2 * coarse.grid_points_per_axis + 1;
    for (const auto& id : registry_ids()) {
        auto p = registry_build(id);
        auto loc = make_localization(p, 0.5);
        Vec v = Vec::Constant(p.n, 0.03), u = Vec::Constant(p.m, -0.01);
        double a = solve_tilted(p, loc, v, u, coarse).value;
        double b = solve_tilted(p, loc, v, u, fine).value;
        EXPECT_LE(std::abs(a - b), 10 * coarse.refine_tol) << id;
    }
}

TEST(StationaryMap, QuadraticAtAnchor) {
    auto p = registry_build("quadratic");
    auto pts = truncated_stationary_map(p, make_localization(p, 0.5), scalar(0), scalar(0), SolveConfig{});
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(pts[0][0], 0.0, 1e-9);
}

TEST(StationaryMap, Ex33AgreesWithSolver) {
    auto p = registry_build("ex33");
    auto loc = make_localization(p, 0.5);
    Vec u = Vec::Constant(4, -1e-3);
    auto pts = truncated_stationary_map(p, loc, Vec::Zero(4), u, SolveConfig{});
    auto r = solve_tilted(p, loc, Vec::Zero(4), u, SolveConfig{});
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_LE((pts[0] - r.minimizers[0]).norm(), SolveConfig{}.cluster_tol);
    EXPECT_LE(stationarity_residual(p, pts[0], u, Vec::Zero(4)), 1e-9);
}

TEST(StationaryMap, Ex32UniqueStationaryPointIsArgmin) {
    auto p = registry_build("ex32");
    auto loc = make_localization(p, 0.5);
    auto pts = truncated_stationary_map(p, loc, scalar(0), scalar(1e-3), SolveConfig{});
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(pts[0][0], oracle::ex32_argmin(1e-3), 1e-9);
}

TEST(StationaryMap, AlphaFilterAndNegQuadratic) {
    // -x^2/2 - v x has its only stationary point at x = -v, a maximum; it is still stationary.
    auto p = registry_build("neg_quadratic");
    auto loc = make_localization(p, 0.5);
    auto pts = truncated_stationary_map(p, loc, scalar(0.1), Vec(), SolveConfig{});
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(pts[0][0], -0.1, 1e-9);
    // x^2/2 - 0.3 x is stationary at 0.3 with phi = 0.045, above alpha = 0.01.
    auto q = registry_build("quadratic");
    auto strict = make_localization(q, 0.5, 0.01);
    EXPECT_TRUE(truncated_stationary_map(q, strict, scalar(0.3), scalar(0), SolveConfig{}).empty());
    EXPECT_EQ(truncated_stationary_map(q, strict, scalar(0.1), scalar(0), SolveConfig{}).size(), 1u);
}

TEST(TruncationIdentity, NodewiseOnSweeps) {
    SolveConfig cfg;
    struct Case {
        std::string id;
        std::vector<Vec> v_grid, u_grid;
    };
    std::vector<Case> cases = {
        {"quadratic", box_grid(1, 0.1, 5), box_grid(1, 0.1, 5)},
        {"ex32", box_grid(1, 0.1, 5), {scalar(1e-3), scalar(1e-2), scalar(-1e-2)}},
        {"ex33", {Vec::Zero(4)}, {Vec::Constant(4, -1e-2), Vec::Constant(4, -1e-3), Vec::Constant(4, 1e-3)}},
    };
    for (const auto& c : cases) {
        auto p = registry_build(c.id);
        auto loc = make_localization(p, 0.5);
        for (const auto& v : c.v_grid)
            for (const auto& u : c.u_grid) {
                auto r = solve_tilted(p, loc, v, u, cfg);
                auto pts = truncated_stationary_map(p, loc, v, u, cfg);
                ASSERT_EQ(pts.size(), r.minimizers.size()) << c.id << " v=" << v.transpose() << " u=" << u.transpose();
                for (std::size_t k = 0; k < pts.size(); ++k)
                    EXPECT_LE((pts[k] - r.minimizers[k]).norm(), cfg.cluster_tol) << c.id;
            }
    }
}

TEST(ValueSurface, QuadraticMatchesClosedForm) {
    auto p = registry_build("quadratic");
    auto loc = make_localization(p, 0.5);
    auto vg = box_grid(1, 0.1, 7), ug = box_grid(1, 0.1, 5);
    auto s = value_surface(p, loc, vg, ug, SolveConfig{});
    ASSERT_EQ(s.rows.size(), vg.size() * ug.size());
    EXPECT_EQ(s.v_count, vg.size());
    for (std::size_t iv = 0; iv < vg.size(); ++iv)
        for (std::size_t iu = 0; iu < ug.size(); ++iu) {
            const auto& row = s.rows[iv * ug.size() + iu];
            EXPECT_EQ(row.v, vg[iv]);
            EXPECT_EQ(row.u, ug[iu]);
            double w = vg[iv][0] + ug[iu][0];
            EXPECT_NEAR(row.result.value, -0.5 * w * w, 1e-12);
            EXPECT_NEAR(row.argmin()[0], w, 1e-9);
        }
}

TEST(ValueSurface, RowCountAndFlaggedFailures) {
    auto p = registry_build("ex32");
    auto s = value_surface(p, make_localization(p, 0.5), box_grid(1, 0.1, 3), box_grid(1, 0.1, 4), SolveConfig{});
    EXPECT_EQ(s.rows.size(), 12u);

    auto e = squared_equality();
    auto se = value_surface(e, make_localization(e, 0.5), {scalar(0)}, {scalar(0), scalar(1.0)}, SolveConfig{});
    ASSERT_EQ(se.rows.size(), 2u);
    EXPECT_TRUE(se.rows[0].ok);
    EXPECT_FALSE(se.rows[1].ok);
    EXPECT_FALSE(se.rows[1].error.empty());
    EXPECT_THROW(se.rows[1].argmin(), ProbeError);
}

TEST(ValueSurface, DeterministicAcrossWorkers) {
    auto p = registry_build("ex33");
    auto loc = make_localization(p, 0.5);
    auto vg = ray_grid(4, 0.1, 2);
    std::vector<Vec> ug = {Vec::Zero(4), Vec::Constant(4, -1e-3)};
    SolveConfig one, three;
    three.workers = 3;
    auto a = value_surface(p, loc, vg, ug, one);
    auto b = value_surface(p, loc, vg, ug, three);
    std::ostringstream ca, cb;
    write_surface_csv(ca, a, 4, 4);
    write_surface_csv(cb, b, 4, 4);
    EXPECT_EQ(ca.str(), cb.str());
}

TEST(ValueSurface, CsvColumns) {
    auto p = registry_build("quadratic");
    auto s = value_surface(p, make_localization(p, 0.5), {scalar(0.1)}, {scalar(0.0)}, SolveConfig{});
    std::ostringstream out;
    write_surface_csv(out, s, 1, 1);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "v_1,u_1,m_delta,x_1,single_valued,boundary_hit");
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
}

TEST(ValueFunction, ConcaveAndDeltaLipschitzInV) {
    // m(., u) is an infimum of affine functions of v with slopes -(x - xbar), |x - xbar| < delta.
    SolveConfig cfg;
    for (const auto& id : registry_ids()) {
        auto p = registry_build(id);
        auto loc = make_localization(p, 0.5);
        auto vg = p.n == 1 ? box_grid(1, 0.1, 21) : ray_grid(p.n, 0.1, 1);
        std::vector<Vec> ug = {Vec::Zero(p.m)};
        if (p.m > 0) ug.push_back(Vec::Constant(p.m, -1e-2));
        auto s = value_surface(p, loc, vg, ug, cfg);
        for (std::size_t iu = 0; iu < ug.size(); ++iu) {
            auto m_at = [&](std::size_t iv) { return s.rows[iv * ug.size() + iu].result.value; };
            for (std::size_t a = 0; a < vg.size(); ++a)
                for (std::size_t b = a + 1; b < vg.size(); ++b) {
                    Vec mid = 0.5 * (vg[a] + vg[b]);
                    double m_mid = solve_tilted(p, loc, mid, ug[iu], cfg).value;
                    EXPECT_GE(m_mid, 0.5 * m_at(a) + 0.5 * m_at(b) - 1e-7) << id;
                    EXPECT_LE(std::abs(m_at(a) - m_at(b)), (loc.delta + 1e-6) * (vg[a] - vg[b]).norm()) << id;
                }
        }
    }
}
