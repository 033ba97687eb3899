#include <gtest/gtest.h>

#include <random>

#include "varstab/lp.hpp"
#include "varstab/registry.hpp"
#include "varstab/solver.hpp"
#include "varstab/subdifferential.hpp"

using namespace varstab;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(xs.size());
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

ParametricProblem two_sided_1d() {
    // x <= 0 and -x <= 0, both active at 0.
    ParametricProblem p;
    p.name = "two_sided";
    p.n = 1;
    p.m = 2;
    p.xbar = Vec::Zero(1);
    Composite c;
    c.f0 = Polynomial(1, {{1.0, {1}}});
    c.F.domain_dim = 1;
    c.F.components = {Polynomial(1, {{1.0, {1}}}), Polynomial(1, {{-1.0, {1}}})};
    c.g = OrthantNonpos{2, 2};
    p.body = c;
    return p;
}

} // namespace

TEST(Lp, SmallFeasibleAndInfeasible) {
    // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0: optimum at (1.6, 1.2).
    Mat A(2, 2);
    A << 1, 2, 3, 1;
    auto r = solve_lp(vec({-1, -1}), Mat(0, 2), Vec(0), A, vec({4, 6}), {true, true});
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.x[0], 1.6, 1e-10);
    EXPECT_NEAR(r.x[1], 1.2, 1e-10);
    Mat B(1, 1);
    B << 1;
    auto s = solve_lp(vec({0}), B, vec({-1}), Mat(0, 1), Vec(0), {true});
    EXPECT_EQ(s.status, LpStatus::infeasible);
    auto t = solve_lp(vec({-1}), Mat(0, 1), Vec(0), Mat(0, 1), Vec(0), {true});
    EXPECT_EQ(t.status, LpStatus::unbounded);
}

TEST(SubdiffG, OrthantPartiallyActive) {
    auto d = subdiff_g(OrthantNonpos{4, 4}, vec({-1, -1, 0, 0}));
    ASSERT_EQ(d.kind, GSubdifferential::Kind::polyhedral);
    EXPECT_TRUE(d.set.contains(vec({0, 0, 1, 2})));
    EXPECT_FALSE(d.set.contains(vec({0.1, 0, 1, 2})));
    EXPECT_FALSE(d.set.contains(vec({0, 0, -0.1, 0})));
}

TEST(SubdiffG, OrthantAllActiveIsNonnegativeOrthant) {
    auto d = subdiff_g(OrthantNonpos{4, 4}, Vec::Zero(4));
    ASSERT_EQ(d.kind, GSubdifferential::Kind::polyhedral);
    EXPECT_TRUE(d.set.contains(vec({1, 2, 3, 4})));
    EXPECT_FALSE(d.set.contains(vec({1, 2, 3, -4})));
}

TEST(SubdiffG, OutsideDomainIsEmptySignal) {
    EXPECT_EQ(subdiff_g(OrthantNonpos{4, 4}, vec({0.1, 0, 0, 0})).kind, GSubdifferential::Kind::empty);
    EXPECT_EQ(subdiff_g(ZeroIndicator{1}, vec({0.1})).kind, GSubdifferential::Kind::empty);
}

TEST(SubdiffG, FreeCoordinatesPastS) {
    auto d = subdiff_g(OrthantNonpos{1, 2}, vec({0, 5}));
    EXPECT_TRUE(d.set.contains(vec({3, 0})));
    EXPECT_FALSE(d.set.contains(vec({3, 1})));
}

TEST(SubdiffG, BoxNormAndSquaredNorm) {
    Box b{vec({-1, -1}), vec({1, 1})};
    auto d = subdiff_g(b, vec({1, 0}));
    EXPECT_TRUE(d.set.contains(vec({2, 0})));
    EXPECT_FALSE(d.set.contains(vec({-2, 0})));
    EXPECT_FALSE(d.set.contains(vec({0, 1})));

    auto n0 = subdiff_g(EuclideanNorm{2.0, 2}, Vec::Zero(2));
    EXPECT_EQ(n0.kind, GSubdifferential::Kind::ball);
    EXPECT_DOUBLE_EQ(n0.radius, 2.0);
    EXPECT_TRUE(in_subdiff_g(EuclideanNorm{2.0, 2}, vec({3, 4}), vec({1.2, 1.6})));

    auto s = subdiff_g(SquaredNorm{3.0, 2}, vec({1, -2}));
    ASSERT_EQ(s.kind, GSubdifferential::Kind::polyhedral);
    EXPECT_TRUE(s.set.contains(vec({3, -6})));
}

TEST(MultiplierSet, Ex33SegmentVertices) {
    auto p = registry_build("ex33");
    auto Y = multiplier_set(p, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4));
    ASSERT_TRUE(Y.vertices_enumerated());
    const auto& V = Y.vertices();
    ASSERT_EQ(V.size(), 2u);
    std::vector<Vec> expected = {vec({0.5, 0.5, 0, 0}), vec({0, 0, 0.5, 0.5})};
    for (const auto& e : expected) {
        double best = kInf;
        for (const auto& y : V) best = std::min(best, (y - e).norm());
        EXPECT_LE(best, 1e-8);
    }
    EXPECT_EQ(Y.vertex_affine_dimension(), 1);
}

TEST(MultiplierSet, Ex33KktSystem) {
    auto p = registry_build("ex33");
    auto Y = multiplier_set(p, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0, 1);
    for (int k = 0; k < 200; ++k) {
        Vec y = vec({unif(rng), unif(rng), unif(rng), unif(rng)});
        bool kkt = std::abs(y[0] - y[1]) < 1e-12 && std::abs(y[2] - y[3]) < 1e-12 && std::abs(y.sum() - 1) < 1e-12;
        EXPECT_EQ(Y.contains(y), kkt);
        double t = unif(rng);
        Vec seg = 0.5 * vec({1 - t, 1 - t, t, t});
        EXPECT_TRUE(Y.contains(seg));
        EXPECT_TRUE(kkt_member(p, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4), seg));
    }
}

TEST(MultiplierSet, VerticesSatisfyStationarity) {
    auto p = registry_build("ex33");
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-1e-3, 0);
    for (int k = 0; k < 20; ++k) {
        double t = unif(rng);
        Vec u = Vec::Constant(4, t), x = vec({0, 0, t, 0});
        auto Y = multiplier_set(p, x, u, Vec::Zero(4));
        auto [g0, J] = grad_f0_and_jac_F(p, x);
        for (const auto& y : Y.vertices()) {
            EXPECT_LE((g0 + J.transpose() * y).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_TRUE(in_subdiff_g(p.composite().g, p.composite().F.value(x) + u, y));
        }
    }
}

TEST(MultiplierSet, SmoothUnconstrainedCase) {
    // f0 = x^2/2 with an unbounded box: Y = {0} when f0'(x) = v, else empty.
    ParametricProblem p;
    p.name = "free";
    p.n = 1;
    p.m = 1;
    p.xbar = Vec::Zero(1);
    Composite c;
    c.f0 = Polynomial(1, {{0.5, {2}}});
    c.F.domain_dim = 1;
    c.F.components = {Polynomial(1, {{1.0, {1}}})};
    c.g = Box{vec({-kInf}), vec({kInf})};
    p.body = c;
    auto Y = multiplier_set(p, vec({0.3}), Vec::Zero(1), vec({0.3}));
    ASSERT_EQ(Y.vertices().size(), 1u);
    EXPECT_NEAR(Y.vertices()[0][0], 0.0, 1e-12);
    EXPECT_TRUE(multiplier_set(p, vec({0.3}), Vec::Zero(1), vec({0.5})).is_empty());
}

TEST(MultiplierSet, OuterSemicontinuityOnEx33) {
    auto p = registry_build("ex33");
    auto loc = make_localization(p, 0.5);
    SolveConfig cfg;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(-0.5e-4, 0.5e-4);
    int checked = 0;
    for (int k = 0; k < 10; ++k) {
        Vec u(4), v(4);
        for (int i = 0; i < 4; ++i) {
            u[i] = unif(rng);
            v[i] = unif(rng);
        }
        Vec x = solve_tilted(p, loc, v, u, cfg).minimizers.front();
        auto Y = multiplier_set(p, x, u, v, 1e-7);
        EXPECT_FALSE(Y.is_empty());
        for (const auto& y : Y.vertices()) {
            double theta = std::clamp(y[2] + y[3], 0.0, 1.0);
            Vec proj = 0.5 * vec({1 - theta, 1 - theta, theta, theta});
            EXPECT_LE((y - proj).norm(), 1e-2);
            ++checked;
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(MultiplierSet, ConvexityTest) {
    auto p = registry_build("ex33");
    auto Y = multiplier_set(p, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4));
    auto member = [&](const Vec& y) { return kkt_member(p, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4), y); };
    EXPECT_TRUE(member(vec({0.25, 0.25, 0.25, 0.25})));
    EXPECT_TRUE(multiplier_set_convexity_test(Y, 100, member));
    Vec mid = 0.5 * (Y.vertices()[0] + Y.vertices()[1]);
    auto [g0, J] = grad_f0_and_jac_F(p, Vec::Zero(4));
    EXPECT_LT((g0 + J.transpose() * mid).norm(), 1e-9);

    PolyhedralSet point(1);
    point.add_equality(vec({1}), 2.0);
    point.enumerate_vertices();
    EXPECT_TRUE(multiplier_set_convexity_test(point, 10));
}

TEST(BasicCq, Ex33HoldsWithStrictCertificate) {
    auto p = registry_build("ex33");
    auto cq = check_basic_cq(p, Vec::Zero(4), Vec::Zero(4));
    ASSERT_TRUE(cq.holds);
    auto [g0, J] = grad_f0_and_jac_F(p, Vec::Zero(4));
    Vec prods = J * cq.certificate;
    for (int i = 0; i < 4; ++i) EXPECT_LT(prods[i], -1e-9);
    // (0,0,1,0) is one valid certificate.
    EXPECT_LE((J * vec({0, 0, 1, 0})).maxCoeff(), -1.0 + 1e-12);
}

TEST(BasicCq, ClosedFormFullDomainHolds) {
    auto cq = check_basic_cq(registry_build("ex32"), Vec::Zero(1), Vec::Zero(1));
    EXPECT_TRUE(cq.holds);
    EXPECT_EQ(cq.certificate, Vec::Zero(1));
}

TEST(BasicCq, OpposedGradientsFail) {
    auto cq = check_basic_cq(two_sided_1d(), Vec::Zero(1), Vec::Zero(2));
    EXPECT_FALSE(cq.holds);
    ASSERT_EQ(cq.certificate.size(), 2);
    EXPECT_GT(cq.certificate.norm(), 0);
    EXPECT_NEAR(cq.certificate[0] - cq.certificate[1], 0.0, 1e-9);
}

TEST(BasicCq, InvariantUnderRowRescaling) {
    auto base = check_basic_cq(registry_build("ex33"), Vec::Zero(4), Vec::Zero(4));
    for (double s : {0.1, 10.0, 1000.0})
        EXPECT_EQ(check_basic_cq(make_ex33(s), Vec::Zero(4), Vec::Zero(4)).holds, base.holds) << s;
    EXPECT_FALSE(check_basic_cq(two_sided_1d(), Vec::Zero(1), Vec::Zero(2)).holds);
}
