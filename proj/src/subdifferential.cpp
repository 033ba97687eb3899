#include "varstab/subdifferential.hpp"

#include <cmath>
#include <random>

#include "varstab/lp.hpp"

namespace varstab {

namespace {

Vec unit(int m, int i, double sign = 1.0) {
    Vec e = Vec::Zero(m);
    e[i] = sign;
    return e;
}

void pin_zero(PolyhedralSet& s, int m, int i) { s.add_equality(unit(m, i), 0.0); }

} // namespace

GSubdifferential subdiff_g(const ConvexPiece& g, const Vec& z, double tol) {
    const int m = piece_dim(g);
    if (z.size() != m) throw InputError("subdiff_g: dimension mismatch");
    GSubdifferential out;
    out.kind = GSubdifferential::Kind::polyhedral;
    out.set = PolyhedralSet(m);
    auto empty = [&] {
        GSubdifferential e;
        e.set = PolyhedralSet::empty_set(m);
        return e;
    };

    if (auto* k = std::get_if<OrthantNonpos>(&g)) {
        for (int i = 0; i < m; ++i) {
            if (i >= k->s) {
                pin_zero(out.set, m, i);
            } else if (z[i] > tol) {
                return empty();
            } else if (z[i] >= -tol) {
                out.set.add_inequality(unit(m, i, -1.0), 0.0);
            } else {
                pin_zero(out.set, m, i);
            }
        }
    } else if (std::holds_alternative<ZeroIndicator>(g)) {
        for (int i = 0; i < m; ++i)
            if (std::abs(z[i]) > tol) return empty();
    } else if (auto* b = std::get_if<Box>(&g)) {
        for (int i = 0; i < m; ++i) {
            if (z[i] < b->lo[i] - tol || z[i] > b->hi[i] + tol) return empty();
            bool at_lo = std::abs(z[i] - b->lo[i]) <= tol;
            bool at_hi = std::abs(z[i] - b->hi[i]) <= tol;
            if (at_lo && at_hi) continue;
            if (at_lo) {
                out.set.add_inequality(unit(m, i), 0.0);
            } else if (at_hi) {
                out.set.add_inequality(unit(m, i, -1.0), 0.0);
            } else {
                pin_zero(out.set, m, i);
            }
        }
    } else if (auto* q = std::get_if<SquaredNorm>(&g)) {
        for (int i = 0; i < m; ++i) out.set.add_equality(unit(m, i), q->weight * z[i]);
    } else {
        const auto& nrm = std::get<EuclideanNorm>(g);
        double r = z.norm();
        if (r <= tol) {
            out.kind = GSubdifferential::Kind::ball;
            out.center = Vec::Zero(m);
            out.radius = nrm.weight;
            return out;
        }
        for (int i = 0; i < m; ++i) out.set.add_equality(unit(m, i), nrm.weight * z[i] / r);
    }
    if (m <= PolyhedralSet::kMaxVertexDim) out.set.enumerate_vertices();
    return out;
}

bool in_subdiff_g(const ConvexPiece& g, const Vec& z, const Vec& y, double tol) {
    const int m = piece_dim(g);
    if (z.size() != m || y.size() != m) return false;
    if (auto* k = std::get_if<OrthantNonpos>(&g)) {
        for (int i = 0; i < m; ++i) {
            if (i >= k->s) {
                if (std::abs(y[i]) > tol) return false;
                continue;
            }
            if (z[i] > tol || y[i] < -tol) return false;
            if (z[i] < -tol && std::abs(y[i]) > tol) return false;
        }
        return true;
    }
    if (std::holds_alternative<ZeroIndicator>(g)) return m == 0 || z.cwiseAbs().maxCoeff() <= tol;
    if (auto* b = std::get_if<Box>(&g)) {
        for (int i = 0; i < m; ++i) {
            if (z[i] < b->lo[i] - tol || z[i] > b->hi[i] + tol) return false;
            bool at_lo = std::abs(z[i] - b->lo[i]) <= tol;
            bool at_hi = std::abs(z[i] - b->hi[i]) <= tol;
            if (at_lo && at_hi) continue;
            if (at_lo && y[i] > tol) return false;
            if (at_hi && y[i] < -tol) return false;
            if (!at_lo && !at_hi && std::abs(y[i]) > tol) return false;
        }
        return true;
    }
    if (auto* q = std::get_if<SquaredNorm>(&g)) return (y - q->weight * z).norm() <= tol * (1.0 + y.norm());
    const auto& nrm = std::get<EuclideanNorm>(g);
    double r = z.norm();
    if (r <= tol) return y.norm() <= nrm.weight + tol;
    return (y - nrm.weight * z / r).norm() <= tol * (1.0 + nrm.weight);
}

PolyhedralSet multiplier_set(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v,
                             double active_tol) {
    const auto& c = p.composite();
    if (x.size() != p.n || u.size() != p.m || v.size() != p.n) throw InputError("multiplier_set: dimension mismatch");
    auto [g0, J] = grad_f0_and_jac_F(p, x);
    Vec z = c.F.value(x) + u;
    GSubdifferential sub = subdiff_g(c.g, z, active_tol);
    if (sub.kind == GSubdifferential::Kind::empty) return PolyhedralSet::empty_set(p.m);
    if (sub.kind == GSubdifferential::Kind::ball)
        throw UnsupportedOperation("multiplier_set: subdifferential of g is a ball (norm at 0), not polyhedral");
    PolyhedralSet set = sub.set;
    for (int j = 0; j < p.n; ++j) set.add_equality(J.col(j), v[j] - g0[j]);
    if (p.m <= PolyhedralSet::kMaxVertexDim) set.enumerate_vertices();
    return set;
}

bool kkt_member(const ParametricProblem& p, const Vec& x, const Vec& u, const Vec& v, const Vec& y, double tol) {
    const auto& c = p.composite();
    auto [g0, J] = grad_f0_and_jac_F(p, x);
    Vec r = g0 + J.transpose() * y - v;
    double scale = 1.0 + v.cwiseAbs().maxCoeff() + g0.cwiseAbs().maxCoeff();
    if (r.size() > 0 && r.cwiseAbs().maxCoeff() > tol * scale) return false;
    return in_subdiff_g(c.g, c.F.value(x) + u, y, tol);
}

CQReport check_basic_cq(const ParametricProblem& p, const Vec& x, const Vec& u, double tol) {
    CQReport rep;
    if (!p.is_composite()) {
        rep.holds = true;
        rep.certificate = Vec::Zero(p.m);
        rep.detail = "closed form with full domain: no nonzero horizon subgradients";
        return rep;
    }
    const auto& c = p.composite();
    if (!piece_is_polyhedral(c.g)) {
        rep.holds = true;
        rep.certificate = Vec::Zero(p.n);
        rep.detail = "g is finite everywhere: horizon subdifferential is {0}";
        return rep;
    }
    auto J = c.F.jacobian(x);
    Vec z = c.F.value(x) + u;

    // Active rows: inequalities G w <= -1 and equalities E w = 0, with the
    // index of the originating coordinate for certificates.
    std::vector<Vec> G, E;
    std::vector<int> gidx, eidx;
    std::vector<double> gsign;
    if (auto* k = std::get_if<OrthantNonpos>(&c.g)) {
        for (int i = 0; i < k->s; ++i) {
            if (z[i] > tol) throw InputError("check_basic_cq: point violates constraint " + std::to_string(i + 1));
            if (z[i] >= -tol) {
                G.push_back(J.row(i).transpose());
                gidx.push_back(i);
                gsign.push_back(1.0);
            }
        }
    } else if (std::holds_alternative<ZeroIndicator>(c.g)) {
        for (int i = 0; i < p.m; ++i) {
            if (std::abs(z[i]) > tol) throw InputError("check_basic_cq: point violates equality " + std::to_string(i + 1));
            E.push_back(J.row(i).transpose());
            eidx.push_back(i);
        }
    } else {
        const auto& b = std::get<Box>(c.g);
        for (int i = 0; i < p.m; ++i) {
            if (z[i] < b.lo[i] - tol || z[i] > b.hi[i] + tol)
                throw InputError("check_basic_cq: point violates box row " + std::to_string(i + 1));
            bool at_lo = std::abs(z[i] - b.lo[i]) <= tol;
            bool at_hi = std::abs(z[i] - b.hi[i]) <= tol;
            if (at_lo && at_hi) {
                E.push_back(J.row(i).transpose());
                eidx.push_back(i);
            } else if (at_hi) {
                G.push_back(J.row(i).transpose());
                gidx.push_back(i);
                gsign.push_back(1.0);
            } else if (at_lo) {
                G.push_back(-J.row(i).transpose());
                gidx.push_back(i);
                gsign.push_back(-1.0);
            }
        }
    }
    const int n = p.n;
    const int ng = static_cast<int>(G.size());
    const int ne = static_cast<int>(E.size());

    if (ne > 0) {
        Mat Em(ne, n);
        for (int i = 0; i < ne; ++i) Em.row(i) = E[i].transpose();
        Eigen::FullPivLU<Mat> lu(Em.transpose());
        lu.setThreshold(1e-10);
        if (lu.rank() < ne) {
            Mat ker = lu.kernel();
            rep.holds = false;
            rep.certificate = Vec::Zero(p.m);
            for (int i = 0; i < ne; ++i) rep.certificate[eidx[i]] = ker(i, 0);
            rep.certificate /= rep.certificate.cwiseAbs().maxCoeff();
            rep.detail = "active equality gradients are linearly dependent";
            return rep;
        }
    }
    if (ng == 0 && ne == 0) {
        rep.holds = true;
        rep.certificate = Vec::Zero(n);
        rep.detail = "no active constraints";
        return rep;
    }

    // min sum t  s.t.  G w <= -1,  E w = 0,  -t <= w <= t; variables (w free, t >= 0).
    Vec cost(2 * n);
    cost << Vec::Zero(n), Vec::Ones(n);
    Mat Aub = Mat::Zero(ng + 2 * n, 2 * n);
    Vec bub = Vec::Zero(ng + 2 * n);
    for (int i = 0; i < ng; ++i) {
        Aub.row(i).head(n) = G[i].transpose();
        bub[i] = -1.0;
    }
    for (int j = 0; j < n; ++j) {
        Aub(ng + j, j) = 1.0;
        Aub(ng + j, n + j) = -1.0;
        Aub(ng + n + j, j) = -1.0;
        Aub(ng + n + j, n + j) = -1.0;
    }
    Mat Aeq = Mat::Zero(ne, 2 * n);
    for (int i = 0; i < ne; ++i) Aeq.row(i).head(n) = E[i].transpose();
    std::vector<bool> nonneg(2 * n, false);
    for (int j = 0; j < n; ++j) nonneg[n + j] = true;
    LpResult lp = solve_lp(cost, Aeq, Vec::Zero(ne), Aub, bub, nonneg);
    if (lp.status == LpStatus::optimal) {
        rep.holds = true;
        rep.certificate = lp.x.head(n);
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(rep.certificate[j]) < 1e-13) rep.certificate[j] = 0.0;
        rep.detail = "strictly feasible direction found (MFCQ)";
        return rep;
    }
    if (lp.status != LpStatus::infeasible)
        throw NumericalFailure("check_basic_cq: direction LP ended with status " +
                               std::to_string(static_cast<int>(lp.status)) + " (" + std::to_string(ng) +
                               " active inequalities, " + std::to_string(ne) + " equalities)");

    // Alternative: y_G >= 0, sum y_G = 1, G^T y_G + E^T y_E = 0.
    Vec c2 = Vec::Zero(ng + ne);
    Mat Aeq2 = Mat::Zero(n + 1, ng + ne);
    Vec beq2 = Vec::Zero(n + 1);
    for (int i = 0; i < ng; ++i) {
        Aeq2.col(i).head(n) = G[i];
        Aeq2(n, i) = 1.0;
    }
    for (int i = 0; i < ne; ++i) Aeq2.col(ng + i).head(n) = E[i];
    beq2[n] = 1.0;
    std::vector<bool> nn2(ng + ne, false);
    for (int i = 0; i < ng; ++i) nn2[i] = true;
    LpResult alt = solve_lp(c2, Aeq2, beq2, Mat(0, ng + ne), Vec(0), nn2);
    if (alt.status != LpStatus::optimal)
        throw NumericalFailure("check_basic_cq: neither a direction nor a horizon multiplier was found");
    rep.holds = false;
    rep.certificate = Vec::Zero(p.m);
    for (int i = 0; i < ng; ++i) rep.certificate[gidx[i]] += gsign[i] * alt.x[i];
    for (int i = 0; i < ne; ++i) rep.certificate[eidx[i]] += alt.x[ng + i];
    rep.detail = "nonzero nonnegative combination of active gradients vanishes";
    return rep;
}

bool multiplier_set_convexity_test(const PolyhedralSet& set, int samples,
                                   const std::function<bool(const Vec&)>& member, std::uint64_t seed) {
    const auto& verts = set.vertices();
    auto check = [&](const Vec& y) { return member ? member(y) : set.contains(y); };
    if (verts.size() <= 1) return verts.empty() || check(verts.front());
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    for (int s = 0; s < samples; ++s) {
        Vec w(static_cast<Eigen::Index>(verts.size()));
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = expo(rng);
        w /= w.sum();
        Vec y = Vec::Zero(set.dim());
        for (std::size_t i = 0; i < verts.size(); ++i) y += w[static_cast<Eigen::Index>(i)] * verts[i];
        if (!check(y)) return false;
    }
    return true;
}

} // namespace varstab
