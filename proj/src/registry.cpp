#include "varstab/registry.hpp"

#include <cmath>
#include <sstream>

namespace varstab {

namespace {

Polynomial poly(int n, std::vector<Monomial> terms) { return Polynomial(n, std::move(terms)); }

ParametricProblem make_ex32() {
    ParametricProblem p;
    p.name = "ex32";
    p.builtin_id = "ex32";
    p.n = 1;
    p.m = 1;
    p.xbar = Vec::Zero(1);
    p.description = "phi(x,u) = (3/4)|(x,u)|^(4/3) + |(x,u)| - x; strongly convex, tilt stable, not fully stable";

    ClosedForm cf;
    cf.value = [](const Vec& x, const Vec& u) {
        double z = std::hypot(x[0], u[0]);
        return 0.75 * std::pow(z, 4.0 / 3.0) + z - x[0];
    };
    // Away from the origin d/dx = (z^(1/3) + 1)(x/z) - 1; at the origin the
    // subdifferential in x (u = 0) is [-2, 0] and -1 is its midpoint.
    cf.grad_x = [](const Vec& x, const Vec& u) {
        double z = std::hypot(x[0], u[0]);
        Vec g(1);
        g[0] = z > 0 ? (std::cbrt(z) + 1.0) * (x[0] / z) - 1.0 : -1.0;
        return g;
    };
    cf.grad_u = [](const Vec& x, const Vec& u) {
        double z = std::hypot(x[0], u[0]);
        Vec g(1);
        g[0] = z > 0 ? (std::cbrt(z) + 1.0) * (u[0] / z) : 0.0;
        return g;
    };
    cf.subgradients = [](const Vec& x, int count) {
        std::vector<Vec> out;
        if (x[0] != 0.0) {
            Vec g(1);
            double ax = std::abs(x[0]);
            g[0] = (std::cbrt(ax) + 1.0) * (x[0] > 0 ? 1.0 : -1.0) - 1.0;
            out.push_back(g);
            return out;
        }
        int k = std::max(count, 2);
        for (int i = 0; i < k; ++i) {
            Vec g(1);
            g[0] = -2.0 + 2.0 * i / (k - 1);
            out.push_back(g);
        }
        return out;
    };
    p.body = std::move(cf);
    return p;
}

ParametricProblem make_neg_quadratic() {
    ParametricProblem p;
    p.name = "neg_quadratic";
    p.builtin_id = "neg_quadratic";
    p.n = 1;
    p.m = 0;
    p.xbar = Vec::Zero(1);
    p.description = "f(x) = -x^2/2 (no parameter); concave, prox-regular at level 1, never tilt stable";
    ClosedForm cf;
    cf.value = [](const Vec& x, const Vec&) { return -0.5 * x[0] * x[0]; };
    cf.grad_x = [](const Vec& x, const Vec&) { return Vec(-x); };
    cf.grad_u = [](const Vec&, const Vec&) { return Vec(); };
    cf.hess_x = [](const Vec&, const Vec&) { return Mat(-Mat::Identity(1, 1)); };
    cf.subgradients = [](const Vec& x, int) { return std::vector<Vec>{Vec(-x)}; };
    p.body = std::move(cf);
    return p;
}

ParametricProblem make_abs1d() {
    ParametricProblem p;
    p.name = "abs1d";
    p.builtin_id = "abs1d";
    p.n = 1;
    p.m = 0;
    p.xbar = Vec::Zero(1);
    p.description = "f(x) = |x| (no parameter); sharp minimum, tilt stable with Lipschitz constant 0";
    ClosedForm cf;
    cf.value = [](const Vec& x, const Vec&) { return std::abs(x[0]); };
    cf.grad_x = [](const Vec& x, const Vec&) {
        Vec g(1);
        g[0] = x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0);
        return g;
    };
    cf.grad_u = [](const Vec&, const Vec&) { return Vec(); };
    cf.subgradients = [](const Vec& x, int count) {
        std::vector<Vec> out;
        if (x[0] != 0.0) {
            out.push_back(Vec::Constant(1, x[0] > 0 ? 1.0 : -1.0));
            return out;
        }
        int k = std::max(count, 2);
        for (int i = 0; i < k; ++i) out.push_back(Vec::Constant(1, -1.0 + 2.0 * i / (k - 1)));
        return out;
    };
    p.body = std::move(cf);
    return p;
}

double parse_param(const std::string& id, const std::string& text) {
    std::istringstream in(text);
    double s = 0;
    if (!(in >> s) || !(in >> std::ws).eof()) throw InputError("registry: bad parameter in '" + id + "'");
    return s;
}

} // namespace

const std::vector<RegistryEntry>& registry_entries() {
    static const std::vector<RegistryEntry> entries = {
        {"ex32", "phi(x,u) = (3/4)|(x,u)|^(4/3) + |(x,u)| - x on R x R; strongly convex, tilt stable, "
                 "Lipschitz in v but not in (v,u)"},
        {"ex33", "min x3 + x4^2/2 s.t. x1-x3, -x1-x3, x2-x3-x4^2/2, -x2-x3-x4^2/2 <= 0 (perturbed by u); "
                 "segment of multipliers, strong SOSC for some of them only"},
        {"quadratic", "quadratic[:s] = (s/2)|x|^2 - u.x on R x R, s > 0 (default s = 1); fully stable, "
                      "argmin (u+v)/s"},
        {"neg_quadratic", "f(x) = -x^2/2 (no u); prox-regular at level 1, minimizer runs to the boundary"},
        {"abs1d", "f(x) = |x| (no u); sharp minimum at 0, tilt Lipschitz constant 0"},
    };
    return entries;
}

ParametricProblem make_quadratic(double s, int dim, double u_curvature, Vec xbar) {
    if (!(s > 0) || !std::isfinite(s)) throw InputError("quadratic: s must be positive");
    if (dim <= 0) throw InputError("quadratic: dimension must be positive");
    if (xbar.size() == 0) xbar = Vec::Zero(dim);
    if (xbar.size() != dim) throw InputError("quadratic: xbar dimension mismatch");
    ParametricProblem p;
    std::ostringstream name;
    name << "quadratic:" << s;
    p.name = name.str();
    p.builtin_id = p.name;
    p.n = dim;
    p.m = dim;
    p.xbar = xbar;
    p.description = "(s/2)|x - xbar|^2 - u.(x - xbar) + (c/2)|u|^2";
    ClosedForm cf;
    cf.value = [s, u_curvature, xbar](const Vec& x, const Vec& u) {
        Vec d = x - xbar;
        return 0.5 * s * d.squaredNorm() - u.dot(d) + 0.5 * u_curvature * u.squaredNorm();
    };
    cf.grad_x = [s, xbar](const Vec& x, const Vec& u) { return Vec(s * (x - xbar) - u); };
    cf.grad_u = [u_curvature, xbar](const Vec& x, const Vec& u) { return Vec(-(x - xbar) + u_curvature * u); };
    cf.hess_x = [s, dim](const Vec&, const Vec&) { return Mat(s * Mat::Identity(dim, dim)); };
    cf.subgradients = [s, xbar](const Vec& x, int) { return std::vector<Vec>{Vec(s * (x - xbar))}; };
    p.body = std::move(cf);
    if (u_curvature != 0.0) {
        p.builtin_id.clear();
        p.name += "+u_curvature";
    }
    if (xbar.norm() != 0.0) {
        p.builtin_id.clear();
        p.name += "+shifted";
    }
    return p;
}

ParametricProblem make_neg_quadratic_coupled() {
    ParametricProblem p;
    p.name = "neg_quadratic_coupled";
    p.n = 1;
    p.m = 1;
    p.xbar = Vec::Zero(1);
    p.description = "-x^2/2 + indicator(-x + u = 0)";
    Composite c;
    c.f0 = poly(1, {{-0.5, {2}}});
    c.F.domain_dim = 1;
    c.F.components = {poly(1, {{-1.0, {1}}})};
    c.g = ZeroIndicator{1};
    p.body = std::move(c);
    return p;
}

ParametricProblem make_ex33(double f1_scale) {
    ParametricProblem p;
    p.name = f1_scale == 1.0 ? "ex33" : "ex33+scaled";
    p.builtin_id = f1_scale == 1.0 ? "ex33" : "";
    p.n = 4;
    p.m = 4;
    p.xbar = Vec::Zero(4);
    p.description = "min x3 + x4^2/2 subject to four inequality constraints, all active at 0";
    p.reference_values["crossing_theta_nominal"] = 0.5;
    Composite c;
    c.f0 = poly(4, {{1.0, {0, 0, 1, 0}}, {0.5, {0, 0, 0, 2}}});
    c.F.domain_dim = 4;
    c.F.components = {
        poly(4, {{f1_scale, {1, 0, 0, 0}}, {-f1_scale, {0, 0, 1, 0}}}),
        poly(4, {{-1.0, {1, 0, 0, 0}}, {-1.0, {0, 0, 1, 0}}}),
        poly(4, {{1.0, {0, 1, 0, 0}}, {-1.0, {0, 0, 1, 0}}, {-0.5, {0, 0, 0, 2}}}),
        poly(4, {{-1.0, {0, 1, 0, 0}}, {-1.0, {0, 0, 1, 0}}, {-0.5, {0, 0, 0, 2}}}),
    };
    c.g = OrthantNonpos{4, 4};
    p.body = std::move(c);
    return p;
}

ParametricProblem registry_build(const std::string& id) {
    ParametricProblem p;
    if (id == "ex32") {
        p = make_ex32();
    } else if (id == "ex33") {
        p = make_ex33();
    } else if (id == "neg_quadratic") {
        p = make_neg_quadratic();
    } else if (id == "abs1d") {
        p = make_abs1d();
    } else if (id == "quadratic") {
        p = make_quadratic(1.0);
    } else if (id.rfind("quadratic:", 0) == 0) {
        p = make_quadratic(parse_param(id, id.substr(10)));
    } else if (id.rfind("quadratic(", 0) == 0 && id.back() == ')') {
        p = make_quadratic(parse_param(id, id.substr(10, id.size() - 11)));
    } else {
        throw InputError("unknown problem id '" + id + "'");
    }
    validate(p);
    return p;
}

} // namespace varstab
