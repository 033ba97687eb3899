#include "varstab/problem.hpp"

#include <cmath>

namespace varstab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_dim(const Vec& v, int expected, const char* what) {
    if (v.size() != expected)
        throw InputError(std::string(what) + ": dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(expected));
}

} // namespace

int piece_dim(const ConvexPiece& g) {
    return std::visit(overloaded{
                          [](const OrthantNonpos& k) { return k.m; },
                          [](const ZeroIndicator& k) { return k.m; },
                          [](const Box& k) { return static_cast<int>(k.lo.size()); },
                          [](const EuclideanNorm& k) { return k.m; },
                          [](const SquaredNorm& k) { return k.m; },
                      },
                      g);
}

bool piece_is_polyhedral(const ConvexPiece& g) {
    return std::holds_alternative<OrthantNonpos>(g) || std::holds_alternative<ZeroIndicator>(g) ||
           std::holds_alternative<Box>(g);
}

std::string piece_name(const ConvexPiece& g) {
    return std::visit(overloaded{
                          [](const OrthantNonpos&) { return std::string("orthant_nonpos"); },
                          [](const ZeroIndicator&) { return std::string("zero"); },
                          [](const Box&) { return std::string("box"); },
                          [](const EuclideanNorm&) { return std::string("norm"); },
                          [](const SquaredNorm&) { return std::string("sqnorm"); },
                      },
                      g);
}

void validate_piece(const ConvexPiece& g) {
    std::visit(overloaded{
                   [](const OrthantNonpos& k) {
                       if (k.s < 0 || k.s > k.m) throw InputError("orthant_nonpos: need 0 <= s <= m");
                   },
                   [](const ZeroIndicator& k) {
                       if (k.m < 0) throw InputError("zero indicator: negative dimension");
                   },
                   [](const Box& k) {
                       if (k.lo.size() != k.hi.size()) throw InputError("box: lo/hi length mismatch");
                       for (Eigen::Index i = 0; i < k.lo.size(); ++i)
                           if (!(k.lo[i] <= k.hi[i])) throw InputError("box: need lo <= hi componentwise");
                   },
                   [](const EuclideanNorm& k) {
                       if (!(k.weight >= 0)) throw InputError("norm: weight must be >= 0");
                   },
                   [](const SquaredNorm& k) {
                       if (!(k.weight >= 0)) throw InputError("sqnorm: weight must be >= 0");
                   },
               },
               g);
}

double piece_value(const ConvexPiece& g, const Vec& z) {
    return std::visit(overloaded{
                          [&](const OrthantNonpos& k) {
                              for (int i = 0; i < k.s; ++i)
                                  if (!(z[i] <= 0.0)) return kInf;
                              return 0.0;
                          },
                          [&](const ZeroIndicator& k) {
                              for (int i = 0; i < k.m; ++i)
                                  if (z[i] != 0.0) return kInf;
                              return 0.0;
                          },
                          [&](const Box& k) {
                              for (Eigen::Index i = 0; i < z.size(); ++i)
                                  if (!(z[i] >= k.lo[i] && z[i] <= k.hi[i])) return kInf;
                              return 0.0;
                          },
                          [&](const EuclideanNorm& k) { return k.weight * z.norm(); },
                          [&](const SquaredNorm& k) { return 0.5 * k.weight * z.squaredNorm(); },
                      },
                      g);
}

const Composite& ParametricProblem::composite() const {
    if (auto* c = std::get_if<Composite>(&body)) return *c;
    throw UnsupportedOperation("problem '" + name + "' is not a composite problem");
}

const ClosedForm& ParametricProblem::closed_form() const {
    if (auto* c = std::get_if<ClosedForm>(&body)) return *c;
    throw UnsupportedOperation("problem '" + name + "' is not a closed-form problem");
}

void validate(const ParametricProblem& p) {
    if (p.n <= 0) throw InputError("problem: n must be positive");
    if (p.m < 0) throw InputError("problem: m must be non-negative");
    check_dim(p.xbar, p.n, "xbar");
    if (auto* c = std::get_if<Composite>(&p.body)) {
        if (c->f0.num_vars() != p.n) throw InputError("f0 must have n variables");
        if (c->F.domain_dim != p.n) throw InputError("F domain must have dimension n");
        if (c->F.range_dim() != p.m) throw InputError("F must have m components");
        for (const auto& comp : c->F.components)
            if (comp.num_vars() != p.n) throw InputError("every component of F must have n variables");
        validate_piece(c->g);
        if (piece_dim(c->g) != p.m) throw InputError("g dimension must equal m");
    } else {
        if (!std::get<ClosedForm>(p.body).value) throw InputError("closed form without a value rule");
    }
    double v = eval_phi(p, p.xbar, Vec::Zero(p.m));
    if (!std::isfinite(v)) throw InputError("phi(xbar, 0) is not finite");
}

double eval_phi(const ParametricProblem& p, const Vec& x, const Vec& u) {
    check_dim(x, p.n, "eval_phi x");
    check_dim(u, p.m, "eval_phi u");
    if (auto* c = std::get_if<Composite>(&p.body)) {
        double g = piece_value(c->g, c->F.value(x) + u);
        if (g == kInf) return kInf;
        return c->f0.value(x) + g;
    }
    return std::get<ClosedForm>(p.body).value(x, u);
}

std::pair<Vec, Mat> grad_f0_and_jac_F(const ParametricProblem& p, const Vec& x) {
    const auto& c = p.composite();
    check_dim(x, p.n, "grad_f0_and_jac_F x");
    return {c.f0.gradient(x), c.F.jacobian(x)};
}

} // namespace varstab
