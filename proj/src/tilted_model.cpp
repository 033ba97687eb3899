#include "varstab/tilted_model.hpp"

#include <cmath>

namespace varstab {

TiltedModel::TiltedModel(const ParametricProblem& p, const Vec& u, const Vec& v) : p_(&p), u_(u), v_(v), n_(p.n) {
    if (u.size() != p.m || v.size() != p.n) throw InputError("tilted problem: dimension mismatch in (v,u)");
    if (!p.is_composite()) {
        const auto& cf = p.closed_form();
        has_gradient_ = static_cast<bool>(cf.grad_x);
        has_hessian_ = static_cast<bool>(cf.hess_x);
        smooth_ = has_gradient_;
        return;
    }
    const auto& c = p.composite();
    if (auto* k = std::get_if<OrthantNonpos>(&c.g)) {
        for (int i = 0; i < k->s; ++i) ineq_.push_back({i, 1.0, 0.0});
    } else if (std::holds_alternative<ZeroIndicator>(c.g)) {
        for (int i = 0; i < p.m; ++i) eq_.push_back({i, 1.0, 0.0});
    } else if (auto* b = std::get_if<Box>(&c.g)) {
        for (int i = 0; i < p.m; ++i) {
            if (b->lo[i] == b->hi[i]) {
                eq_.push_back({i, 1.0, -b->lo[i]});
                continue;
            }
            if (std::isfinite(b->lo[i])) ineq_.push_back({i, -1.0, b->lo[i]});
            if (std::isfinite(b->hi[i])) ineq_.push_back({i, 1.0, -b->hi[i]});
        }
    } else if (auto* q = std::get_if<SquaredNorm>(&c.g)) {
        sq_weight_ = q->weight;
    } else {
        smooth_ = false;
        has_gradient_ = false;
        has_hessian_ = false;
    }
}

double TiltedModel::objective(const Vec& x) const {
    if (!p_->is_composite()) return p_->closed_form().value(x, u_) - v_.dot(x - p_->xbar);
    const auto& c = p_->composite();
    double f = c.f0.value(x) - v_.dot(x - p_->xbar);
    if (sq_weight_ != 0.0) f += 0.5 * sq_weight_ * (c.F.value(x) + u_).squaredNorm();
    return f;
}

Vec TiltedModel::gradient(const Vec& x) const {
    if (!p_->is_composite()) return p_->closed_form().grad_x(x, u_) - v_;
    const auto& c = p_->composite();
    Vec g = c.f0.gradient(x) - v_;
    if (sq_weight_ != 0.0) g += sq_weight_ * c.F.jacobian(x).transpose() * (c.F.value(x) + u_);
    return g;
}

Mat TiltedModel::hessian(const Vec& x) const {
    if (!p_->is_composite()) {
        const auto& cf = p_->closed_form();
        if (cf.hess_x) return cf.hess_x(x, u_);
        Mat H(n_, n_);
        for (int j = 0; j < n_; ++j) {
            double h = 1e-6 * (1.0 + std::abs(x[j]));
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            H.col(j) = (cf.grad_x(xp, u_) - cf.grad_x(xm, u_)) / (2 * h);
        }
        return 0.5 * (H + H.transpose());
    }
    const auto& c = p_->composite();
    Mat H = c.f0.hessian(x);
    if (sq_weight_ != 0.0) {
        Mat J = c.F.jacobian(x);
        Vec z = c.F.value(x) + u_;
        H += sq_weight_ * J.transpose() * J;
        for (int i = 0; i < c.F.range_dim(); ++i) H += sq_weight_ * z[i] * c.F.components[i].hessian(x);
    }
    return H;
}

Vec TiltedModel::ineq(const Vec& x) const {
    Vec r(num_ineq());
    if (ineq_.empty()) return r;
    const auto& F = p_->composite().F;
    for (int j = 0; j < num_ineq(); ++j) {
        const auto& row = ineq_[j];
        r[j] = row.sign * (F.components[row.comp].value(x) + u_[row.comp]) + row.offset;
    }
    return r;
}

Mat TiltedModel::ineq_jacobian(const Vec& x) const {
    Mat J(num_ineq(), n_);
    if (ineq_.empty()) return J;
    const auto& F = p_->composite().F;
    for (int j = 0; j < num_ineq(); ++j)
        J.row(j) = ineq_[j].sign * F.components[ineq_[j].comp].gradient(x).transpose();
    return J;
}

Vec TiltedModel::eq(const Vec& x) const {
    Vec r(num_eq());
    if (eq_.empty()) return r;
    const auto& F = p_->composite().F;
    for (int k = 0; k < num_eq(); ++k) {
        const auto& row = eq_[k];
        r[k] = row.sign * (F.components[row.comp].value(x) + u_[row.comp]) + row.offset;
    }
    return r;
}

Mat TiltedModel::eq_jacobian(const Vec& x) const {
    Mat J(num_eq(), n_);
    if (eq_.empty()) return J;
    const auto& F = p_->composite().F;
    for (int k = 0; k < num_eq(); ++k) J.row(k) = eq_[k].sign * F.components[eq_[k].comp].gradient(x).transpose();
    return J;
}

Mat TiltedModel::rows_hessian(const Vec& x, const Vec& lam, const Vec& mu) const {
    Mat H = Mat::Zero(n_, n_);
    if (!has_rows()) return H;
    const auto& F = p_->composite().F;
    for (int j = 0; j < num_ineq(); ++j)
        if (lam[j] != 0.0) H += lam[j] * ineq_[j].sign * F.components[ineq_[j].comp].hessian(x);
    for (int k = 0; k < num_eq(); ++k)
        if (mu[k] != 0.0) H += mu[k] * eq_[k].sign * F.components[eq_[k].comp].hessian(x);
    return H;
}

double TiltedModel::violation(const Vec& x) const {
    double viol = 0.0;
    if (num_ineq() > 0) viol = std::max(viol, ineq(x).maxCoeff());
    if (num_eq() > 0) viol = std::max(viol, eq(x).cwiseAbs().maxCoeff());
    return viol;
}

double TiltedModel::tilted_value(const Vec& x, double feas_tol) const {
    if (!p_->is_composite()) return p_->closed_form().value(x, u_) - v_.dot(x - p_->xbar);
    if (!smooth_) return eval_phi(*p_, x, u_) - v_.dot(x - p_->xbar);
    if (violation(x) > feas_tol) return kInf;
    return objective(x);
}

Vec TiltedModel::row_multipliers_to_y(const Vec& lam, const Vec& mu) const {
    Vec y = Vec::Zero(p_->m);
    for (int j = 0; j < num_ineq(); ++j) y[ineq_[j].comp] += ineq_[j].sign * lam[j];
    for (int k = 0; k < num_eq(); ++k) y[eq_[k].comp] += eq_[k].sign * mu[k];
    return y;
}

} // namespace varstab
