#include "varstab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace varstab {

namespace {

// x^p with p a small non-negative integer; x^0 == 1 even for x == 0.
double ipow(double x, int p) {
    double r = 1.0;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
}

} // namespace

Polynomial::Polynomial(int num_vars, std::vector<Monomial> terms) : num_vars_(num_vars) {
    if (num_vars < 0) throw InputError("polynomial: negative variable count");
    std::map<std::vector<int>, double> merged;
    for (auto& t : terms) {
        if (static_cast<int>(t.powers.size()) != num_vars)
            throw InputError("polynomial: exponent list has length " + std::to_string(t.powers.size()) +
                             ", expected " + std::to_string(num_vars));
        for (int p : t.powers)
            if (p < 0) throw InputError("polynomial: negative exponent");
        if (!std::isfinite(t.coeff)) throw InputError("polynomial: non-finite coefficient");
        merged[t.powers] += t.coeff;
    }
    for (auto& [powers, coeff] : merged)
        if (coeff != 0.0) terms_.push_back({coeff, powers});
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, std::accumulate(t.powers.begin(), t.powers.end(), 0));
    return d;
}

double Polynomial::value(const Vec& x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
        double p = t.coeff;
        for (int i = 0; i < num_vars_; ++i) p *= ipow(x[i], t.powers[i]);
        s += p;
    }
    return s;
}

Vec Polynomial::gradient(const Vec& x) const {
    Vec g = Vec::Zero(num_vars_);
    for (const auto& t : terms_) {
        for (int j = 0; j < num_vars_; ++j) {
            if (t.powers[j] == 0) continue;
            double p = t.coeff * t.powers[j];
            for (int i = 0; i < num_vars_; ++i) p *= ipow(x[i], i == j ? t.powers[i] - 1 : t.powers[i]);
            g[j] += p;
        }
    }
    return g;
}

Mat Polynomial::hessian(const Vec& x) const {
    Mat h = Mat::Zero(num_vars_, num_vars_);
    for (const auto& t : terms_) {
        for (int j = 0; j < num_vars_; ++j) {
            for (int k = j; k < num_vars_; ++k) {
                std::vector<int> e = t.powers;
                double c = t.coeff * e[j];
                if (c == 0.0) continue;
                e[j] -= 1;
                c *= e[k];
                if (c == 0.0) continue;
                e[k] -= 1;
                double p = c;
                for (int i = 0; i < num_vars_; ++i) p *= ipow(x[i], e[i]);
                h(j, k) += p;
                if (k != j) h(k, j) += p;
            }
        }
    }
    return h;
}

Vec SmoothMap::value(const Vec& x) const {
    Vec z(range_dim());
    for (int i = 0; i < range_dim(); ++i) z[i] = components[i].value(x);
    return z;
}

Mat SmoothMap::jacobian(const Vec& x) const {
    Mat j(range_dim(), domain_dim);
    for (int i = 0; i < range_dim(); ++i) j.row(i) = components[i].gradient(x).transpose();
    return j;
}

} // namespace varstab
