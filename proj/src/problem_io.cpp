#include "varstab/problem_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "varstab/registry.hpp"

namespace varstab {

using nlohmann::json;

namespace {

double as_bound(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw InputError("box bound must be a number or \"inf\"/\"-inf\"");
}

json bound_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

Vec as_vec(const json& a, const char* what) {
    if (!a.is_array()) throw InputError(std::string(what) + " must be an array");
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw InputError(std::string(what) + " entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
    return v;
}

Polynomial as_poly(const json& a, int n) {
    if (!a.is_array()) throw InputError("polynomial must be an array of terms");
    std::vector<Monomial> terms;
    for (const auto& t : a) {
        if (!t.is_object() || !t.contains("coeff") || !t.contains("powers"))
            throw InputError("polynomial term needs \"coeff\" and \"powers\"");
        Monomial m;
        m.coeff = t.at("coeff").get<double>();
        m.powers = t.at("powers").get<std::vector<int>>();
        terms.push_back(std::move(m));
    }
    return Polynomial(n, std::move(terms));
}

json poly_json(const Polynomial& p) {
    json a = json::array();
    for (const auto& t : p.terms()) a.push_back({{"coeff", t.coeff}, {"powers", t.powers}});
    return a;
}

ConvexPiece as_piece(const json& g, int m) {
    if (!g.is_object() || !g.contains("type")) throw InputError("g must be an object with a \"type\"");
    auto type = g.at("type").get<std::string>();
    if (type == "orthant_nonpos") return OrthantNonpos{g.at("s").get<int>(), m};
    if (type == "zero") return ZeroIndicator{m};
    if (type == "box") {
        Box b;
        const auto& lo = g.at("lo");
        const auto& hi = g.at("hi");
        if (!lo.is_array() || !hi.is_array()) throw InputError("box lo/hi must be arrays");
        b.lo.resize(static_cast<Eigen::Index>(lo.size()));
        b.hi.resize(static_cast<Eigen::Index>(hi.size()));
        for (std::size_t i = 0; i < lo.size(); ++i) b.lo[static_cast<Eigen::Index>(i)] = as_bound(lo[i]);
        for (std::size_t i = 0; i < hi.size(); ++i) b.hi[static_cast<Eigen::Index>(i)] = as_bound(hi[i]);
        return b;
    }
    if (type == "norm") return EuclideanNorm{g.at("w").get<double>(), m};
    if (type == "sqnorm") return SquaredNorm{g.at("w").get<double>(), m};
    throw InputError("unknown g type '" + type + "'");
}

json piece_json(const ConvexPiece& g) {
    if (auto* k = std::get_if<OrthantNonpos>(&g)) return {{"type", "orthant_nonpos"}, {"s", k->s}};
    if (std::holds_alternative<ZeroIndicator>(g)) return {{"type", "zero"}};
    if (auto* b = std::get_if<Box>(&g)) {
        json lo = json::array(), hi = json::array();
        for (Eigen::Index i = 0; i < b->lo.size(); ++i) {
            lo.push_back(bound_json(b->lo[i]));
            hi.push_back(bound_json(b->hi[i]));
        }
        return {{"type", "box"}, {"lo", lo}, {"hi", hi}};
    }
    if (auto* k = std::get_if<EuclideanNorm>(&g)) return {{"type", "norm"}, {"w", k->weight}};
    return {{"type", "sqnorm"}, {"w", std::get<SquaredNorm>(g).weight}};
}

} // namespace

ParametricProblem problem_from_json(const json& j) {
    try {
        if (!j.is_object()) throw InputError("problem file must hold a JSON object");
        std::string kind = j.value("kind", std::string("composite"));
        if (kind == "builtin") {
            if (!j.contains("builtin")) throw InputError("builtin problem needs a \"builtin\" id");
            auto p = registry_build(j.at("builtin").get<std::string>());
            if (j.contains("xbar")) {
                Vec xb = as_vec(j.at("xbar"), "xbar");
                if (xb != p.xbar) throw InputError("builtin problems keep their own anchor xbar");
            }
            return p;
        }
        if (kind != "composite") throw InputError("kind must be \"composite\" or \"builtin\"");
        ParametricProblem p;
        p.name = j.value("name", std::string("unnamed"));
        p.n = j.at("n").get<int>();
        p.m = j.at("m").get<int>();
        if (p.n <= 0 || p.m < 0) throw InputError("need n > 0 and m >= 0");
        p.xbar = j.contains("xbar") ? as_vec(j.at("xbar"), "xbar") : Vec::Zero(p.n);
        Composite c;
        c.f0 = j.contains("f0") ? as_poly(j.at("f0"), p.n) : Polynomial(p.n);
        c.F.domain_dim = p.n;
        if (j.contains("F")) {
            if (!j.at("F").is_array()) throw InputError("F must be an array of polynomials");
            for (const auto& comp : j.at("F")) c.F.components.push_back(as_poly(comp, p.n));
        }
        c.g = j.contains("g") ? as_piece(j.at("g"), p.m) : ConvexPiece{SquaredNorm{0.0, p.m}};
        p.body = std::move(c);
        p.description = j.value("description", std::string());
        validate(p);
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("problem file: ") + e.what());
    }
}

ParametricProblem load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open problem file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("problem file '" + path + "' is not valid JSON: " + e.what());
    }
    return problem_from_json(j);
}

json problem_to_json(const ParametricProblem& p) {
    json j;
    j["name"] = p.name;
    j["n"] = p.n;
    j["m"] = p.m;
    j["xbar"] = std::vector<double>(p.xbar.data(), p.xbar.data() + p.xbar.size());
    if (!p.builtin_id.empty()) {
        j["kind"] = "builtin";
        j["builtin"] = p.builtin_id;
        return j;
    }
    if (!p.is_composite()) {
        // Programmatic closed forms have no data representation beyond their name.
        j["kind"] = "closed_form";
        return j;
    }
    const auto& c = p.composite();
    j["kind"] = "composite";
    j["f0"] = poly_json(c.f0);
    j["F"] = json::array();
    for (const auto& comp : c.F.components) j["F"].push_back(poly_json(comp));
    j["g"] = piece_json(c.g);
    return j;
}

std::string problem_fingerprint(const ParametricProblem& p) {
    std::string text = problem_to_json(p).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

} // namespace varstab
