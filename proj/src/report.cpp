#include "varstab/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "varstab/problem_io.hpp"
#include "varstab/registry.hpp"
#include "varstab/second_order.hpp"
#include "varstab/subdifferential.hpp"

namespace varstab {

using nlohmann::json;

namespace {

json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json vec(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

json trend_json(const std::vector<TrendPoint>& t) {
    json a = json::array();
    for (const auto& p : t) a.push_back({{"scale", num(p.scale)}, {"estimate", num(p.estimate)}});
    return a;
}

json modulus_json(const ModulusEstimate& m) {
    json j = {{"value", num(m.value)}, {"verdict", to_string(m.verdict)}, {"trend", trend_json(m.trend)}};
    if (m.witness.first.size() || m.witness.second.size())
        j["witness"] = json::array({vec(m.witness.first), vec(m.witness.second)});
    if (!m.note.empty()) j["note"] = m.note;
    return j;
}

SolveConfig solve_config(const RunConfig& cfg) {
    SolveConfig s;
    s.grid_points_per_axis = cfg.grid;
    s.refine_tol = cfg.refine_tol;
    s.cluster_tol = cfg.cluster_tol;
    s.seed = cfg.seed;
    s.workers = cfg.workers;
    return s;
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(a + (b - a) * i / (count - 1));
    return out;
}

// Points t * (1,...,1) / sqrt(m) for t on a uniform grid of [-radius, radius].
std::vector<Vec> diagonal_grid(int m, double radius, int count) {
    std::vector<Vec> out;
    for (double t : linspace(-radius, radius, count)) out.push_back(Vec::Constant(m, t / std::sqrt(double(m))));
    return out;
}

void write_csv_trend(const std::filesystem::path& path, const std::vector<TrendPoint>& t) {
    std::ofstream out(path);
    out << "scale,estimate\n" << std::setprecision(17);
    for (const auto& p : t) out << p.scale << ',' << p.estimate << '\n';
}

struct Context {
    const ParametricProblem& p;
    const RunConfig& cfg;
    Localization loc;
    SolveConfig solve;
    std::vector<std::string>& warnings;
    std::filesystem::path csv_dir;

    bool csv() const { return !csv_dir.empty(); }
};

json probe_lipschitz(Context& c) {
    const int n = c.p.n, m = c.p.m;
    const int steps = n + m <= 2 ? 5 : 3;
    auto v_rays = ray_grid(n, c.loc.v_radius, steps);
    auto u_rays = ray_grid(m, c.loc.u_radius, steps);
    ValueSurface sv = value_surface(c.p, c.loc, v_rays, {Vec::Zero(m)}, c.solve);
    ValueSurface su = value_surface(c.p, c.loc, {Vec::Zero(n)}, u_rays, c.solve);
    ValueSurface joint = sv;
    for (const auto& r : su.rows)
        if (!r.u.isZero(0.0)) joint.rows.push_back(r);

    json j;
    auto add = [&](const char* key, const ValueSurface& s, LipschitzMode mode, double radius) {
        try {
            ModulusEstimate e = estimate_lipschitz(s, mode, decade_scales(radius, steps));
            j[key] = modulus_json(e);
            if (c.csv()) write_csv_trend(c.csv_dir / (std::string("lipschitz_") + key + ".csv"), e.trend);
        } catch (const ProbeError& e) {
            j[key] = {{"verdict", "fail"}, {"note", e.what()}};
            c.warnings.push_back(std::string("lipschitz ") + key + ": " + e.what());
        }
    };
    add("v_only", sv, LipschitzMode::v_only, c.loc.v_radius);
    if (m > 0) {
        add("u_only", su, LipschitzMode::u_only, c.loc.u_radius);
        add("joint", joint, LipschitzMode::joint, std::max(c.loc.v_radius, c.loc.u_radius));
    }
    if (c.csv()) {
        std::ofstream a(c.csv_dir / "surface_v.csv");
        write_surface_csv(a, sv, n, m);
        std::ofstream b(c.csv_dir / "surface_u.csv");
        write_surface_csv(b, su, n, m);
    }
    return j;
}

json probe_envelope(Context& c) {
    const int n = c.p.n, m = c.p.m;
    json j;
    double h = 1e-3 * c.loc.v_radius;
    auto v_grid = n == 1 ? std::vector<Vec>{} : std::vector<Vec>{Vec::Zero(n)};
    if (n == 1)
        for (double t : linspace(-0.5 * c.loc.v_radius, 0.5 * c.loc.v_radius, 5)) v_grid.push_back(Vec::Constant(1, t));
    EnvelopeResult ev = envelope_check_v(c.p, c.loc, v_grid, Vec::Zero(m), h, c.solve);
    j["v"] = {{"identity", "grad_v m = -(M - xbar)"},
              {"residual", num(ev.residual)},
              {"residual_grad_equals_M", num(ev.residual_plus_m)},
              {"residual_grad_equals_minus_M", num(ev.residual_minus_m)},
              {"nodes", ev.nodes},
              {"step", num(h)}};
    if (m == 0) {
        j["u"] = {{"status", "skipped"}, {"reason", "problem has no parameter u"}};
        return j;
    }
    if (!c.p.is_composite() && !c.p.closed_form().grad_u) {
        j["u"] = {{"status", "skipped"}, {"reason", "closed form without a u-gradient rule"}};
        return j;
    }
    double hu = 1e-3 * c.loc.u_radius;
    EnvelopeUResult eu =
        envelope_check_u(c.p, c.loc, Vec::Zero(n), diagonal_grid(m, 0.5 * c.loc.u_radius, 5), hu, c.solve, c.cfg.active_tol);
    j["u"] = {{"identity", "partial_u m = Y(M, u, v)"},
              {"residual", num(eu.residual)},
              {"smooth_nodes", eu.smooth_nodes},
              {"polytope_nodes", eu.polytope_nodes},
              {"step", num(hu)}};
    return j;
}

json probe_hypo(Context& c) {
    const int n = c.p.n, m = c.p.m;
    if (m == 0) return {{"status", "skipped"}, {"reason", "problem has no parameter u"}};
    std::vector<Vec> v_grid{Vec::Zero(n)};
    if (n == 1) v_grid = {Vec::Constant(1, -0.5 * c.loc.v_radius), Vec::Zero(1), Vec::Constant(1, 0.5 * c.loc.v_radius)};
    std::vector<Vec> u_grid = m <= 2 ? box_grid(m, c.loc.u_radius, m == 1 ? 9 : 5) : diagonal_grid(m, c.loc.u_radius, 9);
    ValueSurface s = value_surface(c.p, c.loc, v_grid, u_grid, c.solve);
    for (const auto& r : s.rows)
        if (!r.ok) c.warnings.push_back("hypo: solve failed at a node: " + r.error);
    return {{"e", modulus_json(hypoconvexity_modulus(s))}};
}

json probe_prox(Context& c) {
    double radius = 0.5 * c.loc.delta;
    GraphSample sample = build_graph_sample(c.p, c.loc, radius, 41, c.solve);
    auto probes = build_probe_points(c.p, c.loc.xbar, radius, 41);
    auto res = prox_regularity_level(sample, probes, c.loc.xbar, Vec::Zero(c.p.n), {radius, radius / 2, radius / 4});
    if (c.csv()) {
        write_csv_trend(c.csv_dir / "prox_r.csv", res.r.trend);
        write_csv_trend(c.csv_dir / "prox_s.csv", res.s.trend);
    }
    return {{"r", modulus_json(res.r)},
            {"s", modulus_json(res.s)},
            {"gap", trend_json(res.gap)},
            {"sample_points", sample.points.size()}};
}

json probe_inner_norm(Context& c) {
    const int m = c.p.m;
    if (m == 0) return {{"status", "skipped"}, {"reason", "problem has no parameter u"}};
    const int levels = m == 1 ? 5 : 3;
    json rows = json::array();
    std::vector<TrendPoint> trend;
    int skipped = 0;
    for (int k = 0; k < levels; ++k) {
        double t = c.loc.u_radius * std::pow(10.0, -k);
        Vec u = Vec::Constant(m, t / std::sqrt(double(m)));
        std::vector<double> taus{1e-2 * t, 1e-3 * t, 1e-4 * t};
        InnerNormResult r = graphical_derivative_inner_norm(c.p, c.loc, Vec::Zero(c.p.n), u, 16, taus, c.solve);
        bool monotone = true;
        for (const auto& d : r.directions)
            if (!d.skipped && !d.monotone) monotone = false;
        rows.push_back({{"u_norm", num(t)}, {"estimate", num(r.estimate)}, {"skipped_directions", r.skipped},
                        {"ladders_monotone", monotone}});
        trend.push_back({t, r.estimate});
        skipped += r.skipped;
    }
    bool increasing = trend.size() >= 4;
    for (std::size_t k = 1; k < trend.size(); ++k)
        if (!(trend[k].estimate > trend[k - 1].estimate)) increasing = false;
    Verdict v = increasing ? Verdict::fail
                : trend.back().estimate <= 1.05 * trend.front().estimate + 1e-12 ? Verdict::pass
                                                                                  : Verdict::inconclusive;
    if (skipped > 0) c.warnings.push_back("inner-norm: " + std::to_string(skipped) + " directions skipped");
    if (c.csv()) write_csv_trend(c.csv_dir / "inner_norm.csv", trend);
    return {{"levels", rows}, {"bounded", to_string(v)}};
}

json sosc_json(const SOSCReport& r) {
    json verts = json::array();
    for (const auto& c : r.vertices)
        verts.push_back({{"y", vec(c.y)}, {"min_eigenvalue", num(c.min_eigenvalue)}, {"pass", c.pass}});
    json samples = json::array();
    for (const auto& c : r.samples)
        samples.push_back(
            {{"theta", num(c.theta)}, {"y", vec(c.y)}, {"min_eigenvalue", num(c.min_eigenvalue)}, {"pass", c.pass}});
    json j = {{"mode", to_string(r.mode)},
              {"polytope_dim", r.polytope_dim},
              {"vertices", verts},
              {"samples", samples},
              {"subspace_dim", r.basis.cols()},
              {"all_multipliers_pass", r.all_multipliers_pass},
              {"some_multipliers_pass", r.some_multipliers_pass},
              {"pd_tol", num(r.pd_tol)}};
    j["crossing_theta"] = r.crossing_theta ? num(*r.crossing_theta) : json(nullptr);
    return j;
}

json probe_sosc(Context& c) {
    if (!c.p.is_composite() || !piece_is_polyhedral(c.p.composite().g))
        return {{"status", "skipped"}, {"reason", "needs a composite problem with an indicator g"}};
    SOSCOptions opts;
    opts.pd_tol = c.cfg.pd_tol;
    opts.active_tol = c.cfg.active_tol;
    opts.seed = c.cfg.seed;
    Vec v0 = Vec::Zero(c.p.n), u0 = Vec::Zero(c.p.m);
    SOSCReport main = strong_sosc_over_multipliers(c.p, c.loc.xbar, v0, u0, opts);
    opts.mode = SubspaceMode::strict_multipliers;
    SOSCReport strict = strong_sosc_over_multipliers(c.p, c.loc.xbar, v0, u0, opts);
    json j = sosc_json(main);
    j["strict_multipliers"] = sosc_json(strict);
    auto it = c.p.reference_values.find("crossing_theta_nominal");
    if (it != c.p.reference_values.end()) {
        j["crossing_theta_reference"] = num(it->second);
        if (main.crossing_theta && std::abs(*main.crossing_theta - it->second) > 1e-6) {
            std::ostringstream w;
            w << "sosc: measured theta crossing " << *main.crossing_theta << " differs from the quoted value "
              << it->second;
            c.warnings.push_back(w.str());
        }
    }
    if (c.csv()) {
        std::ofstream out(c.csv_dir / "sosc_theta.csv");
        out << "theta,min_eigenvalue\n" << std::setprecision(17);
        for (const auto& s : main.samples) out << s.theta << ',' << s.min_eigenvalue << '\n';
    }
    return j;
}

json probe_dfnt(Context& c) {
    TiltCrosscheck t = tilt_crosscheck(c.p, c.loc, c.solve);
    const DfntEstimate& d = t.dfnt;
    json j = {{"value", d.vacuous ? json("vacuous") : num(d.value)},
              {"verdict", d.vacuous ? "vacuous" : "pass"},
              {"trend", trend_json(d.trend)},
              {"admissible_quadruples", d.admissible}};
    j["tilt_crosscheck"] = {{"measured_tilt_lipschitz", num(t.measured)},
                            {"inverse_s", num(t.inverse_s)},
                            {"ratio", num(t.ratio)},
                            {"violation", t.violation},
                            {"inconsistent", t.inconsistent}};
    if (t.violation) c.warnings.push_back("dfnt: measured tilt Lipschitz constant exceeds 1/s");
    if (t.inconsistent) c.warnings.push_back("dfnt: nonpositive modulus alongside a tilt pass");
    if (c.csv()) write_csv_trend(c.csv_dir / "dfnt.csv", d.trend);
    return j;
}

json probe_classify(Context& c, json& verdicts) {
    StabilityVerdict v = classify(c.p, c.loc, c.solve);
    verdicts = {{"tilt_stable", to_string(v.tilt_stable)},
                {"substable", to_string(v.substable)},
                {"full_substable", to_string(v.full_substable)},
                {"fully_stable", to_string(v.fully_stable)}};
    json j = verdicts;
    j["lipschitz_v"] = modulus_json(v.lipschitz_v);
    j["lipschitz_u"] = modulus_json(v.lipschitz_u);
    j["lipschitz_joint"] = modulus_json(v.lipschitz_joint);
    j["notes"] = v.notes;
    CQReport cq = check_basic_cq(c.p, c.loc.xbar, Vec::Zero(c.p.m), c.cfg.active_tol);
    j["basic_cq"] = {{"holds", cq.holds}, {"certificate", vec(cq.certificate)}, {"detail", cq.detail}};
    for (const auto& note : v.notes) c.warnings.push_back("classify: " + note);
    return j;
}

const char* anchor_for(const std::string& id) {
    if (id == "lipschitz") return "Lipschitz moduli of the localized argmin map in v, in u, and jointly";
    if (id == "envelope") return "value-function gradients: v-gradient against -(M - xbar), u-subgradients against Y";
    if (id == "hypo") return "quadratic elicitation level making the value function convex in u";
    if (id == "prox") return "prox-regularity level and monotonicity level of the subgradient graph";
    if (id == "inner-norm") return "inner norm of the graphical derivative of the truncated argmin map in u";
    if (id == "sosc") return "strong second-order sufficiency over every KKT multiplier";
    if (id == "dfnt") return "definiteness modulus of the strict second-order subdifferential; tilt Lipschitz bound";
    return "tilt, sub, full-sub and full stability of the localized argmin and value maps";
}

} // namespace

const std::vector<std::string>& probe_ids() {
    static const std::vector<std::string> ids = {"lipschitz", "envelope", "hypo", "prox",
                                                 "inner-norm", "sosc", "dfnt", "classify"};
    return ids;
}

std::set<std::string> parse_probe_list(const std::string& text) {
    std::set<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if (std::find(probe_ids().begin(), probe_ids().end(), item) == probe_ids().end())
            throw ConfigError("unknown probe '" + item + "'");
        out.insert(item);
    }
    return out;
}

void validate(const RunConfig& cfg) {
    if (cfg.problem_id.empty() == cfg.problem_file.empty())
        throw ConfigError("give exactly one of a problem id or a problem file");
    for (double x : {cfg.delta, cfg.v_radius, cfg.u_radius, cfg.refine_tol, cfg.cluster_tol, cfg.active_tol, cfg.pd_tol})
        if (!(x > 0) || !std::isfinite(x)) throw ConfigError("radii and tolerances must be positive and finite");
    if (cfg.grid < 11 || cfg.grid % 2 == 0) throw ConfigError("grid must be odd and at least 11");
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
    for (const auto& id : cfg.probes)
        if (std::find(probe_ids().begin(), probe_ids().end(), id) == probe_ids().end())
            throw ConfigError("unknown probe '" + id + "'");
}

ParametricProblem load_configured_problem(const RunConfig& cfg) {
    if (!cfg.problem_file.empty()) return load_problem_file(cfg.problem_file);
    return registry_build(cfg.problem_id);
}

json run_probes(const ParametricProblem& p, const RunConfig& cfg) {
    validate(cfg);
    std::vector<std::string> warnings;
    Context c{p, cfg, make_localization(p, cfg.delta, cfg.alpha, cfg.v_radius, cfg.u_radius), solve_config(cfg),
              warnings, {}};
    validate(c.solve);
    if (!cfg.csv_dir.empty()) {
        c.csv_dir = cfg.csv_dir;
        std::filesystem::create_directories(c.csv_dir);
    }

    json report;
    report["tool"] = "varstab";
    report["schema_version"] = 1;
    report["config"] = {{"problem", cfg.problem_id.empty() ? json(nullptr) : json(cfg.problem_id)},
                        {"problem_file", cfg.problem_file.empty() ? json(nullptr) : json(cfg.problem_file)},
                        {"delta", num(cfg.delta)},
                        {"alpha", num(cfg.alpha)},
                        {"v_radius", num(cfg.v_radius)},
                        {"u_radius", num(cfg.u_radius)},
                        {"grid", cfg.grid},
                        {"seed", cfg.seed},
                        {"refine_tol", num(cfg.refine_tol)},
                        {"cluster_tol", num(cfg.cluster_tol)},
                        {"active_tol", num(cfg.active_tol)},
                        {"pd_tol", num(cfg.pd_tol)}};
    json refs = json::object();
    for (const auto& [k, v] : p.reference_values) refs[k] = num(v);
    report["problem"] = {{"name", p.name},
                         {"builtin_id", p.builtin_id},
                         {"n", p.n},
                         {"m", p.m},
                         {"xbar", vec(p.xbar)},
                         {"description", p.description},
                         {"fingerprint", problem_fingerprint(p)},
                         {"reference_values", refs}};

    json probes = json::object();
    json timing = json::object();
    json verdicts = json::object();
    for (const auto& id : probe_ids()) {
        if (!cfg.probes.empty() && !cfg.probes.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        json entry;
        try {
            if (id == "lipschitz") entry = probe_lipschitz(c);
            else if (id == "envelope") entry = probe_envelope(c);
            else if (id == "hypo") entry = probe_hypo(c);
            else if (id == "prox") entry = probe_prox(c);
            else if (id == "inner-norm") entry = probe_inner_norm(c);
            else if (id == "sosc") entry = probe_sosc(c);
            else if (id == "dfnt") entry = probe_dfnt(c);
            else entry = probe_classify(c, verdicts);
            if (!entry.contains("status")) entry["status"] = "ok";
        } catch (const ProbeError& e) {
            // Preconditions such as single-valuedness are findings about the problem, not tool failures.
            entry = {{"status", "skipped"}, {"reason", e.what()}};
            warnings.push_back(id + ": " + e.what());
        } catch (const std::exception& e) {
            entry = {{"status", "error"}, {"error", e.what()}};
            warnings.push_back(id + ": " + e.what());
        }
        entry["anchor"] = anchor_for(id);
        probes[id] = entry;
        timing[id] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    report["probes"] = probes;
    report["verdicts"] = verdicts;
    report["warnings"] = warnings;
    report["timing"] = timing;
    return report;
}

json strip_timing(json report) {
    report.erase("timing");
    return report;
}

bool report_has_probe_failure(const json& report) {
    if (!report.contains("probes")) return false;
    for (const auto& [id, entry] : report["probes"].items())
        if (entry.value("status", "") == "error") return true;
    return false;
}

std::string format_summary(const json& report, std::size_t max_warnings) {
    if (!report.is_object() || !report.contains("problem") || !report.contains("probes"))
        throw InputError("report: missing problem or probes section");
    std::ostringstream out;
    const auto& prob = report["problem"];
    out << "problem: " << prob.value("name", "?") << " (n=" << prob.value("n", 0) << ", m=" << prob.value("m", 0)
        << ", fingerprint " << prob.value("fingerprint", "?") << ")\n";
    static const std::vector<std::pair<std::string, std::string>> rows = {{"tilt_stable", "tilt stable"},
                                                                          {"substable", "substable"},
                                                                          {"full_substable", "full substable"},
                                                                          {"fully_stable", "fully stable"}};
    const json verdicts = report.value("verdicts", json::object());
    if (!verdicts.empty()) {
        out << "verdicts:\n";
        for (const auto& [key, label] : rows)
            if (verdicts.contains(key)) out << "  " << label << ": " << verdicts[key].get<std::string>() << '\n';
    }
    out << "probes:\n";
    for (const auto& [id, entry] : report["probes"].items()) {
        out << "  " << id << ": " << entry.value("status", "?");
        if (id == "sosc" && entry.contains("some_multipliers_pass"))
            out << " (some multipliers pass: " << (entry["some_multipliers_pass"].get<bool>() ? "yes" : "no")
                << ", all pass: " << (entry["all_multipliers_pass"].get<bool>() ? "yes" : "no") << ')';
        if (id == "dfnt" && entry.contains("value")) out << " (modulus " << entry["value"].dump() << ')';
        if (id == "hypo" && entry.contains("e")) out << " (e = " << entry["e"]["value"].dump() << ')';
        if (entry.contains("error")) out << " - " << entry["error"].get<std::string>();
        out << '\n';
    }
    const json warnings = report.value("warnings", json::array());
    if (!warnings.empty()) {
        out << "warnings:\n";
        for (std::size_t i = 0; i < warnings.size() && i < max_warnings; ++i)
            out << "  - " << warnings[i].get<std::string>() << '\n';
        if (warnings.size() > max_warnings) out << "  (" << warnings.size() - max_warnings << " more)\n";
    }
    return out.str();
}

std::string format_problem_list() {
    std::ostringstream out;
    for (const auto& e : registry_entries()) out << std::left << std::setw(14) << e.id << e.description << '\n';
    return out.str();
}

} // namespace varstab
