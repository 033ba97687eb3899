#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "varstab/report.hpp"

namespace {

constexpr int kExitProbeFailure = 1;
constexpr int kExitInvalidInput = 2;

int cmd_probe(varstab::RunConfig cfg, const std::string& probe_list) {
    try {
        if (!probe_list.empty()) cfg.probes = varstab::parse_probe_list(probe_list);
        varstab::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    varstab::ParametricProblem problem;
    try {
        problem = varstab::load_configured_problem(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    nlohmann::json report;
    try {
        report = varstab::run_probes(problem, cfg);
    } catch (const varstab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "probe failure: " << e.what() << '\n';
        return kExitProbeFailure;
    }
    const std::string text = report.dump(2) + "\n";
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_path);
        if (!out || !(out << text)) {
            std::cerr << "error: cannot write " << cfg.out_path << '\n';
            return kExitInvalidInput;
        }
    }
    if (varstab::report_has_probe_failure(report)) {
        for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
        return kExitProbeFailure;
    }
    return 0;
}

int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot read " << path << '\n';
        return kExitInvalidInput;
    }
    try {
        nlohmann::json report = nlohmann::json::parse(in);
        std::cout << varstab::format_summary(report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << path << ": " << e.what() << '\n';
        return kExitInvalidInput;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local stability diagnostics for parametric optimization problems"};
    app.require_subcommand(1);

    app.add_subcommand("list", "List built-in problems");

    varstab::RunConfig cfg;
    std::string probe_list;
    auto* probe = app.add_subcommand("probe", "Run stability probes and write a JSON report");
    probe->add_option("--problem", cfg.problem_id, "Built-in problem id (see list)");
    probe->add_option("--problem-file", cfg.problem_file, "JSON problem file");
    probe->add_option("--delta", cfg.delta, "Localization radius around xbar");
    probe->add_option("--alpha", cfg.alpha, "Value ceiling of the localization");
    probe->add_option("--v-radius", cfg.v_radius, "Tilt neighbourhood radius");
    probe->add_option("--u-radius", cfg.u_radius, "Parameter neighbourhood radius");
    probe->add_option("--grid", cfg.grid, "Multi-start grid points per axis (odd, >= 11)");
    probe->add_option("--seed", cfg.seed, "Seed for randomized directions and samples");
    probe->add_option("--tol-refine", cfg.refine_tol, "Local refinement tolerance");
    probe->add_option("--tol-cluster", cfg.cluster_tol, "Distance under which minimizers are merged");
    probe->add_option("--tol-active", cfg.active_tol, "Active-constraint tolerance");
    probe->add_option("--tol-pd", cfg.pd_tol, "Positive-definiteness threshold");
    probe->add_option("--probes", probe_list, "Comma list of probes (default: all)");
    probe->add_option("--out", cfg.out_path, "Report path (default: stdout)");
    probe->add_option("--csv-dir", cfg.csv_dir, "Directory for CSV trend tables");
    probe->add_option("--workers", cfg.workers, "Worker threads for sweeps");

    std::string report_path;
    auto* report = app.add_subcommand("report", "Summarize a JSON report");
    report->add_option("path", report_path, "Report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalidInput;
    }

    if (app.got_subcommand("list")) {
        std::cout << varstab::format_problem_list();
        return 0;
    }
    if (app.got_subcommand("probe")) return cmd_probe(cfg, probe_list);
    return cmd_report(report_path);
}
