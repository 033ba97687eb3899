#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "varstab/problem.hpp"

namespace varstab {

/// Probe ids accepted by --probes, in execution order.
const std::vector<std::string>& probe_ids();

struct RunConfig {
    std::string problem_id;    ///< registry id; exclusive with problem_file
    std::string problem_file;  ///< JSON problem file
    double delta = 0.5;
    double alpha = kInf;
    double v_radius = 0.1;
    double u_radius = 0.1;
    int grid = 21;
    std::uint64_t seed = 1;
    double refine_tol = 1e-9;
    double cluster_tol = 1e-6;
    double active_tol = 1e-9;
    double pd_tol = 1e-8;
    std::set<std::string> probes;  ///< empty selects all
    std::string out_path;
    std::string csv_dir;
    int workers = 1;
};

/// Throws ConfigError on out-of-range values or unknown probe ids.
void validate(const RunConfig& cfg);

/// Parses a comma list of probe ids; throws ConfigError on an unknown id.
std::set<std::string> parse_probe_list(const std::string& text);

/// Loads the configured problem (registry id or file); throws InputError.
ParametricProblem load_configured_problem(const RunConfig& cfg);

/**
 * Runs the selected probes and builds the report: config echo, problem
 * fingerprint, one entry per probe with status ok/skipped/error, verdict summary,
 * warnings, and a separate "timing" object (the only non-deterministic part).
 */
nlohmann::json run_probes(const ParametricProblem& p, const RunConfig& cfg);

/// Report without the "timing" object, for reproducibility comparisons.
nlohmann::json strip_timing(nlohmann::json report);

/// True when any probe ended with status "error".
bool report_has_probe_failure(const nlohmann::json& report);

/// Verdict table and the first warnings; throws InputError on a report without the expected fields.
std::string format_summary(const nlohmann::json& report, std::size_t max_warnings = 5);

/// One line per registry problem: id, description.
std::string format_problem_list();

} // namespace varstab
