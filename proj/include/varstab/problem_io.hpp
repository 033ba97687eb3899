#pragma once

#include <string>

#include <json.hpp>

#include "varstab/problem.hpp"

namespace varstab {

/**
 * Problem file schema:
 *   {"name", "n", "m", "kind": "composite"|"builtin", "builtin": id, "xbar": [...],
 *    "f0": [{"coeff": c, "powers": [...]}, ...], "F": [poly, ...],
 *    "g": {"type": "orthant_nonpos", "s": k} | {"type": "zero"} |
 *         {"type": "box", "lo": [...], "hi": [...]} | {"type": "norm", "w": w} |
 *         {"type": "sqnorm", "w": w}}
 * Box bounds accept the strings "-inf"/"inf". Throws InputError.
 */
ParametricProblem problem_from_json(const nlohmann::json& j);
ParametricProblem load_problem_file(const std::string& path);

/// Canonical JSON (composite data in canonical polynomial form, or the builtin id).
nlohmann::json problem_to_json(const ParametricProblem& p);

/// 16 hex digits of FNV-1a over the canonical JSON text.
std::string problem_fingerprint(const ParametricProblem& p);

} // namespace varstab
