#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace varstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/** Malformed input: dimension mismatch, unknown registry id, bad file. */
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** The operation is not defined for this kind of problem. */
class UnsupportedOperation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** A numerical subproblem (LP, linear solve) failed to produce an answer. */
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Every sampled point of a localized problem was infeasible. */
class EmptyLocalProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Inconsistent probe or solver configuration. */
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** A probe could not be evaluated on the data it was given. */
class ProbeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lexicographic "a < b" on coordinate vectors of equal length.
inline bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

} // namespace varstab
