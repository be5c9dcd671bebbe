#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace arrowgap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised by every operation whose precondition or numerical contract fails.
/// The message starts with a short stable tag (e.g. "axis pole") so callers
/// and the CLI can classify failures without parsing prose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Arrow of time a quantity is measured against.
enum class Direction { Forward, Backward };

inline const char* to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace arrowgap
