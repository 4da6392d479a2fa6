#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fairpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when an argument violates a precondition (non-finite data, bad
// pair indices, mismatched lengths, ...).
struct invalid_input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when requested dimensions are inconsistent (e.g. r > d).
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical routine fails (non-convergent eigensolver,
// non-finite objective values, exhausted projection retries).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by stiefel_project when the input is (numerically) rank
// deficient; callers react by shrinking the step.
struct degenerate_step_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the backtracking line search when no admissible step exists.
struct line_search_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by dataset loading on missing files, header mismatches or
// unparseable cells.
struct load_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace fairpca
