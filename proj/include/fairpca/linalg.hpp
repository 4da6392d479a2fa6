#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fairpca/types.hpp"

namespace fairpca {

// Symmetric d x d matrix (Gram / covariance). Validates symmetry and
// finiteness on construction and stores the symmetrized values so that
// downstream self-adjoint solvers see an exactly symmetric matrix.
class SymMatrix {
 public:
  static constexpr double kSymTol = 1e-12;  // relative

  explicit SymMatrix(Matrix values) {
    if (values.rows() != values.cols()) {
      throw dimension_error("SymMatrix: matrix must be square");
    }
    if (!all_finite(values)) {
      throw invalid_input_error("SymMatrix: non-finite entries");
    }
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymTol * scale) {
      throw invalid_input_error("SymMatrix: matrix is not symmetric");
    }
    values_ = 0.5 * (values + values.transpose());
  }

  const Matrix& values() const { return values_; }
  Eigen::Index dim() const { return values_.rows(); }
  double trace() const { return values_.trace(); }

 private:
  Matrix values_;
};

// d x r matrix with orthonormal columns. Construction validates the
// orthonormality invariant, so holding a Subspace is proof of it.
class Subspace {
 public:
  static constexpr double kOrthoTol = 1e-10;

  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {
    const Eigen::Index d = basis_.rows();
    const Eigen::Index r = basis_.cols();
    if (r < 1 || r > d) {
      throw dimension_error("Subspace: need 1 <= r <= d");
    }
    if (!all_finite(basis_)) {
      throw invalid_input_error("Subspace: non-finite entries");
    }
    const Matrix gram = basis_.transpose() * basis_;
    const double dev =
        (gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
    if (dev > kOrthoTol) {
      throw invalid_input_error("Subspace: columns not orthonormal (|U'U - I|_max = " +
                                std::to_string(dev) + ")");
    }
  }

  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.rows(); }
  Eigen::Index target_dim() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

// Gram matrix X'X of a sample matrix (rows = samples).
inline SymMatrix gram(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw dimension_error("gram: empty matrix");
  }
  if (!all_finite(x)) {
    throw invalid_input_error("gram: non-finite entries");
  }
  return SymMatrix(Matrix(x.transpose() * x));
}

// Eigenvalues of a symmetric matrix in descending order.
inline Vector sym_eigenvalues(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.values(),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("sym_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

namespace detail {

// First-nonzero-positive sign convention, applied column-wise.
inline void fix_eigenvector_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    const double scale = vectors.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, c)) > 1e-10 * scale) {
        if (vectors(i, c) < 0.0) vectors.col(c) = -vectors.col(c);
        break;
      }
    }
  }
}

inline bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace detail

// Orthonormal basis of the invariant subspace for the r largest
// eigenvalues. Ties within 1e-10 are ordered deterministically: columns
// carry the first-nonzero-positive sign convention and tied blocks are
// sorted lexicographically.
inline Subspace top_r_eigensubspace(const SymMatrix& s, Eigen::Index r) {
  const Eigen::Index d = s.dim();
  if (r < 1 || r > d) {
    throw dimension_error("top_r_eigensubspace: need 1 <= r <= d");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.values());
  if (solver.info() != Eigen::Success) {
    throw numeric_error("top_r_eigensubspace: eigensolver did not converge");
  }
  Matrix vectors = solver.eigenvectors();
  Vector values = solver.eigenvalues();  // ascending
  detail::fix_eigenvector_signs(vectors);

  std::vector<Eigen::Index> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(values[a] - values[b]) > 1e-10) return values[a] > values[b];
    return detail::lex_less(vectors.col(a), vectors.col(b));
  });

  Matrix basis(d, r);
  for (Eigen::Index c = 0; c < r; ++c) basis.col(c) = vectors.col(order[static_cast<size_t>(c)]);
  return Subspace(std::move(basis));
}

// Nearest (Frobenius) matrix with orthonormal columns: the polar factor
// A B' of a thin SVD  M = A S B'. Rank-deficient input (smallest singular
// value <= 1e-12 * largest) raises degenerate_step_error.
inline Subspace stiefel_project(const Matrix& m) {
  if (m.rows() < m.cols() || m.cols() < 1) {
    throw dimension_error("stiefel_project: need d >= r >= 1");
  }
  if (!all_finite(m)) {
    throw invalid_input_error("stiefel_project: non-finite entries");
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sing = svd.singularValues();
  if (sing[sing.size() - 1] <= 1e-12 * sing[0]) {
    throw degenerate_step_error("stiefel_project: rank-deficient input");
  }
  return Subspace(Matrix(svd.matrixU() * svd.matrixV().transpose()));
}

namespace detail {

// mt19937_64 + Box-Muller; self-contained so streams do not depend on
// the standard library's unspecified distribution algorithms.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double kTwoPi = 6.28318530717958647692;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = kTwoPi * u2;
    spare_ = radius * std::sin(theta);
    have_spare_ = true;
    return radius * std::cos(theta);
  }

 private:
  double uniform() {  // [0, 1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

// Deterministic random orthonormal basis: QR of a seeded Gaussian matrix
// with the R-diagonal sign fix.
inline Subspace random_orthonormal(Eigen::Index d, Eigen::Index r,
                                   std::uint64_t seed) {
  if (r < 1 || r > d) {
    throw dimension_error("random_orthonormal: need 1 <= r <= d");
  }
  detail::GaussianStream gauss(seed);
  Matrix m(d, r);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) m(i, j) = gauss.next();
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  const Matrix rfac = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return Subspace(std::move(q));
}

}  // namespace fairpca
