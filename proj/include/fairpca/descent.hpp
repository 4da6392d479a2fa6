#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "fairpca/types.hpp"

namespace fairpca {

// Point on the probability simplex; validated on construction.
class SimplexWeights {
 public:
  static constexpr double kSimplexTol = 1e-10;

  explicit SimplexWeights(Vector lambda) : lambda_(std::move(lambda)) {
    if (lambda_.size() < 1) {
      throw invalid_input_error("SimplexWeights: empty weight vector");
    }
    if (lambda_.minCoeff() < 0.0 ||
        std::abs(lambda_.sum() - 1.0) > kSimplexTol) {
      throw invalid_input_error("SimplexWeights: not a simplex point");
    }
  }

  const Vector& lambda() const { return lambda_; }
  Eigen::Index size() const { return lambda_.size(); }
  double operator[](Eigen::Index i) const { return lambda_[i]; }

 private:
  Vector lambda_;
};

// Gradients below this Frobenius norm count as zero.
inline constexpr double kZeroGradientTol = 1e-14;

// Scale every nonzero gradient to unit Frobenius norm; zero gradients
// pass through unchanged.
inline std::vector<Matrix> normalize_gradients(std::vector<Matrix> gs) {
  for (Matrix& g : gs) {
    if (!all_finite(g)) {
      throw invalid_input_error("normalize_gradients: non-finite gradient");
    }
    const double norm = g.norm();
    if (norm > kZeroGradientTol) g /= norm;
  }
  return gs;
}

namespace detail {

inline constexpr double kQpGapTol = 1e-10;

// Minimum over the affine hull of the active set of 0.5 x' Q_S x with
// sum(x) = 1, via the KKT system; singular Q_S falls back to the
// least-squares solution.
inline Vector affine_min_norm(const Matrix& q,
                              const std::vector<Eigen::Index>& support) {
  const Eigen::Index s = static_cast<Eigen::Index>(support.size());
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) {
      kkt(a, b) = q(support[static_cast<size_t>(a)],
                    support[static_cast<size_t>(b)]);
    }
    kkt(a, s) = 1.0;
    kkt(s, a) = 1.0;
  }
  Vector rhs = Vector::Zero(s + 1);
  rhs[s] = 1.0;
  const Vector sol =
      kkt.completeOrthogonalDecomposition().solve(rhs).head(s);
  return sol;
}

// Wolfe-style active-set polish: alternates the affine minimizer over the
// current support with boundary line searches until no vertex improves
// the minimum-norm point. Exact (to round-off) for the small m here.
inline void min_norm_polish(const Matrix& q, Vector& lambda) {
  const Eigen::Index m = q.rows();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lambda[i] > 0.0) support.push_back(i);
  }
  for (int major = 0; major < 16 * static_cast<int>(m); ++major) {
    const Vector grad = q * lambda;
    const double value = lambda.dot(grad);
    Eigen::Index entering = 0;
    grad.minCoeff(&entering);
    if (value - grad[entering] <= 0.5 * kQpGapTol) return;
    if (std::find(support.begin(), support.end(), entering) == support.end()) {
      support.push_back(entering);
    }
    for (int minor = 0; minor < 16 * static_cast<int>(m); ++minor) {
      const Vector target = affine_min_norm(q, support);
      bool interior = true;
      for (Eigen::Index a = 0; a < target.size(); ++a) {
        if (target[a] <= 0.0) interior = false;
      }
      if (interior) {
        Vector next = Vector::Zero(m);
        for (size_t a = 0; a < support.size(); ++a) {
          next[support[a]] = target[static_cast<Eigen::Index>(a)];
        }
        lambda = next;
        break;
      }
      // Walk toward the affine minimizer until a coordinate hits zero,
      // then drop it from the support.
      double theta = 1.0;
      for (size_t a = 0; a < support.size(); ++a) {
        const double from = lambda[support[a]];
        const double to = target[static_cast<Eigen::Index>(a)];
        if (to < from) theta = std::min(theta, from / (from - to));
      }
      Vector next = Vector::Zero(m);
      for (size_t a = 0; a < support.size(); ++a) {
        const double from = lambda[support[a]];
        const double to = target[static_cast<Eigen::Index>(a)];
        next[support[a]] = std::max(0.0, from + theta * (to - from));
      }
      lambda = next;
      std::vector<Eigen::Index> kept;
      for (Eigen::Index i : support) {
        if (lambda[i] > 1e-16) kept.push_back(i);
      }
      if (kept.empty()) kept.push_back(support.front());
      support = std::move(kept);
    }
  }
}

// min over the simplex of 0.5 * lambda' Q lambda for a PSD Gram matrix Q
// of gradient inner products. Closed form for m <= 2; Frank-Wolfe with
// away steps otherwise (only m x m products per inner iteration), with an
// active-set polish when the gap stalls above tolerance (the FW iteration
// zigzags on rank-deficient Q).
inline Vector min_norm_simplex(const Matrix& q) {
  const Eigen::Index m = q.rows();
  if (m == 1) return Vector::Ones(1);
  if (m == 2) {
    // minimize || t G1 + (1-t) G2 ||^2 over t in [0,1]
    const double denom = q(0, 0) - 2.0 * q(0, 1) + q(1, 1);
    double t = 0.5;
    if (denom > 0.0) {
      t = std::min(1.0, std::max(0.0, (q(1, 1) - q(0, 1)) / denom));
    }
    Vector lambda(2);
    lambda << t, 1.0 - t;
    return lambda;
  }

  constexpr int kMaxIters = 10000;
  Vector lambda = Vector::Constant(m, 1.0 / static_cast<double>(m));
  bool converged = false;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    const Vector grad = q * lambda;        // gradient of the quadratic
    const double value = lambda.dot(grad); // lambda' Q lambda

    Eigen::Index fw = 0;
    grad.minCoeff(&fw);
    const double gap_fw = value - grad[fw];
    if (gap_fw <= kQpGapTol) {
      converged = true;
      break;
    }

    Eigen::Index away = -1;
    double away_grad = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (lambda[i] > 0.0 && grad[i] > away_grad) {
        away_grad = grad[i];
        away = i;
      }
    }
    const double gap_away = away_grad - value;

    Vector dir;
    double gap, step_max;
    if (away >= 0 && gap_away > gap_fw) {
      dir = lambda;
      dir[away] -= 1.0;  // lambda - e_away
      gap = gap_away;
      step_max = lambda[away] < 1.0 ? lambda[away] / (1.0 - lambda[away])
                                    : std::numeric_limits<double>::infinity();
    } else {
      dir = -lambda;
      dir[fw] += 1.0;  // e_fw - lambda
      gap = gap_fw;
      step_max = 1.0;
    }

    const double curvature = dir.dot(q * dir);
    double step = step_max;
    if (curvature > 0.0) step = std::min(step_max, gap / curvature);
    if (!(step > 0.0) || !std::isfinite(step)) break;

    lambda += step * dir;
    lambda = lambda.cwiseMax(0.0);
    lambda /= lambda.sum();
  }
  if (!converged) min_norm_polish(q, lambda);
  lambda = lambda.cwiseMax(0.0);
  lambda /= lambda.sum();
  return lambda;
}

inline Matrix gradient_inner_products(const std::vector<Matrix>& gs) {
  const Eigen::Index m = static_cast<Eigen::Index>(gs.size());
  Matrix q(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double dot = (gs[static_cast<size_t>(i)].array() *
                          gs[static_cast<size_t>(j)].array())
                             .sum();
      q(i, j) = dot;
      q(j, i) = dot;
    }
  }
  return q;
}

}  // namespace detail

// argmin over the simplex of 0.5 * || sum_i lambda_i G_i ||_F^2.
inline SimplexWeights min_norm_weights(const std::vector<Matrix>& gs) {
  if (gs.empty()) {
    throw invalid_input_error("min_norm_weights: no gradients");
  }
  for (const Matrix& g : gs) {
    if (!all_finite(g)) {
      throw invalid_input_error("min_norm_weights: non-finite gradient");
    }
  }
  return SimplexWeights(detail::min_norm_simplex(detail::gradient_inner_products(gs)));
}

// Common descent direction D = -sum_i lambda_i G_i with lambda from the
// min-norm QP. Gradients that are numerically zero are held out of the
// QP with weight zero: a vanished gradient means that objective cannot
// be improved locally, and letting it absorb the min-norm point would
// stall every other objective. ||D||_F below the caller's stationarity
// tolerance signals a Pareto stationary point.
inline std::pair<Matrix, SimplexWeights> descent_direction(
    const std::vector<Matrix>& gs) {
  if (gs.empty()) {
    throw invalid_input_error("descent_direction: no gradients");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(gs.size());
  std::vector<size_t> active;
  for (size_t i = 0; i < gs.size(); ++i) {
    if (!all_finite(gs[i])) {
      throw invalid_input_error("descent_direction: non-finite gradient");
    }
    if (gs[i].norm() > kZeroGradientTol) active.push_back(i);
  }

  Vector lambda = Vector::Zero(m);
  Matrix dir = Matrix::Zero(gs[0].rows(), gs[0].cols());
  if (active.empty()) {
    // All objectives are stationary; report uniform weights and D = 0.
    lambda.setConstant(1.0 / static_cast<double>(m));
    return {dir, SimplexWeights(std::move(lambda))};
  }

  std::vector<Matrix> subset;
  subset.reserve(active.size());
  for (size_t i : active) subset.push_back(gs[i]);
  const SimplexWeights sub_weights = min_norm_weights(subset);
  for (size_t idx = 0; idx < active.size(); ++idx) {
    lambda[static_cast<Eigen::Index>(active[idx])] =
        sub_weights[static_cast<Eigen::Index>(idx)];
    dir -= sub_weights[static_cast<Eigen::Index>(idx)] * gs[active[idx]];
  }
  return {dir, SimplexWeights(std::move(lambda))};
}

}  // namespace fairpca
