#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairpca/linalg.hpp"
#include "fairpca/types.hpp"

namespace fairpca {

// Shape of the fairness objectives: one entry per group (single) or one
// per unordered pair of groups (pairwise).
enum class Mode { kSingle, kPairwise };

// Penalty applied to (pairwise) disparity errors.
enum class Penalty { kSquared, kExponential };

// Scale of the per-group losses entering the fairness terms. kRaw keeps
// the plain Frobenius norms; kPerSample divides each group's loss by its
// sample count, the scale under which disparity errors of differently
// sized groups are comparable. Note that with kRaw the group Gram
// matrices sum to the global one, so the disparity errors sum to the
// total loss minus a constant and their average cannot drop below plain
// PCA's; per-sample scaling breaks that telescoping and is what fairness
// comparisons across groups of different sizes call for.
enum class GroupLossScale { kRaw, kPerSample };

inline double penalty_value(Penalty p, double z) {
  return p == Penalty::kSquared ? 0.5 * z * z : std::exp(-z);
}

inline double penalty_slope(Penalty p, double z) {
  return p == Penalty::kSquared ? z : -std::exp(-z);
}

// Objective vector f(U); entry 0 is the (regularized) total
// reconstruction objective in trace form.
using ObjectiveVector = Vector;

// Regularizer lower bound from the smoothness condition: the largest
// gamma_max(G_j) - gamma_min(G_i) over ordered pairs i != j, clamped at
// zero. Returns 0 when fewer than two groups exist.
inline double regularization_alpha(const std::vector<SymMatrix>& group_grams) {
  if (group_grams.empty()) {
    throw invalid_input_error("regularization_alpha: no groups");
  }
  const size_t k = group_grams.size();
  if (k < 2) return 0.0;
  std::vector<double> gmax(k), gmin(k);
  for (size_t i = 0; i < k; ++i) {
    const Vector eig = sym_eigenvalues(group_grams[i]);
    gmax[i] = eig[0];
    gmin[i] = eig[eig.size() - 1];
  }
  double bound = 0.0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      bound = std::max(bound, gmax[j] - gmin[i]);
    }
  }
  return bound;
}

// The main text and the appendix state different eigen-gap formulas; we
// follow the appendix (regularization_alpha) and expose both here for
// run logs.
struct EigenGapDiagnostics {
  double appendix_bound = 0.0;   // max over pairs of gamma_max(G_j) - gamma_min(G_i), clamped
  double main_text_gamma = 0.0;  // max over pairs of gamma_min(G_i) - gamma_max(G_j)
};

inline EigenGapDiagnostics eigen_gap_diagnostics(
    const std::vector<SymMatrix>& group_grams) {
  EigenGapDiagnostics diag;
  const size_t k = group_grams.size();
  if (k < 2) return diag;
  std::vector<double> gmax(k), gmin(k);
  for (size_t i = 0; i < k; ++i) {
    const Vector eig = sym_eigenvalues(group_grams[i]);
    gmax[i] = eig[0];
    gmin[i] = eig[eig.size() - 1];
  }
  diag.appendix_bound = regularization_alpha(group_grams);
  double gamma = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      gamma = std::max(gamma, gmin[i] - gmax[j]);
    }
  }
  diag.main_text_gamma = gamma;
  return diag;
}

// Immutable description of a fair-PCA instance: per-group Gram matrices,
// each group's optimal rank-r subspace and loss, and the objective
// configuration. All evaluations below are pure functions of this state.
class FairPcaProblem {
 public:
  // Groups given as raw sample matrices (rows = samples).
  static FairPcaProblem from_groups(const std::vector<Matrix>& groups,
                                    Eigen::Index target_dim, Mode mode,
                                    Penalty penalty,
                                    std::optional<double> alpha_override = {},
                                    GroupLossScale scale = GroupLossScale::kRaw) {
    if (groups.empty()) {
      throw invalid_input_error("FairPcaProblem: no groups");
    }
    std::vector<SymMatrix> grams;
    std::vector<Eigen::Index> sizes;
    grams.reserve(groups.size());
    for (const Matrix& g : groups) {
      grams.push_back(gram(g));
      sizes.push_back(g.rows());
    }
    return from_grams(std::move(grams), sizes, target_dim, mode, penalty,
                      alpha_override, scale);
  }

  // Groups given by their Gram matrices (used by tests and by callers
  // that already hold the split).
  static FairPcaProblem from_grams(std::vector<SymMatrix> grams,
                                   std::vector<Eigen::Index> sizes,
                                   Eigen::Index target_dim, Mode mode,
                                   Penalty penalty,
                                   std::optional<double> alpha_override = {},
                                   GroupLossScale scale = GroupLossScale::kRaw) {
    FairPcaProblem p;
    if (grams.empty() || grams.size() != sizes.size()) {
      throw invalid_input_error("FairPcaProblem: inconsistent group lists");
    }
    const Eigen::Index d = grams[0].dim();
    if (target_dim < 1 || target_dim > d) {
      throw dimension_error("FairPcaProblem: need 1 <= r <= d");
    }
    Matrix global = Matrix::Zero(d, d);
    for (size_t i = 0; i < grams.size(); ++i) {
      if (grams[i].dim() != d) {
        throw dimension_error("FairPcaProblem: group dimensions differ");
      }
      if (sizes[i] < 1) {
        throw invalid_input_error("FairPcaProblem: empty group");
      }
      global += grams[i].values();
    }
    p.global_gram_ = std::make_shared<SymMatrix>(SymMatrix(std::move(global)));
    p.group_grams_ = std::move(grams);
    p.group_sizes_ = std::move(sizes);
    p.target_dim_ = target_dim;
    p.mode_ = mode;
    p.penalty_ = penalty;
    p.scale_ = scale;
    p.total_energy_ = p.global_gram_->trace();
    for (size_t i = 0; i < p.group_grams_.size(); ++i) {
      const SymMatrix& g = p.group_grams_[i];
      const double w = scale == GroupLossScale::kPerSample
                           ? 1.0 / static_cast<double>(p.group_sizes_[i])
                           : 1.0;
      p.group_weights_.push_back(w);
      p.group_energies_.push_back(g.trace());
      Subspace local = top_r_eigensubspace(g, target_dim);
      const double projected =
          (local.basis().transpose() * g.values() * local.basis()).trace();
      p.local_losses_.push_back(w * std::max(0.0, g.trace() - projected));
      p.local_optima_.push_back(std::move(local));
    }
    if (alpha_override) {
      if (*alpha_override < 0.0) {
        throw invalid_input_error("FairPcaProblem: alpha must be >= 0");
      }
      p.alpha_ = *alpha_override;
    } else {
      p.alpha_ = p.group_count() >= 2
                     ? regularization_alpha(p.weighted_group_grams())
                     : 0.0;
    }
    if (mode == Mode::kPairwise) {
      for (Eigen::Index i = 0; i + 1 < p.group_count(); ++i) {
        for (Eigen::Index j = i + 1; j < p.group_count(); ++j) {
          p.pairs_.emplace_back(i, j);
        }
      }
    }
    return p;
  }

  Eigen::Index dim() const { return global_gram_->dim(); }
  Eigen::Index target_dim() const { return target_dim_; }
  Eigen::Index group_count() const {
    return static_cast<Eigen::Index>(group_grams_.size());
  }
  Mode mode() const { return mode_; }
  Penalty penalty() const { return penalty_; }
  double alpha() const { return alpha_; }
  double total_energy() const { return total_energy_; }

  const SymMatrix& global_gram() const { return *global_gram_; }
  const SymMatrix& group_gram(Eigen::Index i) const {
    return group_grams_[checked(i)];
  }
  const std::vector<SymMatrix>& group_grams() const { return group_grams_; }
  Eigen::Index group_size(Eigen::Index i) const { return group_sizes_[checked(i)]; }
  double group_energy(Eigen::Index i) const { return group_energies_[checked(i)]; }
  GroupLossScale group_loss_scale() const { return scale_; }
  // 1 (raw) or 1/n_i (per-sample); multiplies the group loss.
  double group_weight(Eigen::Index i) const { return group_weights_[checked(i)]; }
  const Subspace& local_optimum(Eigen::Index i) const {
    return local_optima_[checked(i)];
  }
  double local_loss(Eigen::Index i) const { return local_losses_[checked(i)]; }

  // Group Gram matrices on the scale the fairness objectives use.
  std::vector<SymMatrix> weighted_group_grams() const {
    std::vector<SymMatrix> out;
    out.reserve(group_grams_.size());
    for (size_t i = 0; i < group_grams_.size(); ++i) {
      out.push_back(SymMatrix(Matrix(group_weights_[i] * group_grams_[i].values())));
    }
    return out;
  }

  // Unordered group pairs in lexicographic order (pairwise mode).
  const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs() const {
    return pairs_;
  }

  // Number of objectives. With a single group both modes degenerate to
  // the plain PCA objective.
  Eigen::Index objective_count() const {
    if (group_count() < 2) return 1;
    return mode_ == Mode::kPairwise
               ? 1 + static_cast<Eigen::Index>(pairs_.size())
               : 1 + group_count();
  }

 private:
  size_t checked(Eigen::Index i) const {
    if (i < 0 || i >= group_count()) {
      throw std::out_of_range("FairPcaProblem: group index out of range");
    }
    return static_cast<size_t>(i);
  }

  std::shared_ptr<SymMatrix> global_gram_;
  std::vector<SymMatrix> group_grams_;
  std::vector<Eigen::Index> group_sizes_;
  std::vector<double> group_weights_;
  std::vector<double> group_energies_;
  std::vector<Subspace> local_optima_;
  std::vector<double> local_losses_;
  Eigen::Index target_dim_ = 0;
  Mode mode_ = Mode::kPairwise;
  Penalty penalty_ = Penalty::kSquared;
  GroupLossScale scale_ = GroupLossScale::kRaw;
  double alpha_ = 0.0;
  double total_energy_ = 0.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

// ||X - X U U'||_F^2 via the trace identity, given total_energy = tr(X'X).
inline double reconstruction_loss(const SymMatrix& s, double total_energy,
                                  const Matrix& u) {
  const double projected = (u.transpose() * s.values() * u).trace();
  return total_energy - projected;
}

// Group reconstruction loss L_i(U) through the group Gram matrix, on the
// problem's group-loss scale.
inline double group_loss(const FairPcaProblem& p, Eigen::Index i,
                         const Matrix& u) {
  return p.group_weight(i) *
         reconstruction_loss(p.group_gram(i), p.group_energy(i), u);
}

// Disparity error E_i(U) = L_i(U) - L_i(U_i*).
inline double disparity_error(const FairPcaProblem& p, Eigen::Index i,
                              const Matrix& u) {
  return group_loss(p, i, u) - p.local_loss(i);
}

// Pairwise disparity error D_{i,j}(U) = E_i(U) - E_j(U).
inline double pairwise_disparity(const FairPcaProblem& p, Eigen::Index i,
                                 Eigen::Index j, const Matrix& u) {
  if (i == j) {
    throw invalid_input_error("pairwise_disparity: i and j must differ");
  }
  return disparity_error(p, i, u) - disparity_error(p, j, u);
}

namespace detail {

inline void check_uv_shape(const FairPcaProblem& p, const Matrix& u,
                           const char* where) {
  if (u.rows() != p.dim() || u.cols() != p.target_dim()) {
    throw dimension_error(std::string(where) + ": U has wrong shape");
  }
  if (!all_finite(u)) {
    throw invalid_input_error(std::string(where) + ": non-finite U");
  }
}

}  // namespace detail

// Objective vector at U. U is any d x r matrix: the line search evaluates
// off-manifold points, so orthonormality is not required here.
inline ObjectiveVector evaluate_objectives(const FairPcaProblem& p,
                                           const Matrix& u) {
  detail::check_uv_shape(p, u, "evaluate_objectives");
  const Eigen::Index m = p.objective_count();
  const double reg = 0.5 * p.alpha() * u.squaredNorm();
  ObjectiveVector f(m);
  f[0] = -(u.transpose() * p.global_gram().values() * u).trace() + reg;
  if (m > 1) {
    std::vector<double> disparities(static_cast<size_t>(p.group_count()));
    for (Eigen::Index i = 0; i < p.group_count(); ++i) {
      disparities[static_cast<size_t>(i)] = disparity_error(p, i, u);
    }
    if (p.mode() == Mode::kPairwise) {
      Eigen::Index idx = 1;
      for (const auto& [i, j] : p.pairs()) {
        const double delta = disparities[static_cast<size_t>(i)] -
                             disparities[static_cast<size_t>(j)];
        f[idx++] = penalty_value(p.penalty(), delta) + reg;
      }
    } else {
      for (Eigen::Index i = 0; i < p.group_count(); ++i) {
        f[i + 1] = penalty_value(p.penalty(), disparities[static_cast<size_t>(i)]) + reg;
      }
    }
  }
  if (!f.allFinite()) {
    throw numeric_error("evaluate_objectives: non-finite objective value");
  }
  return f;
}

// Euclidean gradients of all objectives at U, in the same order as
// evaluate_objectives.
inline std::vector<Matrix> objective_gradients(const FairPcaProblem& p,
                                               const Matrix& u) {
  detail::check_uv_shape(p, u, "objective_gradients");
  const Eigen::Index m = p.objective_count();
  std::vector<Matrix> grads;
  grads.reserve(static_cast<size_t>(m));
  const Matrix reg = p.alpha() * u;
  grads.push_back(Matrix(-2.0 * (p.global_gram().values() * u) + reg));
  if (m > 1) {
    // Shared per-group products w_i G_i U and the disparities they induce.
    std::vector<Matrix> gu(static_cast<size_t>(p.group_count()));
    std::vector<double> disparities(static_cast<size_t>(p.group_count()));
    for (Eigen::Index i = 0; i < p.group_count(); ++i) {
      const double w = p.group_weight(i);
      gu[static_cast<size_t>(i)] = w * (p.group_gram(i).values() * u);
      const double projected = (u.array() * gu[static_cast<size_t>(i)].array()).sum();
      disparities[static_cast<size_t>(i)] =
          w * p.group_energy(i) - projected - p.local_loss(i);
    }
    if (p.mode() == Mode::kPairwise) {
      for (const auto& [i, j] : p.pairs()) {
        const double delta = disparities[static_cast<size_t>(i)] -
                             disparities[static_cast<size_t>(j)];
        const double slope = penalty_slope(p.penalty(), delta);
        grads.push_back(Matrix(-2.0 * slope *
                                   (gu[static_cast<size_t>(i)] -
                                    gu[static_cast<size_t>(j)]) +
                               reg));
      }
    } else {
      for (Eigen::Index i = 0; i < p.group_count(); ++i) {
        const double slope =
            penalty_slope(p.penalty(), disparities[static_cast<size_t>(i)]);
        grads.push_back(Matrix(-2.0 * slope * gu[static_cast<size_t>(i)] + reg));
      }
    }
  }
  for (const Matrix& g : grads) {
    if (!all_finite(g)) {
      throw numeric_error("objective_gradients: non-finite gradient");
    }
  }
  return grads;
}

}  // namespace fairpca
