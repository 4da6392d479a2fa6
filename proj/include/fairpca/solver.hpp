#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairpca/descent.hpp"
#include "fairpca/objectives.hpp"

namespace fairpca {

enum class LineSearch { kBacktracking, kFixedInvSqrt };

struct SolverConfig {
  int max_iters = 2000;
  double beta = 1e-4;  // sufficient-decrease parameter
  LineSearch line_search = LineSearch::kBacktracking;
  double stationarity_tol = 1e-8;
  std::uint64_t seed = 0;
  int restarts = 1;
  bool normalize = true;

  void validate() const {
    if (max_iters < 1) throw invalid_input_error("SolverConfig: max_iters >= 1");
    if (!(beta > 0.0 && beta < 1.0)) {
      throw invalid_input_error("SolverConfig: beta in (0,1)");
    }
    if (!(stationarity_tol > 0.0)) {
      throw invalid_input_error("SolverConfig: stationarity_tol > 0");
    }
    if (restarts < 1) throw invalid_input_error("SolverConfig: restarts >= 1");
  }
};

struct IterationRecord {
  ObjectiveVector objectives;  // f(U_t) before stepping
  double descent_norm = 0.0;   // ||D_t||_F
  Vector weights;              // QP solution at t
  double step_size = 0.0;      // eta_t (0 on the terminal record)
  double wall_ms = 0.0;
};

struct SolverTrace {
  std::vector<IterationRecord> iterations;
};

enum class TerminationReason {
  kStationary,
  kMaxIterations,
  kLineSearchExhausted,
};

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::kStationary: return "stationary";
    case TerminationReason::kMaxIterations: return "max_iterations";
    case TerminationReason::kLineSearchExhausted: return "line_search_exhausted";
  }
  return "unknown";
}

struct SolveResult {
  Subspace subspace;
  SolverTrace trace;
  bool stationary = false;
  TerminationReason reason = TerminationReason::kMaxIterations;
  Vector mean_weights;  // per-coordinate mean of the weight trajectory
};

// Backtracking line search over a generic objective evaluation. Finds the
// smallest p in {1,...,40} such that eta = 2^-p satisfies, for every i,
//   f_i(U + eta D) <= f_i(U) + beta * eta * tr(D' G_i),
// evaluated at the un-projected point. Throws line_search_error when D is
// not a descent direction or no p qualifies.
inline std::pair<double, int> backtracking_step(
    const std::function<ObjectiveVector(const Matrix&)>& evaluate,
    const Matrix& u, const Matrix& d, const std::vector<Matrix>& gs,
    double beta) {
  const ObjectiveVector f0 = evaluate(u);
  if (static_cast<size_t>(f0.size()) != gs.size()) {
    throw invalid_input_error("backtracking_step: gradient count mismatch");
  }
  Vector slopes(f0.size());
  for (Eigen::Index i = 0; i < f0.size(); ++i) {
    slopes[i] = (d.array() * gs[static_cast<size_t>(i)].array()).sum();
    if (slopes[i] > 0.0) {
      throw line_search_error(
          "backtracking_step: not a descent direction (tr(D'G_" +
          std::to_string(i) + ") = " + std::to_string(slopes[i]) + ")");
    }
  }
  for (int p = 1; p <= 40; ++p) {
    const double eta = std::ldexp(1.0, -p);
    const ObjectiveVector f = evaluate(u + eta * d);
    bool ok = true;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (f[i] > f0[i] + beta * eta * slopes[i]) {
        ok = false;
        break;
      }
    }
    if (ok) return {eta, p};
  }
  std::ostringstream msg;
  msg << "backtracking_step: no admissible step; ||D||_F = " << d.norm()
      << ", f = [" << f0.transpose() << "]";
  throw line_search_error(msg.str());
}

inline std::pair<double, int> backtracking_step(const FairPcaProblem& problem,
                                                const Matrix& u,
                                                const Matrix& d,
                                                const std::vector<Matrix>& gs,
                                                double beta) {
  return backtracking_step(
      [&problem](const Matrix& v) { return evaluate_objectives(problem, v); },
      u, d, gs, beta);
}

// Component-wise dominance: f1 no worse everywhere and strictly better
// somewhere.
inline bool dominates(const Vector& f1, const Vector& f2) {
  if (f1.size() != f2.size()) {
    throw invalid_input_error("dominates: length mismatch");
  }
  bool strict = false;
  for (Eigen::Index i = 0; i < f1.size(); ++i) {
    if (f1[i] > f2[i]) return false;
    if (f1[i] < f2[i]) strict = true;
  }
  return strict;
}

// Multi-objective projected descent (the adaptive fair-PCA loop):
// gradients -> min-norm descent direction -> step size -> projection back
// onto the orthonormal frames. Stops at stationarity, iteration budget,
// or when backtracking cannot certify further decrease.
inline SolveResult pareto_fair_pca(const FairPcaProblem& problem,
                                   const SolverConfig& config,
                                   const Subspace& u0) {
  config.validate();
  if (u0.dim() != problem.dim() || u0.target_dim() != problem.target_dim()) {
    throw dimension_error("pareto_fair_pca: initialization has wrong shape");
  }
  using clock = std::chrono::steady_clock;

  Matrix u = u0.basis();
  SolverTrace trace;
  trace.iterations.reserve(static_cast<size_t>(config.max_iters));
  bool stationary = false;
  TerminationReason reason = TerminationReason::kMaxIterations;

  for (int t = 1; t <= config.max_iters; ++t) {
    const auto tic = clock::now();
    // True gradients drive the line search (the sufficient-decrease test
    // uses each objective's own slope); normalized copies feed the QP so
    // no objective dominates the direction.
    const std::vector<Matrix> gs = objective_gradients(problem, u);
    std::vector<Matrix> qp_gs = gs;
    if (config.normalize) qp_gs = normalize_gradients(std::move(qp_gs));
    auto [dir, weights] = descent_direction(qp_gs);
    const double dnorm = dir.norm();
    const ObjectiveVector f = evaluate_objectives(problem, u);

    IterationRecord rec;
    rec.objectives = f;
    rec.descent_norm = dnorm;
    rec.weights = weights.lambda();

    if (dnorm <= config.stationarity_tol) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - tic).count();
      trace.iterations.push_back(std::move(rec));
      stationary = true;
      reason = TerminationReason::kStationary;
      break;
    }

    double eta = 0.0;
    if (config.line_search == LineSearch::kBacktracking) {
      try {
        // Eq.-style sufficient decrease against the true gradients.
        eta = backtracking_step(problem, u, dir, gs, config.beta).first;
      } catch (const line_search_error&) {
        // No step certifies decrease for every objective; the incumbent
        // iterate is as good as this search direction gets.
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - tic).count();
        trace.iterations.push_back(std::move(rec));
        reason = TerminationReason::kLineSearchExhausted;
        break;
      }
    } else {
      eta = 1.0 / std::sqrt(static_cast<double>(t));
    }

    // Projection with step halving on (rare) rank-deficient candidates.
    Matrix next;
    bool projected = false;
    double step = eta;
    for (int attempt = 0; attempt <= 30; ++attempt) {
      try {
        next = stiefel_project(u + step * dir).basis();
        projected = true;
        break;
      } catch (const degenerate_step_error&) {
        step *= 0.5;
      }
    }
    if (!projected) {
      std::ostringstream msg;
      msg << "pareto_fair_pca: projection stayed degenerate after 30 step"
             " halvings at iteration " << t << " (||D||_F = " << dnorm << ")";
      throw numeric_error(msg.str());
    }

    rec.step_size = step;
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - tic).count();
    trace.iterations.push_back(std::move(rec));
    u = std::move(next);
  }

  Vector mean = Vector::Zero(problem.objective_count());
  for (const IterationRecord& rec : trace.iterations) mean += rec.weights;
  if (!trace.iterations.empty()) {
    mean /= static_cast<double>(trace.iterations.size());
  }

  SolveResult result{Subspace(std::move(u)), std::move(trace), stationary,
                     reason, std::move(mean)};
  return result;
}

namespace detail {

// Indices of mutually non-dominated vectors.
inline std::vector<size_t> non_dominated_indices(
    const std::vector<Vector>& objectives) {
  std::vector<size_t> keep;
  for (size_t i = 0; i < objectives.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < objectives.size(); ++j) {
      if (j != i && dominates(objectives[j], objectives[i])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

}  // namespace detail

// Multi-start exploration of the Pareto frontier: independent solves from
// seeded random initializations, keeping only mutually non-dominated
// results. A failed run is dropped with a warning.
inline std::vector<SolveResult> pareto_frontier(const FairPcaProblem& problem,
                                                const SolverConfig& config) {
  config.validate();
  std::vector<SolveResult> runs;
  for (int i = 0; i < config.restarts; ++i) {
    const Subspace u0 = random_orthonormal(problem.dim(), problem.target_dim(),
                                           config.seed + static_cast<std::uint64_t>(i));
    try {
      runs.push_back(pareto_fair_pca(problem, config, u0));
    } catch (const std::exception& e) {
      std::cerr << "pareto_frontier: restart " << i << " failed: " << e.what()
                << "\n";
    }
  }
  std::vector<Vector> finals;
  finals.reserve(runs.size());
  for (const SolveResult& r : runs) {
    finals.push_back(evaluate_objectives(problem, r.subspace.basis()));
  }
  std::vector<SolveResult> kept;
  for (size_t idx : detail::non_dominated_indices(finals)) {
    kept.push_back(std::move(runs[idx]));
  }
  return kept;
}

}  // namespace fairpca
