#include <catch2/catch_amalgamated.hpp>

#include "fairpca/dataset.hpp"
#include "fairpca/solver.hpp"
#include "test_util.hpp"

using namespace fairpca;

namespace {

FairPcaProblem mirrored_problem(Eigen::Index n, Eigen::Index d, double angle,
                                std::uint64_t seed, Eigen::Index r) {
  const GroupedDataset gd = synthetic_mirrored_groups(n, d, angle, seed);
  return FairPcaProblem::from_groups(split_groups(gd), r, Mode::kPairwise,
                                     Penalty::kSquared, 0.0);
}

}  // namespace

TEST_CASE("solver reduces to PCA with a single group") {
  Matrix x = Vector{{2.0, std::sqrt(3.0), 1.0}}.asDiagonal();
  const auto problem = FairPcaProblem::from_groups({x}, 2, Mode::kPairwise,
                                                   Penalty::kSquared, 0.0);
  SolverConfig config;
  const auto result = pareto_fair_pca(problem, config, random_orthonormal(3, 2, 4));
  const double loss = reconstruction_loss(problem.global_gram(),
                                          problem.total_energy(),
                                          result.subspace.basis());
  CHECK(loss == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("identical groups stay fair and match plain PCA") {
  const Matrix x = test::random_matrix(40, 5, 15);
  const auto problem = FairPcaProblem::from_groups({x, x}, 2, Mode::kPairwise,
                                                   Penalty::kSquared, 0.0);
  SolverConfig config;
  const auto result = pareto_fair_pca(problem, config, random_orthonormal(5, 2, 3));
  for (const auto& rec : result.trace.iterations) {
    REQUIRE(std::abs(rec.objectives[1]) < 1e-8);
  }
  const auto baseline = top_r_eigensubspace(problem.global_gram(), 2);
  const double loss = reconstruction_loss(problem.global_gram(),
                                          problem.total_energy(),
                                          result.subspace.basis());
  const double best = reconstruction_loss(problem.global_gram(),
                                          problem.total_energy(),
                                          baseline.basis());
  CHECK(loss == Catch::Approx(best).epsilon(1e-6));
}

TEST_CASE("mirrored groups equalize disparity errors") {
  const auto problem = mirrored_problem(500, 2, 3.14159265358979 / 5.0, 9, 1);
  SolverConfig config;
  config.line_search = LineSearch::kFixedInvSqrt;
  config.max_iters = 1500;
  const auto result = pareto_fair_pca(problem, config, random_orthonormal(2, 1, 11));
  const double e1 = disparity_error(problem, 0, result.subspace.basis());
  const double e2 = disparity_error(problem, 1, result.subspace.basis());
  CHECK(std::abs(e1 - e2) <= 1e-3 * (e1 + e2 + 1e-12));
}

TEST_CASE("backtracking_step on a hand quadratic") {
  // f(U) = ||U||^2/2, D = -U, beta = 1/2: eta = 1/2 is accepted at p = 1.
  const Matrix u = test::random_matrix(3, 2, 5);
  auto evaluate = [](const Matrix& v) {
    ObjectiveVector f(1);
    f[0] = 0.5 * v.squaredNorm();
    return f;
  };
  const auto [eta, p] = backtracking_step(evaluate, u, Matrix(-u), {u}, 0.5);
  CHECK(p == 1);
  CHECK(eta == Catch::Approx(0.5));
}

TEST_CASE("backtracking_step accepts the first step as beta approaches zero") {
  const Matrix u = test::random_matrix(3, 2, 8);
  auto evaluate = [](const Matrix& v) {
    ObjectiveVector f(1);
    f[0] = 0.5 * v.squaredNorm();
    return f;
  };
  const auto [eta, p] = backtracking_step(evaluate, u, Matrix(-u), {u}, 1e-12);
  CHECK(p == 1);
}

TEST_CASE("backtracking_step rejects a non-descent direction") {
  const Matrix u = test::random_matrix(3, 2, 2);
  auto evaluate = [](const Matrix& v) {
    ObjectiveVector f(1);
    f[0] = 0.5 * v.squaredNorm();
    return f;
  };
  // D = +U ascends the quadratic.
  CHECK_THROWS_AS(backtracking_step(evaluate, u, u, {u}, 0.5),
                  line_search_error);
}

TEST_CASE("accepted steps satisfy the sufficient-decrease inequality") {
  const auto problem = test::random_problem(2, 5, 2, Mode::kPairwise,
                                            Penalty::kSquared, 33);
  const double beta = 1e-4;
  Matrix u = random_orthonormal(5, 2, 1).basis();
  for (int t = 0; t < 50; ++t) {
    const auto gs = objective_gradients(problem, u);
    const auto qp = normalize_gradients(gs);
    const auto [dir, w] = descent_direction(qp);
    if (dir.norm() <= 1e-8) break;
    double eta = 0.0;
    try {
      eta = backtracking_step(problem, u, dir, gs, beta).first;
    } catch (const line_search_error&) {
      break;
    }
    const auto f0 = evaluate_objectives(problem, u);
    const auto f1 = evaluate_objectives(problem, u + eta * dir);
    for (Eigen::Index i = 0; i < f0.size(); ++i) {
      const double slope =
          (dir.array() * gs[static_cast<size_t>(i)].array()).sum();
      REQUIRE(f1[i] <= f0[i] + beta * eta * slope + 1e-12);
      REQUIRE(f1[i] <= f0[i] + 1e-12);  // monotone decrease pre-projection
    }
    u = stiefel_project(u + eta * dir).basis();
  }
}

TEST_CASE("dominates examples") {
  CHECK(dominates(Vector{{1.0, 2.0}}, Vector{{2.0, 2.0}}));
  CHECK_FALSE(dominates(Vector{{1.0, 2.0}}, Vector{{1.0, 2.0}}));
  CHECK_FALSE(dominates(Vector{{1.0, 3.0}}, Vector{{2.0, 2.0}}));
  CHECK_THROWS_AS(dominates(Vector{{1.0}}, Vector{{1.0, 2.0}}),
                  invalid_input_error);
}

TEST_CASE("dominates is a strict partial order") {
  std::mt19937_64 rng(5);
  auto random_vec = [&rng](Eigen::Index m) {
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      v[i] = static_cast<double>(rng() % 5);
    }
    return v;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const Vector a = random_vec(3), b = random_vec(3), c = random_vec(3);
    REQUIRE_FALSE(dominates(a, a));                       // irreflexive
    if (dominates(a, b)) REQUIRE_FALSE(dominates(b, a));  // antisymmetric
    if (dominates(a, b) && dominates(b, c)) REQUIRE(dominates(a, c));
  }
}

TEST_CASE("solver is deterministic") {
  const auto problem = test::random_problem(2, 4, 2, Mode::kPairwise,
                                            Penalty::kSquared, 71);
  SolverConfig config;
  config.max_iters = 60;
  const Subspace u0 = random_orthonormal(4, 2, 6);
  const auto a = pareto_fair_pca(problem, config, u0);
  const auto b = pareto_fair_pca(problem, config, u0);
  REQUIRE(a.subspace.basis() == b.subspace.basis());
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  for (size_t i = 0; i < a.trace.iterations.size(); ++i) {
    REQUIRE(a.trace.iterations[i].objectives ==
            b.trace.iterations[i].objectives);
    REQUIRE(a.trace.iterations[i].descent_norm ==
            b.trace.iterations[i].descent_norm);
    REQUIRE(a.trace.iterations[i].weights == b.trace.iterations[i].weights);
    REQUIRE(a.trace.iterations[i].step_size == b.trace.iterations[i].step_size);
  }
  REQUIRE(a.mean_weights == b.mean_weights);
}

TEST_CASE("mean weights lie in the simplex") {
  const auto problem = test::random_problem(3, 5, 2, Mode::kPairwise,
                                            Penalty::kSquared, 13);
  SolverConfig config;
  config.max_iters = 40;
  const auto result = pareto_fair_pca(problem, config, random_orthonormal(5, 2, 2));
  CHECK(result.mean_weights.minCoeff() >= 0.0);
  CHECK(result.mean_weights.sum() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("pareto_frontier with a single restart") {
  const auto problem = test::random_problem(2, 4, 2, Mode::kPairwise,
                                            Penalty::kSquared, 3);
  SolverConfig config;
  config.max_iters = 40;
  config.restarts = 1;
  CHECK(pareto_frontier(problem, config).size() == 1);
}

TEST_CASE("dominated objective vectors are filtered") {
  std::vector<Vector> finals = {Vector{{1.0, 2.0}}, Vector{{2.0, 2.0}},
                                Vector{{0.5, 3.0}}};
  const auto keep = detail::non_dominated_indices(finals);
  REQUIRE(keep == std::vector<size_t>{0, 2});

  // Duplicates do not dominate each other; both stay.
  std::vector<Vector> ties = {Vector{{1.0, 1.0}}, Vector{{1.0, 1.0}}};
  REQUIRE(detail::non_dominated_indices(ties).size() == 2);
}

TEST_CASE("frontier restarts are mutually non-dominated") {
  const GroupedDataset gd = synthetic_mirrored_groups(150, 3, 0.6, 17);
  const auto problem = FairPcaProblem::from_groups(split_groups(gd), 1,
                                                   Mode::kPairwise,
                                                   Penalty::kSquared, 0.0);
  SolverConfig config;
  config.max_iters = 150;
  config.restarts = 8;
  config.line_search = LineSearch::kFixedInvSqrt;
  const auto frontier = pareto_frontier(problem, config);
  REQUIRE(!frontier.empty());
  std::vector<Vector> finals;
  for (const auto& r : frontier) {
    finals.push_back(evaluate_objectives(problem, r.subspace.basis()));
  }
  for (size_t i = 0; i < finals.size(); ++i) {
    for (size_t j = 0; j < finals.size(); ++j) {
      if (i != j) REQUIRE_FALSE(dominates(finals[i], finals[j]));
    }
  }
}

TEST_CASE("final subspace satisfies the orthonormality invariant") {
  const auto problem = test::random_problem(2, 6, 3, Mode::kSingle,
                                            Penalty::kExponential, 41, 0.1);
  SolverConfig config;
  config.max_iters = 80;
  config.line_search = LineSearch::kFixedInvSqrt;
  const auto result = pareto_fair_pca(problem, config, random_orthonormal(6, 3, 8));
  const Matrix g = result.subspace.basis().transpose() * result.subspace.basis();
  CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
}
