#include <catch2/catch_amalgamated.hpp>

#include "fairpca/linalg.hpp"
#include "test_util.hpp"

using namespace fairpca;

TEST_CASE("gram of identity and of a single row") {
  Matrix eye = Matrix::Identity(2, 2);
  CHECK((gram(eye).values() - eye).norm() == 0.0);

  Matrix row(1, 2);
  row << 1.0, 2.0;
  Matrix expected(2, 2);
  expected << 1.0, 2.0, 2.0, 4.0;
  CHECK((gram(row).values() - expected).norm() < 1e-14);
}

TEST_CASE("gram is symmetric positive semi-definite") {
  const Matrix x = test::random_matrix(50, 6, 11);
  const SymMatrix s = gram(x);
  CHECK((s.values() - s.values().transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Vector eig = sym_eigenvalues(s);
  CHECK(eig[eig.size() - 1] >= -1e-10 * std::max(1.0, eig[0]));
}

TEST_CASE("gram rejects non-finite input") {
  Matrix x = Matrix::Ones(2, 2);
  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gram(x), invalid_input_error);
}

TEST_CASE("top_r_eigensubspace on diagonal matrices") {
  Matrix d3 = Vector{{3.0, 2.0, 1.0}}.asDiagonal();
  const Subspace top2 = top_r_eigensubspace(SymMatrix(d3), 2);
  // span{e1, e2}: no mass on the third coordinate, trailing loss 1.
  CHECK(top2.basis().row(2).norm() < 1e-12);
  const double loss = d3.trace() - (top2.basis().transpose() * d3 * top2.basis()).trace();
  CHECK(loss == Catch::Approx(1.0).margin(1e-12));

  // Degenerate leading pair: any unit vector in span{e1, e2}; loss 5 + 1.
  Matrix d55 = Vector{{5.0, 5.0, 1.0}}.asDiagonal();
  const Subspace top1 = top_r_eigensubspace(SymMatrix(d55), 1);
  CHECK(std::abs(top1.basis()(2, 0)) < 1e-12);
  const double loss1 = d55.trace() - (top1.basis().transpose() * d55 * top1.basis()).trace();
  CHECK(loss1 == Catch::Approx(6.0).margin(1e-12));
}

TEST_CASE("top_r_eigensubspace loss matches the trailing eigenvalues") {
  const SymMatrix s = test::random_psd(8, 21);
  const Subspace u = top_r_eigensubspace(s, 3);
  const Vector eig = sym_eigenvalues(s);
  const double expected = eig.tail(5).sum();
  const double loss = s.trace() - (u.basis().transpose() * s.values() * u.basis()).trace();
  CHECK(loss == Catch::Approx(expected).epsilon(1e-9));
}

TEST_CASE("top_r_eigensubspace projected energy equals leading eigenvalues") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const SymMatrix s = test::random_psd(7, 100 + seed);
    const Subspace u = top_r_eigensubspace(s, 4);
    const Vector eig = sym_eigenvalues(s);
    const double projected =
        (u.basis().transpose() * s.values() * u.basis()).trace();
    CHECK(projected == Catch::Approx(eig.head(4).sum()).epsilon(1e-9));
    CHECK((u.basis().transpose() * u.basis() - Matrix::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("top_r_eigensubspace rejects r > d") {
  CHECK_THROWS_AS(top_r_eigensubspace(test::random_psd(3, 1), 4), dimension_error);
}

TEST_CASE("stiefel_project fixes orthonormal input") {
  const Subspace q = random_orthonormal(6, 3, 9);
  const Subspace projected = stiefel_project(q.basis());
  CHECK((projected.basis() - q.basis()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiefel_project of a scaled identity") {
  const Matrix m = 2.0 * Matrix::Identity(2, 2);
  CHECK((stiefel_project(m).basis() - Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("stiefel_project minimizes the Frobenius distance (d=2, r=1)") {
  const Matrix m = test::random_matrix(2, 1, 33);
  const Subspace p = stiefel_project(m);
  const double dist = (m - p.basis()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20000; ++i) {
    const double theta = 2.0 * 3.14159265358979323846 * i / 20000.0;
    Matrix q(2, 1);
    q << std::cos(theta), std::sin(theta);
    best = std::min(best, (m - q).norm());
  }
  CHECK(dist <= best + 1e-6);
}

TEST_CASE("stiefel_project is idempotent") {
  const Matrix m = test::random_matrix(6, 2, 77);
  const Matrix once = stiefel_project(m).basis();
  const Matrix twice = stiefel_project(once).basis();
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiefel_project rejects rank-deficient input") {
  Matrix m(3, 2);
  m.col(0) << 1.0, 2.0, 3.0;
  m.col(1) = 2.0 * m.col(0);
  CHECK_THROWS_AS(stiefel_project(m), degenerate_step_error);
}

TEST_CASE("random_orthonormal basics") {
  const Subspace q = random_orthonormal(3, 3, 5);
  CHECK((q.basis().transpose() * q.basis() - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  // Determinism: same seed gives bitwise-identical output.
  const Subspace again = random_orthonormal(3, 3, 5);
  CHECK(q.basis() == again.basis());

  // Different seeds differ.
  const Subspace a = random_orthonormal(5, 2, 1);
  const Subspace b = random_orthonormal(5, 2, 2);
  CHECK((a.basis() - b.basis()).cwiseAbs().maxCoeff() > 1e-6);

  CHECK_THROWS_AS(random_orthonormal(2, 3, 0), dimension_error);
}
