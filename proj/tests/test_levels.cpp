#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "core/levels.hpp"
#include "core/rng.hpp"

using namespace ucs;

namespace {

Matrix random_operator(std::size_t m, std::size_t n, Rng& rng) {
  Matrix phi(m, n);
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    phi.data()[i] = rng.normal() / std::sqrt(static_cast<double>(m));
  return phi;
}

Vector random_vector(std::size_t m, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

SymbolSeq random_assignment(std::size_t n, unsigned z, Rng& rng,
                            bool all_populated = true) {
  SymbolSeq u(n);
  for (std::size_t i = 0; i < n; ++i)
    u[i] = static_cast<Symbol>(all_populated && i < z ? i : rng.below(z));
  return u;
}

Vector mapped(const SymbolSeq& u, const Vector& levels) {
  Vector v(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = levels[u[i]];
  return v;
}

}  // namespace

TEST_CASE("single-symbol alphabet collapses to the row sums") {
  Rng rng(1);
  Matrix phi = random_operator(6, 10, rng);
  Vector y = random_vector(6, rng);
  SymbolSeq u(10, 0);
  LevelSolver solver(phi, y, u, 1);
  CHECK((solver.mu().col(0) - phi.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(solver.omega()(0, 0) ==
        doctest::Approx(solver.mu().col(0).squaredNorm()).epsilon(1e-12));
  CHECK(solver.theta()[0] ==
        doctest::Approx(solver.mu().col(0).dot(y)).epsilon(1e-12));
}

TEST_CASE("identity operator gives the indicator matrix and diagonal Gram") {
  Rng rng(2);
  const std::size_t n = 12;
  Matrix phi = Matrix::Identity(n, n);
  Vector y = random_vector(n, rng);
  SymbolSeq u = random_assignment(n, 3, rng);
  LevelSolver solver(phi, y, u, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned b = 0; b < 3; ++b)
      CHECK(solver.mu()(static_cast<Eigen::Index>(i), b) == (u[i] == b ? 1.0 : 0.0));
  for (unsigned a = 0; a < 3; ++a)
    for (unsigned b = 0; b < 3; ++b) {
      if (a == b)
        CHECK(solver.omega()(a, b) ==
              doctest::Approx(static_cast<double>(solver.population()[a])));
      else
        CHECK(solver.omega()(a, b) == 0.0);
    }
}

TEST_CASE("empty symbols have zero mu column and Gram row") {
  Rng rng(3);
  Matrix phi = random_operator(8, 20, rng);
  Vector y = random_vector(8, rng);
  SymbolSeq u(20, 0);  // symbol 1 never used
  LevelSolver solver(phi, y, u, 2);
  CHECK(solver.mu().col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.omega().col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.omega().row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.theta()[1] == 0.0);
}

TEST_CASE("row sums of mu partition the row sums of Phi") {
  Rng rng(5);
  Matrix phi = random_operator(15, 40, rng);
  Vector y = random_vector(15, rng);
  SymbolSeq u = random_assignment(40, 5, rng);
  LevelSolver solver(phi, y, u, 5);
  const Vector mu_rows = solver.mu().rowwise().sum();
  const Vector phi_rows = phi.rowwise().sum();
  CHECK((mu_rows - phi_rows).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a move followed by its inverse restores the solver exactly") {
  Rng rng(7);
  Matrix phi = random_operator(10, 30, rng);
  Vector y = random_vector(10, rng);
  SymbolSeq u = random_assignment(30, 4, rng);
  LevelSolver solver(phi, y, u, 4);

  const Matrix mu0 = solver.mu();
  const Matrix omega0 = solver.omega();
  const Vector theta0 = solver.theta();

  solver.update_symbol(12, u[12], static_cast<Symbol>((u[12] + 1) % 4));
  solver.update_symbol(12, static_cast<Symbol>((u[12] + 1) % 4), u[12]);

  CHECK(solver.mu() == mu0);
  CHECK(solver.omega() == omega0);
  CHECK(solver.theta() == theta0);
}

TEST_CASE("Gram and right-hand side stay consistent over random moves") {
  Rng rng(11);
  Matrix phi = random_operator(20, 60, rng);
  Vector y = random_vector(20, rng);
  SymbolSeq u = random_assignment(60, 4, rng);
  LevelSolver solver(phi, y, u, 4);

  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.below(60));
    const Symbol to = static_cast<Symbol>(rng.below(4));
    solver.update_symbol(n, u[n], to);
    u[n] = to;
  }
  const Matrix omega_direct = solver.mu().transpose() * solver.mu();
  const Vector theta_direct = solver.mu().transpose() * y;
  CHECK((solver.omega() - omega_direct).cwiseAbs().maxCoeff() <
        1e-9 * std::max(1.0, omega_direct.cwiseAbs().maxCoeff()));
  CHECK((solver.theta() - theta_direct).cwiseAbs().maxCoeff() <
        1e-9 * std::max(1.0, theta_direct.cwiseAbs().maxCoeff()));

  // and mu itself matches a rebuild
  LevelSolver fresh(phi, y, u, 4);
  CHECK((solver.mu() - fresh.mu()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("moving the only member of a symbol empties its column") {
  Rng rng(13);
  Matrix phi = random_operator(6, 8, rng);
  Vector y = random_vector(6, rng);
  SymbolSeq u(8, 0);
  u[3] = 1;
  LevelSolver solver(phi, y, u, 2);
  solver.update_symbol(3, 1, 0);
  CHECK(solver.population()[1] == 0);
  CHECK(solver.mu().col(1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity operator, noiseless: optimal levels are group means") {
  Rng rng(17);
  const std::size_t n = 30;
  Matrix phi = Matrix::Identity(n, n);
  SymbolSeq u = random_assignment(n, 3, rng);
  Vector truth(3);
  truth << -1.0, 0.25, 2.0;
  Vector y = mapped(u, truth);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.01 * rng.normal();

  LevelSolver solver(phi, y, u, 3);
  solver.ridge_scale = 0.0;
  auto solved = solver.solve(Vector::Zero(3));
  REQUIRE(solved.has_value());
  for (unsigned b = 0; b < 3; ++b) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (u[i] == b) {
        sum += y[static_cast<Eigen::Index>(i)];
        ++count;
      }
    CHECK((*solved)[b] == doctest::Approx(sum / count).epsilon(1e-10));
  }
}

TEST_CASE("single level: scalar least squares") {
  Rng rng(19);
  Matrix phi = random_operator(9, 14, rng);
  Vector y = random_vector(9, rng);
  SymbolSeq u(14, 0);
  LevelSolver solver(phi, y, u, 1);
  solver.ridge_scale = 0.0;
  auto solved = solver.solve(Vector::Zero(1));
  REQUIRE(solved.has_value());
  const Vector mu = solver.mu().col(0);
  CHECK((*solved)[0] == doctest::Approx(mu.dot(y) / mu.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("solve matches the explicit design-matrix oracle") {
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 20 + rng.below(180);
    const std::size_t n = m + rng.below(200);
    const unsigned z = 2 + static_cast<unsigned>(rng.below(7));
    Matrix phi = random_operator(m, n, rng);
    Vector y = random_vector(m, rng);
    SymbolSeq u = random_assignment(n, z, rng);

    LevelSolver solver(phi, y, u, z);
    solver.ridge_scale = 0.0;
    auto solved = solver.solve(Vector::Zero(z));
    REQUIRE(solved.has_value());

    Matrix design = Matrix::Zero(m, z);
    for (std::size_t i = 0; i < n; ++i)
      design.col(u[i]) += phi.col(static_cast<Eigen::Index>(i));
    const Vector oracle = design.colPivHouseholderQr().solve(y);
    CHECK((*solved - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));

    const double fast = solver.fast_residual(*solved);
    const double direct = (y - phi * mapped(u, *solved)).squaredNorm();
    CHECK(std::abs(fast - direct) <= 1e-8 * std::max(1.0, direct));
  }
}

TEST_CASE("empty levels keep their previous value in the solve") {
  Rng rng(29);
  Matrix phi = random_operator(10, 16, rng);
  Vector y = random_vector(10, rng);
  SymbolSeq u = random_assignment(16, 2, rng);  // symbols 0,1 only
  LevelSolver solver(phi, y, u, 3);
  Vector prev(3);
  prev << 0.0, 1.0, 42.0;
  auto solved = solver.solve(prev);
  REQUIRE(solved.has_value());
  CHECK((*solved)[2] == 42.0);
}

TEST_CASE("zero level vector gives the squared norm of y") {
  Rng rng(31);
  Matrix phi = random_operator(7, 11, rng);
  Vector y = random_vector(7, rng);
  SymbolSeq u = random_assignment(11, 2, rng);
  LevelSolver solver(phi, y, u, 2);
  CHECK(solver.fast_residual(Vector::Zero(2)) ==
        doctest::Approx(y.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("optimal levels minimize the fast residual") {
  Rng rng(37);
  Matrix phi = random_operator(25, 50, rng);
  Vector y = random_vector(25, rng);
  SymbolSeq u = random_assignment(50, 4, rng);
  LevelSolver solver(phi, y, u, 4);
  solver.ridge_scale = 0.0;
  auto best = solver.solve(Vector::Zero(4));
  REQUIRE(best.has_value());
  const double best_resid = solver.fast_residual(*best);
  for (int rep = 0; rep < 30; ++rep) {
    Vector other = *best;
    for (Eigen::Index i = 0; i < other.size(); ++i) other[i] += 0.2 * rng.normal();
    CHECK(best_resid <= solver.fast_residual(other) + 1e-9);
  }
}

TEST_CASE("identity operator: optimal residual is the within-group variance") {
  Rng rng(41);
  const std::size_t n = 40;
  Matrix phi = Matrix::Identity(n, n);
  Vector y = random_vector(n, rng);
  SymbolSeq u = random_assignment(n, 3, rng);
  LevelSolver solver(phi, y, u, 3);
  solver.ridge_scale = 0.0;
  auto solved = solver.solve(Vector::Zero(3));
  REQUIRE(solved.has_value());

  double within = 0.0;
  for (unsigned b = 0; b < 3; ++b) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (u[i] == b) {
        sum += y[static_cast<Eigen::Index>(i)];
        ++count;
      }
    const double mean = sum / count;
    for (std::size_t i = 0; i < n; ++i)
      if (u[i] == b) {
        const double d = y[static_cast<Eigen::Index>(i)] - mean;
        within += d * d;
      }
  }
  CHECK(solver.fast_residual(*solved) == doctest::Approx(within).epsilon(1e-9));
}
