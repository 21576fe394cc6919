#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "core/sources.hpp"

using namespace ucs;

namespace {

double nonzero_fraction(const Vector& x) {
  double count = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) ++count;
  return count / static_cast<double>(x.size());
}

struct Moments {
  double mean, second;
};

Moments empirical_moments(const Vector& x) {
  return {x.mean(), x.squaredNorm() / static_cast<double>(x.size())};
}

// Variance of the sample mean of g(chain state) * amplitude for the two-state
// on/off chain: (1/n) [Var + 2 sum_k cov_k] with the geometric decay of the
// state autocovariance, cov_k = a_mean^2 pi (1-pi) lambda^k.
double two_state_mean_variance(double p01, double p10, double a_mean,
                               double a_second, std::size_t n) {
  const double pi = p01 / (p01 + p10);
  const double lambda = 1.0 - p01 - p10;
  const double var = pi * a_second - pi * pi * a_mean * a_mean;
  const double cov_sum = a_mean * a_mean * pi * (1.0 - pi) * lambda / (1.0 - lambda);
  return (var + 2.0 * cov_sum) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("bernoulli p=0 gives the all-zero vector") {
  SourceSpec spec;
  spec.kind = SourceKind::kBernoulli;
  spec.p = 0.0;
  Rng rng(1);
  Vector x = generate_signal(spec, 100, rng);
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bernoulli activity matches p") {
  SourceSpec spec;
  spec.kind = SourceKind::kBernoulli;
  spec.p = 0.03;
  Rng rng(2);
  Vector x = generate_signal(spec, 100000, rng);
  CHECK(nonzero_fraction(x) == doctest::Approx(0.03).epsilon(0.005 / 0.03));
}

TEST_CASE("markov-uniform stationary activity is p01/(p01+p10)") {
  SourceSpec spec;
  spec.kind = SourceKind::kMarkovUniform;
  spec.p01 = 3.0 / 970.0;
  spec.p10 = 0.10;
  Rng rng(3);
  Vector x = generate_signal(spec, 100000, rng);
  // stationary on-probability: (3/970) / (3/970 + 0.10) = 0.03
  CHECK(std::abs(nonzero_fraction(x) - 0.03) < 0.005);
}

TEST_CASE("empirical moments match analytic values within 3 standard errors") {
  const std::size_t n = 1000000;

  SUBCASE("bernoulli") {
    SourceSpec spec;
    spec.kind = SourceKind::kBernoulli;
    spec.p = 0.03;
    Rng rng(101);
    const Moments got = empirical_moments(generate_signal(spec, n, rng));
    const double se = std::sqrt(0.03 * 0.97 / static_cast<double>(n));
    CHECK(std::abs(got.mean - 0.03) < 3 * se);
    CHECK(std::abs(got.second - 0.03) < 3 * se);
  }

  SUBCASE("sparse laplace") {
    SourceSpec spec;
    spec.kind = SourceKind::kSparseLaplace;
    spec.p = 0.03;
    Rng rng(102);
    const Moments got = empirical_moments(generate_signal(spec, n, rng));
    // E[x]=0, Var(x)=0.03; E[x^2]=0.03, Var(x^2)=0.03 E[L^4] - 0.03^2,
    // with E[L^4] = 24 b^4 = 6 for the unit-variance Laplace (b^2 = 1/2).
    const double se_mean = std::sqrt(0.03 / static_cast<double>(n));
    const double se_second =
        std::sqrt((0.03 * 6.0 - 0.03 * 0.03) / static_cast<double>(n));
    CHECK(std::abs(got.mean - 0.0) < 3 * se_mean);
    CHECK(std::abs(got.second - 0.03) < 3 * se_second);
  }

  SUBCASE("markov uniform") {
    SourceSpec spec;
    spec.kind = SourceKind::kMarkovUniform;
    spec.p01 = 3.0 / 970.0;
    spec.p10 = 0.10;
    Rng rng(103);
    const Moments got = empirical_moments(generate_signal(spec, n, rng));
    const double pi = 0.03;
    const double se_mean =
        std::sqrt(two_state_mean_variance(spec.p01, spec.p10, 0.5, 1.0 / 3.0, n));
    const double se_second =
        std::sqrt(two_state_mean_variance(spec.p01, spec.p10, 1.0 / 3.0, 1.0 / 5.0, n));
    CHECK(std::abs(got.mean - pi * 0.5) < 3 * se_mean);
    CHECK(std::abs(got.second - pi / 3.0) < 3 * se_second);
  }

  SUBCASE("markov rademacher") {
    SourceSpec spec;
    spec.kind = SourceKind::kMarkovRademacher;
    spec.p01 = 3.0 / 70.0;
    spec.p10 = 0.10;
    Rng rng(104);
    const Moments got = empirical_moments(generate_signal(spec, n, rng));
    const double pi = (3.0 / 70.0) / (3.0 / 70.0 + 0.10);
    // independent signs: the mean has no chain correlation; x^2 is the state
    const double se_mean = std::sqrt(pi / static_cast<double>(n));
    const double se_second =
        std::sqrt(two_state_mean_variance(spec.p01, spec.p10, 1.0, 1.0, n));
    CHECK(std::abs(got.mean - 0.0) < 3 * se_mean);
    CHECK(std::abs(got.second - pi) < 3 * se_second);
  }

  SUBCASE("markov four-state") {
    SourceSpec spec;
    spec.kind = SourceKind::kMarkovFourState;
    spec.error_prob = 0.03;
    Rng rng(105);
    Vector x = generate_signal(spec, n, rng);
    const Moments got = empirical_moments(x);
    CHECK(got.second == 1.0);  // emissions are exactly +/-1

    // mean-variance oracle: uniform stationary distribution over the cycle,
    // cov_k = (1/4) f^T P^k f computed by iterating the transition matrix
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
    const double e = spec.error_prob;
    p(0, 1) = 1 - e; p(0, 2) = e;
    p(1, 2) = 1 - e; p(1, 1) = e;
    p(2, 3) = 1 - e; p(2, 0) = e;
    p(3, 0) = 1 - e; p(3, 3) = e;
    Eigen::Vector4d f(1, 1, -1, -1);
    Eigen::Vector4d g = f;
    double cov_sum = 0.0;
    for (int k = 1; k <= 5000; ++k) {
      g = p * g;
      cov_sum += 0.25 * f.dot(g);
    }
    const double se_mean =
        std::sqrt((1.0 + 2.0 * cov_sum) / static_cast<double>(n));
    CHECK(std::abs(got.mean) < 3 * se_mean);
  }
}

TEST_CASE("four-state source emits the +1,+1,-1,-1 cycle when error-free") {
  SourceSpec spec;
  spec.kind = SourceKind::kMarkovFourState;
  spec.error_prob = 0.0;
  Rng rng(9);
  Vector x = generate_signal(spec, 64, rng);
  // locate the phase from the first sign change and verify periodicity
  for (Eigen::Index i = 0; i + 4 < x.size(); ++i) CHECK(x[i] == x[i + 4]);
  double switches = 0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    if (x[i] != x[i + 1]) ++switches;
  CHECK(switches >= 31);  // every second step flips
}

TEST_CASE("invalid parameters are rejected") {
  SourceSpec spec;
  spec.kind = SourceKind::kBernoulli;
  spec.p = 1.5;
  Rng rng(1);
  CHECK_THROWS_AS(generate_signal(spec, 10, rng), std::invalid_argument);
  spec.kind = SourceKind::kMarkovUniform;
  spec.p = 0.03;
  spec.p01 = -0.1;
  CHECK_THROWS_AS(generate_signal(spec, 10, rng), std::invalid_argument);
}

TEST_CASE("measurement noise variance implements the SNR definition") {
  Vector x = Vector::Zero(10000);
  for (int i = 0; i < 300; ++i) x[i * 33] = 1.0;  // empirical E[x^2] = 0.03
  Rng rng(17);
  MeasurementSystem ms = measure(x, 5000, 10.0, rng);
  const double expected = (10000.0 * (300.0 / 10000.0)) / (5000.0 * 10.0);
  CHECK(ms.sigma_z_sq == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ms.sigma_z_sq == doctest::Approx(0.006).epsilon(1e-9));
  CHECK(ms.c2 == 1.0 / (2.0 * ms.sigma_z_sq));
  CHECK(ms.c4 == ms.c2 * std::log2(std::exp(1.0)));
}

TEST_CASE("zero-noise hook gives y = Phi x exactly") {
  Rng rng(19);
  Matrix phi(4, 6);
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = rng.normal();
  Vector x(6);
  x << 1, 0, 2, -1, 0, 0.5;
  MeasurementSystem ms = measure_with(phi, x, 0.25, false, rng);
  CHECK((ms.y - phi * x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ms.sigma_z_sq == 0.25);
}

TEST_CASE("identity operator hook gives the scalar channel") {
  Rng rng(23);
  Vector x(5);
  x << 1, 0, 1, 0, 0;
  MeasurementSystem ms =
      measure_with(Matrix::Identity(5, 5), x, 0.01, true, rng);
  CHECK(ms.y.size() == 5);
  // y = x + z with z ~ N(0, 0.01)
  CHECK((ms.y - x).cwiseAbs().maxCoeff() < 0.5);
  CHECK((ms.y - x).cwiseAbs().minCoeff() > 0.0);
}

TEST_CASE("all-zero signal with finite SNR is rejected") {
  Vector x = Vector::Zero(100);
  Rng rng(29);
  CHECK_THROWS_AS(measure(x, 50, 10.0, rng), std::invalid_argument);
}

TEST_CASE("columns of the operator have unit norm on average") {
  SourceSpec spec;
  Rng srng(31);
  Vector x = generate_signal(spec, 400, srng);
  Rng rng(37);
  MeasurementSystem ms = measure(x, 200, 10.0, rng);
  const double mean_norm = ms.phi.colwise().norm().mean();
  CHECK(std::abs(mean_norm - 1.0) < 0.05);
}

TEST_CASE("measurement is reproducible per seed") {
  SourceSpec spec;
  Rng srng(41);
  Vector x = generate_signal(spec, 200, srng);
  Rng r1(99), r2(99);
  MeasurementSystem a = measure(x, 100, 10.0, r1);
  MeasurementSystem b = measure(x, 100, 10.0, r2);
  CHECK(a.phi == b.phi);
  CHECK(a.y == b.y);
  CHECK(a.sigma_z_sq == b.sigma_z_sq);
}
