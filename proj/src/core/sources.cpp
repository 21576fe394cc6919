#include "core/sources.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucs {

namespace {

bool is_probability(double v) { return v >= 0.0 && v <= 1.0 && std::isfinite(v); }

// Laplace(0, b) with variance 2 b^2 = 1, via inverse CDF.
double laplace_unit_variance(Rng& rng) {
  const double b = 1.0 / std::sqrt(2.0);
  double u = rng.uniform() - 0.5;
  double mag = -b * std::log(1.0 - 2.0 * std::abs(u));
  return u < 0.0 ? -mag : mag;
}

Vector two_state_chain(std::size_t n, double p01, double p10, Rng& rng,
                       double (*amplitude)(Rng&)) {
  Vector x(static_cast<Eigen::Index>(n));
  // Start from the stationary distribution of the on/off chain.
  const double pi_on = (p01 + p10) > 0.0 ? p01 / (p01 + p10) : 0.0;
  bool on = rng.uniform() < pi_on;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      double u = rng.uniform();
      on = on ? (u >= p10) : (u < p01);
    }
    x[static_cast<Eigen::Index>(i)] = on ? amplitude(rng) : 0.0;
  }
  return x;
}

double uniform_01(Rng& rng) { return rng.uniform(); }
double rademacher(Rng& rng) { return rng.uniform() < 0.5 ? 1.0 : -1.0; }

// Four-state walk over the emission cycle +1,+1,-1,-1. A regular step
// advances the state by one; with probability error_prob the step either
// skips the second symbol of the pair (early switch, from states 0 and 2)
// or repeats it (late switch, from states 1 and 3).
Vector four_state_chain(std::size_t n, double error_prob, Rng& rng) {
  static const double kEmission[4] = {1.0, 1.0, -1.0, -1.0};
  Vector x(static_cast<Eigen::Index>(n));
  unsigned state = static_cast<unsigned>(rng.below(4));
  for (std::size_t i = 0; i < n; ++i) {
    x[static_cast<Eigen::Index>(i)] = kEmission[state];
    bool error = rng.uniform() < error_prob;
    unsigned advance = error ? (state % 2 == 0 ? 2u : 0u) : 1u;
    state = (state + advance) % 4;
  }
  return x;
}

}  // namespace

const char* source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::kBernoulli: return "bernoulli";
    case SourceKind::kSparseLaplace: return "sparse_laplace";
    case SourceKind::kMarkovUniform: return "markov_uniform";
    case SourceKind::kMarkovRademacher: return "markov_rademacher";
    case SourceKind::kMarkovFourState: return "markov_four_state";
  }
  return "unknown";
}

SourceKind source_kind_from_name(const std::string& name) {
  if (name == "bernoulli") return SourceKind::kBernoulli;
  if (name == "sparse_laplace") return SourceKind::kSparseLaplace;
  if (name == "markov_uniform") return SourceKind::kMarkovUniform;
  if (name == "markov_rademacher") return SourceKind::kMarkovRademacher;
  if (name == "markov_four_state") return SourceKind::kMarkovFourState;
  throw std::invalid_argument("unknown source kind: " + name);
}

void SourceSpec::validate() const {
  switch (kind) {
    case SourceKind::kBernoulli:
    case SourceKind::kSparseLaplace:
      if (!is_probability(p))
        throw std::invalid_argument("activity probability must be in [0,1]");
      break;
    case SourceKind::kMarkovUniform:
    case SourceKind::kMarkovRademacher:
      if (!is_probability(p01) || !is_probability(p10))
        throw std::invalid_argument("transition probabilities must be in [0,1]");
      break;
    case SourceKind::kMarkovFourState:
      if (!is_probability(error_prob))
        throw std::invalid_argument("error probability must be in [0,1]");
      break;
  }
}

Vector generate_signal(const SourceSpec& spec, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("signal length must be >= 1");
  spec.validate();
  switch (spec.kind) {
    case SourceKind::kBernoulli: {
      Vector x(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = rng.uniform() < spec.p ? 1.0 : 0.0;
      return x;
    }
    case SourceKind::kSparseLaplace: {
      Vector x(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = rng.uniform() < spec.p ? laplace_unit_variance(rng) : 0.0;
      return x;
    }
    case SourceKind::kMarkovUniform:
      return two_state_chain(n, spec.p01, spec.p10, rng, uniform_01);
    case SourceKind::kMarkovRademacher:
      return two_state_chain(n, spec.p01, spec.p10, rng, rademacher);
    case SourceKind::kMarkovFourState:
      return four_state_chain(n, spec.error_prob, rng);
  }
  throw std::invalid_argument("unknown source kind");
}

MeasurementSystem measure(const Vector& x, std::size_t m, double snr_db,
                          Rng& rng) {
  if (m < 1) throw std::invalid_argument("number of measurements must be >= 1");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite");
  const double mean_sq = x.squaredNorm() / static_cast<double>(x.size());
  if (mean_sq <= 0.0)
    throw std::invalid_argument("all-zero signal with finite SNR requested");

  const double n = static_cast<double>(x.size());
  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double sigma_z_sq = n * mean_sq / (static_cast<double>(m) * snr_lin);

  Matrix phi(static_cast<Eigen::Index>(m), x.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index col = 0; col < phi.cols(); ++col)
    for (Eigen::Index row = 0; row < phi.rows(); ++row)
      phi(row, col) = scale * rng.normal();

  return measure_with(std::move(phi), x, sigma_z_sq, /*add_noise=*/true, rng);
}

MeasurementSystem measure_with(Matrix phi, const Vector& x, double sigma_z_sq,
                               bool add_noise, Rng& rng) {
  if (phi.cols() != x.size())
    throw std::invalid_argument("operator width does not match signal length");
  if (sigma_z_sq < 0.0 || !std::isfinite(sigma_z_sq))
    throw std::invalid_argument("noise variance must be finite and >= 0");

  MeasurementSystem ms;
  ms.y = phi * x;
  if (add_noise && sigma_z_sq > 0.0) {
    const double sd = std::sqrt(sigma_z_sq);
    for (Eigen::Index i = 0; i < ms.y.size(); ++i) ms.y[i] += sd * rng.normal();
  }
  ms.phi = std::move(phi);
  ms.sigma_z_sq = sigma_z_sq;
  ms.c2 = sigma_z_sq > 0.0 ? 1.0 / (2.0 * sigma_z_sq)
                           : std::numeric_limits<double>::infinity();
  ms.c4 = ms.c2 * std::log2(std::exp(1.0));
  return ms;
}

}  // namespace ucs
