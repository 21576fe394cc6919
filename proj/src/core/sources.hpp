#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>

#include "core/rng.hpp"

namespace ucs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class SourceKind {
  kBernoulli,        // i.i.d. {0,1}, P(1) = p
  kSparseLaplace,    // i.i.d., nonzero w.p. p, amplitude Laplace(0, 1/sqrt(2))
  kMarkovUniform,    // two-state chain, nonzero amplitudes U[0,1]
  kMarkovRademacher, // two-state chain, nonzero amplitudes +/-1
  kMarkovFourState,  // +1,+1,-1,-1 cycle with early/late switches
};

const char* source_kind_name(SourceKind kind);
SourceKind source_kind_from_name(const std::string& name);

struct SourceSpec {
  SourceKind kind = SourceKind::kBernoulli;
  double p = 0.03;          // activity probability (Bernoulli, SparseLaplace)
  double p01 = 3.0 / 970.0; // zero -> nonzero transition (Markov chains)
  double p10 = 0.10;        // nonzero -> zero transition
  double error_prob = 0.03; // four-state transition error rate

  void validate() const;  // throws std::invalid_argument
};

Vector generate_signal(const SourceSpec& spec, std::size_t n, Rng& rng);

struct MeasurementSystem {
  Matrix phi;          // M x N
  Vector y;            // length M
  double sigma_z_sq = 0.0;
  double c2 = 0.0;     // 1 / (2 sigma_z_sq)
  double c4 = 0.0;     // c2 * log2(e)
};

// Gaussian measurement of x at the requested SNR (dB):
//   Phi(m,n) ~ N(0, 1/M),  y = Phi x + z,  z ~ N(0, sigma_z_sq),
//   sigma_z_sq = (N * mean(x^2)) / (M * 10^(snr_db/10)).
// The second moment of x is the empirical one, so the per-trial SNR is exact.
MeasurementSystem measure(const Vector& x, std::size_t m, double snr_db,
                          Rng& rng);

// Test hook: measurement with a caller-supplied operator. Noise is drawn
// i.i.d. N(0, sigma_z_sq) when add_noise is set, otherwise z = 0 and
// y = Phi x exactly (sigma_z_sq is still recorded for the objective).
MeasurementSystem measure_with(Matrix phi, const Vector& x, double sigma_z_sq,
                               bool add_noise, Rng& rng);

}  // namespace ucs
