#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "core/sources.hpp"

namespace ucs {

// Logarithmic cooling law s_t = ln(t + r0) / (c * n * delta_q_hat).
// delta_q_hat is the energy-span surrogate; overestimating it only rescales
// the schedule (equivalent to a larger c).
struct AnnealingSchedule {
  double c = 1.5;            // temperature constant, > 1
  std::size_t r0 = 0;        // offset carried across sampler invocations
  double delta_q_hat = 1.0;  // > 0
  std::size_t n = 1;         // signal length

  double s(std::size_t t) const;  // throws when t + r0 < 1
};

// p_a proportional to exp(-s * E_a), computed after shifting by min(E) so the
// exponents stay bounded. Entries with E = +inf get zero weight; throws when
// every entry is infinite. s = +inf concentrates uniformly on the minimizers.
Vector boltzmann_weights(const Vector& energies, double s);

// Computable upper bound on the worst-case single-site energy change:
//   entropy part:  4 (q+1) (log2 N + 2)
//   residual part: c4 * (2 span Cmax Bres + span^2 Cmax^2)
// with Cmax the largest column norm of Phi and Bres >= ||y - Phi w|| for any
// w in the level range (triangle inequality through ||Phi||_F).
// Finite whenever the level span is.
double estimate_delta_q(const Matrix& phi, const Vector& y, double level_min,
                        double level_max, double c4, unsigned q);

// Per-move energy scale actually seen on an instance: flipping one entry
// across the finest level gap costs about c4 * E[||Phi col||^2] * gap^2 plus
// a bit of entropy. Used to calibrate sampler schedules.
double gap_energy_scale(const Matrix& phi, double c4, double min_level_gap);

// Schedule whose inverse temperature sweeps from 0 to sharpness/gap_scale
// over r_total super-iterations while keeping the ln(t + r0) form: the
// worst-case bound from estimate_delta_q leaves the chain at essentially
// infinite temperature for any affordable budget, so samplers plug in this
// calibrated span surrogate instead.
AnnealingSchedule make_calibrated_schedule(std::size_t n, double c,
                                           std::size_t r_total,
                                           std::size_t r0, double gap_scale,
                                           double sharpness);

}  // namespace ucs
