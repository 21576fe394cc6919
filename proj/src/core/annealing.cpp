#include "core/annealing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucs {

double AnnealingSchedule::s(std::size_t t) const {
  const double arg = static_cast<double>(t) + static_cast<double>(r0);
  if (arg < 1.0) throw std::invalid_argument("schedule requires t + r0 >= 1");
  return std::log(arg) / (c * static_cast<double>(n) * delta_q_hat);
}

Vector boltzmann_weights(const Vector& energies, double s) {
  if (energies.size() == 0)
    throw std::invalid_argument("no candidate energies");
  if (s < 0.0 || std::isnan(s))
    throw std::invalid_argument("inverse temperature must be >= 0");

  double min_e = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (std::isnan(energies[i]))
      throw std::invalid_argument("candidate energy is NaN");
    min_e = std::min(min_e, energies[i]);
  }
  if (!std::isfinite(min_e))
    throw std::invalid_argument("all candidate energies are infinite");

  Vector w(energies.size());
  if (std::isinf(s)) {
    for (Eigen::Index i = 0; i < energies.size(); ++i)
      w[i] = energies[i] == min_e ? 1.0 : 0.0;
  } else {
    for (Eigen::Index i = 0; i < energies.size(); ++i)
      w[i] = std::isfinite(energies[i]) ? std::exp(-s * (energies[i] - min_e))
                                        : 0.0;
  }
  return w / w.sum();
}

double estimate_delta_q(const Matrix& phi, const Vector& y, double level_min,
                        double level_max, double c4, unsigned q) {
  if (!(level_max >= level_min) || !std::isfinite(level_min) ||
      !std::isfinite(level_max))
    throw std::invalid_argument("level span must be finite");

  const double n = static_cast<double>(phi.cols());
  const double entropy_part =
      4.0 * (static_cast<double>(q) + 1.0) * (std::log2(std::max(n, 2.0)) + 2.0);

  const double span = level_max - level_min;
  const double abs_max = std::max(std::abs(level_min), std::abs(level_max));
  const double col_max = phi.colwise().norm().maxCoeff();
  const double frob = phi.norm();
  const double resid_max = y.norm() + frob * std::sqrt(n) * abs_max;
  const double resid_part =
      c4 * (2.0 * span * col_max * resid_max + span * span * col_max * col_max);
  return entropy_part + resid_part;
}

double gap_energy_scale(const Matrix& phi, double c4, double min_level_gap) {
  const double mean_col_sq =
      phi.colwise().squaredNorm().mean();
  return c4 * mean_col_sq * min_level_gap * min_level_gap + 1.0;
}

AnnealingSchedule make_calibrated_schedule(std::size_t n, double c,
                                           std::size_t r_total,
                                           std::size_t r0, double gap_scale,
                                           double sharpness) {
  if (gap_scale <= 0.0 || sharpness <= 0.0)
    throw std::invalid_argument("gap scale and sharpness must be positive");
  AnnealingSchedule sched;
  sched.c = c;
  sched.r0 = r0;
  sched.n = n;
  const double end = static_cast<double>(r_total + r0) + 1.0;
  sched.delta_q_hat =
      std::log(end) * gap_scale /
      (c * static_cast<double>(n) * sharpness);
  return sched;
}

}  // namespace ucs
