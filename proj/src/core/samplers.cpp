#include "core/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ucs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double require_finite_c4(double sigma_z_sq) {
  if (!(sigma_z_sq > 0.0) || !std::isfinite(sigma_z_sq))
    throw std::invalid_argument("sampler requires a positive finite noise variance");
  return std::log2(std::exp(1.0)) / (2.0 * sigma_z_sq);
}

double min_adjacent_gap(const Vector& levels) {
  if (levels.size() < 2) return 1.0;
  double g = kInf;
  for (Eigen::Index i = 0; i + 1 < levels.size(); ++i)
    g = std::min(g, levels[i + 1] - levels[i]);
  return g > 0.0 ? g : 1.0;
}
}  // namespace

FixedAlphabet FixedAlphabet::standard_grid(std::size_t n, double x_min,
                                           double x_max) {
  if (n < 2) throw std::invalid_argument("grid needs n >= 2");
  if (!(x_max >= x_min)) throw std::invalid_argument("empty signal range");
  FixedAlphabet a;
  a.gamma = static_cast<unsigned>(
      std::ceil(std::log(static_cast<double>(n))));
  const double bound = std::max({std::abs(x_min), std::abs(x_max), 1e-12});
  const long k = static_cast<long>(
      std::ceil(bound * static_cast<double>(a.gamma) - 1e-12));
  a.c3 = static_cast<double>(k) /
         (static_cast<double>(a.gamma) * static_cast<double>(a.gamma));
  a.levels.resize(2 * k + 1);
  for (long i = -k; i <= k; ++i)
    a.levels[i + k] = static_cast<double>(i) / static_cast<double>(a.gamma);
  return a;
}

FixedAlphabet FixedAlphabet::from_levels(std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("alphabet needs >= 1 level");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw std::invalid_argument("levels must be sorted ascending");
  FixedAlphabet a;
  a.levels = Eigen::Map<Vector>(levels.data(),
                                static_cast<Eigen::Index>(levels.size()));
  return a;
}

Vector initial_point(const Matrix& phi, const Vector& y) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("operator height does not match y");
  return phi.transpose() * y;
}

SymbolSeq quantize_to_alphabet(const Vector& x, const Vector& levels) {
  if (levels.size() < 1) throw std::invalid_argument("alphabet needs >= 1 level");
  SymbolSeq u(static_cast<std::size_t>(x.size()));
  const double* begin = levels.data();
  const double* end = begin + levels.size();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double* it = std::lower_bound(begin, end, x[i]);
    std::size_t idx;
    if (it == begin) {
      idx = 0;
    } else if (it == end) {
      idx = static_cast<std::size_t>(levels.size() - 1);
    } else {
      std::size_t hi = static_cast<std::size_t>(it - begin);
      std::size_t lo = hi - 1;
      // strict inequality ties exact midpoints to the lower level
      idx = (x[i] - levels[static_cast<Eigen::Index>(lo)]) <
                    (levels[static_cast<Eigen::Index>(hi)] - x[i])
                ? lo
                : ((x[i] - levels[static_cast<Eigen::Index>(lo)]) ==
                           (levels[static_cast<Eigen::Index>(hi)] - x[i])
                       ? lo
                       : hi);
    }
    u[static_cast<std::size_t>(i)] = static_cast<Symbol>(idx);
  }
  return u;
}

std::size_t draw_categorical(const Vector& weights, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      last_positive = static_cast<std::size_t>(i);
      seen_positive = true;
    }
    cum += weights[i];
    if (u < cum) return static_cast<std::size_t>(i);
  }
  if (!seen_positive) throw std::invalid_argument("no positive weight");
  return last_positive;  // u landed in rounding slack past the last bin
}

BmcmcResult b_mcmc(const Matrix& phi, const Vector& y,
                   const FixedAlphabet& alphabet, double sigma_z_sq,
                   const BmcmcOptions& opt, Rng& rng) {
  const double c4 = require_finite_c4(sigma_z_sq);
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  const std::size_t z = alphabet.size();
  const double n_real = static_cast<double>(n);

  SymbolSeq u = quantize_to_alphabet(initial_point(phi, y), alphabet.levels);
  ContextCounts counts =
      ContextCounts::build(u, {opt.q, static_cast<unsigned>(z)});

  auto mapped = [&](const SymbolSeq& seq) {
    Vector v(static_cast<Eigen::Index>(seq.size()));
    for (std::size_t i = 0; i < seq.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = alphabet.levels[seq[i]];
    return v;
  };

  Vector e = y - phi * mapped(u);
  double resid_sq = e.squaredNorm();
  Vector col_sq = phi.colwise().squaredNorm();

  AnnealingSchedule sched;
  if (opt.delta_q_hat > 0.0) {
    sched.c = opt.c;
    sched.n = n;
    sched.delta_q_hat = opt.delta_q_hat;
  } else {
    sched = make_calibrated_schedule(
        n, opt.c, opt.super_iterations, 0,
        gap_energy_scale(phi, c4, min_adjacent_gap(alphabet.levels)),
        opt.sharpness);
  }

  double energy = n_real * counts.entropy() + c4 * resid_sq;
  BmcmcResult result{u, energy, u, energy};

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Vector cand(static_cast<Eigen::Index>(z));

  for (std::size_t t = 1; t <= opt.super_iterations; ++t) {
    const double s = sched.s(t);
    rng.shuffle(perm);
    for (std::size_t site : perm) {
      const Symbol cur = u[site];
      const double lcur = alphabet.levels[cur];
      const double v = phi.col(static_cast<Eigen::Index>(site)).dot(e);
      for (std::size_t b = 0; b < z; ++b) {
        const double dh =
            b == cur ? 0.0
                     : counts.delta_entropy(u, site, static_cast<Symbol>(b));
        const double delta = alphabet.levels[static_cast<Eigen::Index>(b)] - lcur;
        const double dd =
            -2.0 * delta * v + delta * delta * col_sq[static_cast<Eigen::Index>(site)];
        cand[static_cast<Eigen::Index>(b)] = n_real * dh + c4 * dd;
      }
      const std::size_t chosen = draw_categorical(boltzmann_weights(cand, s), rng);
      if (chosen != cur) {
        const double delta = alphabet.levels[static_cast<Eigen::Index>(chosen)] - lcur;
        resid_sq += -2.0 * delta * v +
                    delta * delta * col_sq[static_cast<Eigen::Index>(site)];
        e -= delta * phi.col(static_cast<Eigen::Index>(site));
        counts.commit_symbol(u, site, static_cast<Symbol>(chosen));
      }
      energy = n_real * counts.entropy() + c4 * resid_sq;
      if (energy < result.best_energy) {
        result.best_energy = energy;
        result.best_w = u;
      }
    }
    // cap drift in the running residual
    e = y - phi * mapped(u);
    resid_sq = e.squaredNorm();
    energy = n_real * counts.entropy() + c4 * resid_sq;
    if (opt.energy_trace) {
      (*opt.energy_trace) << t << ',' << s << ',' << counts.entropy() << ','
                          << resid_sq << ',' << energy << '\n';
    }
  }

  result.w = u;
  result.energy =
      n_real * ContextCounts::build(u, {opt.q, static_cast<unsigned>(z)}).entropy() +
      c4 * (y - phi * mapped(u)).squaredNorm();
  result.best_energy =
      n_real *
          ContextCounts::build(result.best_w, {opt.q, static_cast<unsigned>(z)})
              .entropy() +
      c4 * (y - phi * mapped(result.best_w)).squaredNorm();
  return result;
}

LmcmcState::LmcmcState(const Matrix& phi, const Vector& y, double c4,
                       SymbolSeq u, Vector levels, unsigned q,
                       AnnealingSchedule sched, Rng rng, double ridge_scale)
    : phi_(&phi),
      y_(&y),
      c4_(c4),
      u_(std::move(u)),
      levels_(std::move(levels)),
      counts_(ContextCounts::build(
          u_, {q, static_cast<unsigned>(levels_.size())})),
      solver_(phi, y, u_, static_cast<std::size_t>(levels_.size())),
      sched_(sched),
      rng_(rng) {
  if (!(c4 > 0.0) || !std::isfinite(c4))
    throw std::invalid_argument("c4 must be positive and finite");
  solver_.ridge_scale = ridge_scale;
  resid_ = solver_.fast_residual(levels_);
  const std::size_t z = static_cast<std::size_t>(levels_.size());
  cand_levels_.resize(z);
  cand_resid_.resize(z);
  cand_energy_.resize(static_cast<Eigen::Index>(z));
  perm_.resize(u_.size());
  std::iota(perm_.begin(), perm_.end(), 0);
}

double LmcmcState::energy() const {
  return static_cast<double>(u_.size()) * counts_.entropy() + c4_ * resid_;
}

double LmcmcState::energy_recomputed() const {
  ContextCounts fresh = ContextCounts::build(
      u_, {counts_.model().q, counts_.model().alphabet_size});
  const double resid = (*y_ - *phi_ * mapped_signal()).squaredNorm();
  return static_cast<double>(u_.size()) * fresh.entropy() + c4_ * resid;
}

Vector LmcmcState::mapped_signal() const {
  Vector v(static_cast<Eigen::Index>(u_.size()));
  for (std::size_t i = 0; i < u_.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = levels_[u_[i]];
  return v;
}

AdaptiveAlphabet LmcmcState::alphabet() const {
  AdaptiveAlphabet a;
  a.levels = levels_;
  a.population = solver_.population();
  return a;
}

void LmcmcState::resync() {
  solver_.rebuild(u_);
  if (auto solved = solver_.solve(levels_)) levels_ = *solved;
  resid_ = solver_.fast_residual(levels_);
}

void LmcmcState::gibbs_site_update(std::size_t site, double s) {
  const std::size_t z = static_cast<std::size_t>(levels_.size());
  const Symbol cur = u_[site];
  const double n_real = static_cast<double>(u_.size());

  for (std::size_t b = 0; b < z; ++b) {
    const Symbol cand = static_cast<Symbol>(b);
    const double dh = cand == cur ? 0.0 : counts_.delta_entropy(u_, site, cand);
    if (cand != cur) solver_.update_symbol(site, cur, cand);
    if (auto solved = solver_.solve(levels_)) {
      cand_levels_[b] = std::move(*solved);
      cand_resid_[b] = solver_.fast_residual(cand_levels_[b]);
      cand_energy_[static_cast<Eigen::Index>(b)] =
          n_real * dh + c4_ * cand_resid_[b];
    } else {
      cand_energy_[static_cast<Eigen::Index>(b)] = kInf;
    }
    if (cand != cur) solver_.update_symbol(site, cand, cur);  // bit-exact undo
  }

  if (!std::isfinite(cand_energy_.minCoeff())) return;  // every solve failed

  std::size_t chosen;
  if (std::isinf(s)) {
    // zero-temperature test hook: argmin, ties to the first candidate
    Eigen::Index arg = 0;
    cand_energy_.minCoeff(&arg);
    chosen = static_cast<std::size_t>(arg);
  } else {
    chosen = draw_categorical(boltzmann_weights(cand_energy_, s), rng_);
  }

  if (cand_energy_[static_cast<Eigen::Index>(chosen)] == kInf) return;
  if (chosen != cur) {
    counts_.commit_symbol(u_, site, static_cast<Symbol>(chosen));
    solver_.update_symbol(site, cur, static_cast<Symbol>(chosen));
  }
  levels_ = cand_levels_[chosen];
  resid_ = cand_resid_[chosen];
}

void LmcmcState::run(std::size_t r, std::ostream* energy_trace) {
  if (cand_levels_.size() != static_cast<std::size_t>(levels_.size())) {
    cand_levels_.resize(static_cast<std::size_t>(levels_.size()));
    cand_resid_.resize(static_cast<std::size_t>(levels_.size()));
    cand_energy_.resize(levels_.size());
  }
  for (std::size_t t = 1; t <= r; ++t) {
    const double s = temperature_override_ ? *temperature_override_ : sched_.s(t);
    rng_.shuffle(perm_);
    for (std::size_t site : perm_) gibbs_site_update(site, s);
    // periodic full recompute caps floating-point drift
    solver_.rebuild(u_);
    resid_ = solver_.fast_residual(levels_);
    if (energy_trace) {
      (*energy_trace) << (t + sched_.r0) << ',' << s << ',' << counts_.entropy()
                      << ',' << resid_ << ',' << energy() << '\n';
    }
  }
  sched_.r0 += r;
}

LmcmcOutput l_mcmc(LmcmcState& state, std::size_t r,
                   std::ostream* energy_trace) {
  state.run(r, energy_trace);
  return {state.mapped_signal(), state.alphabet(), state.schedule().r0};
}

}  // namespace ucs
