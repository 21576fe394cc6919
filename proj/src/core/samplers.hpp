#pragma once

#include <cstddef>
#include <optional>
#include <ostream>

#include "core/annealing.hpp"
#include "core/entropy.hpp"
#include "core/levels.hpp"
#include "core/rng.hpp"
#include "core/sources.hpp"

namespace ucs {

// End-of-budget inverse-temperature target, in units of the per-move energy
// scale (see gap_energy_scale).
inline constexpr double kDefaultSharpness = 8.0;

// Data-independent uniform grid with step 1/gamma, gamma = ceil(ln N),
// extended symmetrically until it covers [x_min, x_max].
struct FixedAlphabet {
  Vector levels;  // ascending
  unsigned gamma = 0;
  double c3 = 0.0;

  static FixedAlphabet standard_grid(std::size_t n, double x_min, double x_max);
  static FixedAlphabet from_levels(std::vector<double> levels);
  std::size_t size() const { return static_cast<std::size_t>(levels.size()); }
};

// Phi^T y.
Vector initial_point(const Matrix& phi, const Vector& y);

// Nearest level per entry; exact midpoints resolve to the lower level.
// Levels must be sorted ascending.
SymbolSeq quantize_to_alphabet(const Vector& x, const Vector& levels);

// Draw an index from a normalized weight vector via inverse CDF; ties and
// boundaries resolve in candidate order.
std::size_t draw_categorical(const Vector& weights, Rng& rng);

struct BmcmcOptions {
  std::size_t super_iterations = 100;
  double c = 1.5;
  unsigned q = 2;
  double sharpness = kDefaultSharpness;
  double delta_q_hat = 0.0;  // 0 = calibrate from the instance
  std::ostream* energy_trace = nullptr;
};

struct BmcmcResult {
  SymbolSeq w;          // final state
  double energy;        // recomputed from scratch
  SymbolSeq best_w;     // lowest-energy state visited
  double best_energy;
};

// Fixed-alphabet annealed Gibbs sampler. Each super-iteration resamples every
// site once in a fresh uniform random permutation; runtime O(r N (M + |Z|)).
BmcmcResult b_mcmc(const Matrix& phi, const Vector& y,
                   const FixedAlphabet& alphabet, double sigma_z_sq,
                   const BmcmcOptions& opt, Rng& rng);

// Level-adaptive sampler state: sequence, counts, level solver and schedule.
// One instance per chain; copyable for snapshot/rollback.
class LmcmcState {
 public:
  LmcmcState(const Matrix& phi, const Vector& y, double c4, SymbolSeq u,
             Vector levels, unsigned q, AnnealingSchedule sched, Rng rng,
             double ridge_scale = 1e-8);

  // r super-iterations; advances the schedule offset by r.
  void run(std::size_t r, std::ostream* energy_trace = nullptr);

  // One Gibbs update at the given site: every candidate symbol is evaluated
  // with a speculative solver move (entropy delta, mu/Omega update, level
  // re-solve, fast residual), the move is rolled back, and the drawn symbol
  // is committed.
  void gibbs_site_update(std::size_t site, double s);

  const SymbolSeq& sequence() const { return u_; }
  const Vector& levels() const { return levels_; }
  Vector mapped_signal() const;
  AdaptiveAlphabet alphabet() const;
  const LevelSolver& solver() const { return solver_; }
  const ContextCounts& counts() const { return counts_; }
  const AnnealingSchedule& schedule() const { return sched_; }
  const Matrix& phi() const { return *phi_; }
  const Vector& y() const { return *y_; }
  double c4() const { return c4_; }
  Rng& rng() { return rng_; }

  double entropy_bits() const { return counts_.entropy(); }
  double residual() const { return resid_; }
  double energy() const;
  double energy_recomputed() const;  // independent from-scratch evaluation

  // Refresh solver, residual and current levels from the sequence.
  void resync();

  // Test hook: force the inverse temperature (s = +inf picks the argmin
  // candidate deterministically). Not part of the production path.
  void set_temperature_override(std::optional<double> s) {
    temperature_override_ = s;
  }

 private:
  const Matrix* phi_;
  const Vector* y_;
  double c4_;
  SymbolSeq u_;
  Vector levels_;
  ContextCounts counts_;
  LevelSolver solver_;
  AnnealingSchedule sched_;
  Rng rng_;
  double resid_ = 0.0;
  std::optional<double> temperature_override_;

  // per-site workspaces
  Vector cand_energy_;
  std::vector<Vector> cand_levels_;
  std::vector<double> cand_resid_;
  std::vector<std::size_t> perm_;
};

struct LmcmcOutput {
  Vector x_hat;              // map(u)
  AdaptiveAlphabet alphabet;
  std::size_t next_offset;   // r0 + r
};

LmcmcOutput l_mcmc(LmcmcState& state, std::size_t r,
                   std::ostream* energy_trace = nullptr);

}  // namespace ucs
