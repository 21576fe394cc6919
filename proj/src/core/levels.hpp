#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/entropy.hpp"
#include "core/sources.hpp"

namespace ucs {

// The adaptive reproduction alphabet: symbol ids are 0..size-1, each carrying
// a real level and its occupancy count in the current sequence.
struct AdaptiveAlphabet {
  Vector levels;                        // map(Z)
  std::vector<std::int64_t> population; // |N_beta|, sums to N

  std::size_t size() const { return static_cast<std::size_t>(levels.size()); }
  static AdaptiveAlphabet from_sequence(const Vector& levels, const SymbolSeq& u);
};

// Per-symbol column sums mu, Gram matrix Omega = mu^T mu and right-hand side
// Theta = mu^T y for the level least-squares problem. update_symbol moves one
// sequence entry between symbols in O(M |Z|): the two affected mu columns get
// -+ Phi(:,n) and the touched Omega rows/columns and Theta entries are
// recomputed from mu.
//
// Every update saves the overwritten slices; applying the exact inverse of
// the most recent move restores them, so a speculative move followed by its
// inverse is bit-exact.
class LevelSolver {
 public:
  LevelSolver() = default;
  LevelSolver(const Matrix& phi, const Vector& y, const SymbolSeq& u,
              std::size_t alphabet_size);

  void update_symbol(std::size_t n, Symbol old_sym, Symbol new_sym);

  // Full recompute of mu, Omega, Theta from the sequence (drift control).
  void rebuild(const SymbolSeq& u);

  // Least-squares-optimal levels: solves (Omega + ridge I) map = Theta over
  // the populated symbols; empty symbols keep their value from prev_levels.
  // ridge = ridge_scale * trace(Omega_active) / k. Returns nullopt when the
  // solve fails even with the ridge.
  std::optional<Vector> solve(const Vector& prev_levels) const;

  // || y - mu * levels ||^2, an O(M |Z|) evaluation of || y - Phi map(u) ||^2.
  double fast_residual(const Vector& levels) const;

  const Matrix& mu() const { return mu_; }
  const Matrix& omega() const { return omega_; }
  const Vector& theta() const { return theta_; }
  const std::vector<std::int64_t>& population() const { return population_; }
  std::size_t alphabet_size() const { return static_cast<std::size_t>(mu_.cols()); }

  double ridge_scale = 1e-8;

 private:
  const Matrix* phi_ = nullptr;  // shared read-only
  const Vector* y_ = nullptr;
  Matrix mu_;      // M x |Z|
  Matrix omega_;   // |Z| x |Z|
  Vector theta_;   // |Z|
  std::vector<std::int64_t> population_;

  struct Undo {
    bool valid = false;
    std::size_t n = 0;
    Symbol old_sym = 0, new_sym = 0;
    Vector mu_old_col, mu_new_col;
    Vector omega_old_col, omega_new_col;
    double theta_old = 0, theta_new = 0;
    std::int64_t pop_old = 0, pop_new = 0;
  };
  Undo undo_;

  void refresh_cross_terms(Symbol a, Symbol b);
};

}  // namespace ucs
