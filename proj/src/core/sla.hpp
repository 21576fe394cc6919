#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "core/samplers.hpp"

namespace ucs {

struct SlaConfig {
  std::size_t r1 = 50;   // stage budgets, in super-iterations
  std::size_t r2 = 10;
  std::size_t r3 = 10;
  std::size_t r4a = 10;
  std::size_t r4b = 10;
  std::size_t max_total = 240;
  unsigned z_init = 7;
  double k1 = 10.0;  // stage-2 merge threshold parameter
  double k2 = 10.0;  // stage-4a population threshold parameter
  double c = 1.5;
  unsigned q = 2;
  double sharpness = kDefaultSharpness;
  double ridge_scale = 1e-8;

  void validate() const;
};

struct SlaRound {
  int stage = 0;
  std::string action;
  std::size_t z = 0;
  double objective = 0.0;
  std::vector<double> levels;
  std::vector<std::int64_t> populations;
};

struct SlaTrace {
  std::vector<SlaRound> rounds;
  void write_csv(std::ostream& out) const;
};

struct SlaResult {
  Vector x_hat;
  AdaptiveAlphabet alphabet;
  double objective = 0.0;
  std::size_t total_super_iterations = 0;
  SlaTrace trace;
};

SlaResult sla_mcmc(const Matrix& phi, const Vector& y, double sigma_z_sq,
                   const SlaConfig& cfg, Rng rng,
                   std::ostream* energy_trace = nullptr);

// Entrywise mean of independently seeded outputs.
Vector mix_seeds(const std::vector<Vector>& outputs);

// ---- alphabet adaptation procedures (levels sorted ascending) ----

// relabel[old_symbol] = new_symbol
using Relabel = std::vector<Symbol>;
void apply_relabel(SymbolSeq& u, const Relabel& relabel);

struct MergePlan {
  Vector levels;    // after the merge (still sorted)
  Relabel relabel;
  std::size_t pair_lo = 0;  // lower index of the merged pair
};

// Replace the two closest adjacent levels by their midpoint; leftmost pair on
// ties. Requires >= 2 levels.
MergePlan merge_closest(const Vector& levels);

struct AddOutPlan {
  Vector levels;
  Relabel relabel;                     // shift caused by a lower insertion
  std::vector<std::size_t> added;      // new symbol ids (unpopulated)
};

// Empty outside level(s) at min - step and/or max + step,
// step = (max - min) / (|Z| - 1). Requires >= 2 levels.
AddOutPlan add_out(const Vector& levels, bool lower, bool upper);

struct AddInPlan {
  std::size_t lo = 0, hi = 0;  // widest adjacent pair
  double new_level = 0.0;      // midpoint
};

AddInPlan widest_gap_midpoint(const Vector& levels);

// Insert the midpoint of the widest gap and probabilistically move entries
// sitting at either endpoint onto it: an entry at lo moves with probability
// w(hi) / (w(lo) + w(hi)) under the single-site Boltzmann weights at
// inverse temperature s (and symmetrically for hi). energy(i, sym) returns
// the single-site candidate energy at position i.
struct AddInOutcome {
  Vector levels;
  Relabel relabel;
  std::size_t new_symbol = 0;
  std::size_t flipped = 0;
};

AddInOutcome add_in(const SymbolSeq& u, SymbolSeq& u_out, const Vector& levels,
                    double s,
                    const std::function<double(std::size_t, Symbol)>& energy,
                    Rng& rng);

// ---- stage-transition criteria ----

// D1: strict objective improvement.
inline bool criterion_d1(double prev_obj, double curr_obj) {
  return curr_obj < prev_obj;
}

struct D2Sides {
  bool lower = false;
  bool upper = false;
  bool any() const { return lower || upper; }
};

// D2: extreme levels with population strictly below N / (K2 |Z|).
D2Sides criterion_d2(const AdaptiveAlphabet& alphabet, std::size_t n, double k2);

// D3 is violated (stop adding outside) when every added level stayed empty.
bool criterion_d3(const std::vector<std::size_t>& added_symbols,
                  const std::vector<std::int64_t>& populations);

}  // namespace ucs
