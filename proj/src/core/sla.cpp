#include "core/sla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ucs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SlaConfig::validate() const {
  if (r1 < 1 || r2 < 1 || r3 < 1 || r4a < 1 || r4b < 1)
    throw std::invalid_argument("stage budgets must be >= 1");
  if (z_init < 2) throw std::invalid_argument("initial alphabet size must be >= 2");
  if (max_total < 1) throw std::invalid_argument("total budget must be >= 1");
  if (!(c > 1.0)) throw std::invalid_argument("temperature constant must be > 1");
  if (k1 <= 0.0 || k2 <= 0.0)
    throw std::invalid_argument("K1 and K2 must be positive");
}

void SlaTrace::write_csv(std::ostream& out) const {
  out << "round,stage,action,z,objective,levels,populations\n";
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const SlaRound& r = rounds[i];
    out << i << ',' << r.stage << ',' << r.action << ',' << r.z << ','
        << r.objective << ',';
    for (std::size_t j = 0; j < r.levels.size(); ++j)
      out << (j ? ";" : "") << r.levels[j];
    out << ',';
    for (std::size_t j = 0; j < r.populations.size(); ++j)
      out << (j ? ";" : "") << r.populations[j];
    out << '\n';
  }
}

void apply_relabel(SymbolSeq& u, const Relabel& relabel) {
  for (Symbol& s : u) {
    if (s >= relabel.size())
      throw std::invalid_argument("relabeling does not cover the alphabet");
    s = relabel[s];
  }
}

MergePlan merge_closest(const Vector& levels) {
  const Eigen::Index z = levels.size();
  if (z < 2) throw std::invalid_argument("merge needs >= 2 levels");
  Eigen::Index lo = 0;
  double best = kInf;
  for (Eigen::Index i = 0; i + 1 < z; ++i) {
    double gap = levels[i + 1] - levels[i];
    if (gap < best) {  // strict: leftmost pair wins ties
      best = gap;
      lo = i;
    }
  }
  MergePlan plan;
  plan.pair_lo = static_cast<std::size_t>(lo);
  plan.levels.resize(z - 1);
  plan.relabel.resize(static_cast<std::size_t>(z));
  for (Eigen::Index i = 0; i < z; ++i) {
    if (i < lo) {
      plan.levels[i] = levels[i];
      plan.relabel[static_cast<std::size_t>(i)] = static_cast<Symbol>(i);
    } else if (i == lo || i == lo + 1) {
      plan.levels[lo] = 0.5 * (levels[lo] + levels[lo + 1]);
      plan.relabel[static_cast<std::size_t>(i)] = static_cast<Symbol>(lo);
    } else {
      plan.levels[i - 1] = levels[i];
      plan.relabel[static_cast<std::size_t>(i)] = static_cast<Symbol>(i - 1);
    }
  }
  return plan;
}

AddOutPlan add_out(const Vector& levels, bool lower, bool upper) {
  const Eigen::Index z = levels.size();
  if (z < 2) throw std::invalid_argument("add_out needs >= 2 levels");
  const double step =
      (levels[z - 1] - levels[0]) / static_cast<double>(z - 1);
  AddOutPlan plan;
  const Eigen::Index extra = (lower ? 1 : 0) + (upper ? 1 : 0);
  plan.levels.resize(z + extra);
  const Eigen::Index shift = lower ? 1 : 0;
  if (lower) {
    plan.levels[0] = levels[0] - step;
    plan.added.push_back(0);
  }
  for (Eigen::Index i = 0; i < z; ++i) plan.levels[i + shift] = levels[i];
  if (upper) {
    plan.levels[z + shift] = levels[z - 1] + step;
    plan.added.push_back(static_cast<std::size_t>(z + shift));
  }
  plan.relabel.resize(static_cast<std::size_t>(z));
  for (Eigen::Index i = 0; i < z; ++i)
    plan.relabel[static_cast<std::size_t>(i)] = static_cast<Symbol>(i + shift);
  return plan;
}

AddInPlan widest_gap_midpoint(const Vector& levels) {
  const Eigen::Index z = levels.size();
  if (z < 2) throw std::invalid_argument("add_in needs >= 2 levels");
  AddInPlan plan;
  double best = -kInf;
  for (Eigen::Index i = 0; i + 1 < z; ++i) {
    double gap = levels[i + 1] - levels[i];
    if (gap > best) {
      best = gap;
      plan.lo = static_cast<std::size_t>(i);
    }
  }
  plan.hi = plan.lo + 1;
  plan.new_level = 0.5 * (levels[static_cast<Eigen::Index>(plan.lo)] +
                          levels[static_cast<Eigen::Index>(plan.hi)]);
  return plan;
}

AddInOutcome add_in(const SymbolSeq& u, SymbolSeq& u_out, const Vector& levels,
                    double s,
                    const std::function<double(std::size_t, Symbol)>& energy,
                    Rng& rng) {
  const AddInPlan plan = widest_gap_midpoint(levels);
  const Eigen::Index z = levels.size();

  AddInOutcome out;
  out.levels.resize(z + 1);
  const std::size_t insert_at = plan.hi;  // midpoint sits between lo and hi
  for (Eigen::Index i = 0; i < z + 1; ++i) {
    if (static_cast<std::size_t>(i) < insert_at)
      out.levels[i] = levels[i];
    else if (static_cast<std::size_t>(i) == insert_at)
      out.levels[i] = plan.new_level;
    else
      out.levels[i] = levels[i - 1];
  }
  out.relabel.resize(static_cast<std::size_t>(z));
  for (Eigen::Index i = 0; i < z; ++i)
    out.relabel[static_cast<std::size_t>(i)] = static_cast<Symbol>(
        static_cast<std::size_t>(i) < insert_at ? i : i + 1);
  out.new_symbol = insert_at;

  const Symbol lo_sym = static_cast<Symbol>(plan.lo);
  const Symbol hi_sym = static_cast<Symbol>(plan.hi);

  u_out = u;
  apply_relabel(u_out, out.relabel);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != lo_sym && u[i] != hi_sym) continue;
    const double e_lo = energy(i, lo_sym);
    const double e_hi = energy(i, hi_sym);
    double w_other;
    if (std::isinf(s)) {
      // zero-temperature limit: all mass on the lower-energy endpoint
      w_other = e_lo == e_hi ? 0.5 : ((u[i] == lo_sym) == (e_hi < e_lo) ? 1.0 : 0.0);
    } else {
      const double e_min = std::min(e_lo, e_hi);
      const double w_lo = std::exp(-s * (e_lo - e_min));
      const double w_hi = std::exp(-s * (e_hi - e_min));
      w_other = (u[i] == lo_sym ? w_hi : w_lo) / (w_lo + w_hi);
    }
    if (rng.uniform() < w_other) {
      u_out[i] = static_cast<Symbol>(out.new_symbol);
      ++out.flipped;
    }
  }
  return out;
}

D2Sides criterion_d2(const AdaptiveAlphabet& alphabet, std::size_t n,
                     double k2) {
  D2Sides sides;
  if (alphabet.size() == 0) return sides;
  const double threshold =
      static_cast<double>(n) / (k2 * static_cast<double>(alphabet.size()));
  sides.lower = static_cast<double>(alphabet.population.front()) < threshold;
  sides.upper = static_cast<double>(alphabet.population.back()) < threshold;
  return sides;
}

bool criterion_d3(const std::vector<std::size_t>& added_symbols,
                  const std::vector<std::int64_t>& populations) {
  if (added_symbols.empty()) return true;
  for (std::size_t s : added_symbols)
    if (populations.at(s) > 0) return false;
  return true;
}

Vector mix_seeds(const std::vector<Vector>& outputs) {
  if (outputs.empty()) throw std::invalid_argument("no outputs to mix");
  Vector mean = outputs.front();
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    if (outputs[i].size() != mean.size())
      throw std::invalid_argument("outputs have mismatched lengths");
    mean += outputs[i];
  }
  return mean / static_cast<double>(outputs.size());
}

namespace {

// Orchestrates the four stages around an LmcmcState, rebuilding the state
// whenever the alphabet changes and keeping levels sorted between rounds.
class SlaRun {
 public:
  SlaRun(const Matrix& phi, const Vector& y, double sigma_z_sq,
         const SlaConfig& cfg, Rng rng, std::ostream* energy_trace)
      : phi_(phi), y_(y), cfg_(cfg), energy_trace_(energy_trace) {
    cfg.validate();
    if (!(sigma_z_sq > 0.0) || !std::isfinite(sigma_z_sq))
      throw std::invalid_argument("SLA requires a positive finite noise variance");
    c4_ = std::log2(std::exp(1.0)) / (2.0 * sigma_z_sq);

    const Vector x_star = initial_point(phi, y);
    double lo = x_star.minCoeff();
    double hi = x_star.maxCoeff();
    if (!(hi > lo)) {  // degenerate initial point; widen artificially
      lo -= 0.5;
      hi += 0.5;
    }
    Vector levels(cfg.z_init);
    const double step = (hi - lo) / static_cast<double>(cfg.z_init - 1);
    for (unsigned i = 0; i < cfg.z_init; ++i)
      levels[i] = lo + step * static_cast<double>(i);
    SymbolSeq u = quantize_to_alphabet(x_star, levels);

    AnnealingSchedule sched = make_calibrated_schedule(
        static_cast<std::size_t>(phi.cols()), cfg.c, cfg.max_total, 0,
        gap_energy_scale(phi, c4_, step), cfg.sharpness);
    state_.emplace(phi, y, c4_, std::move(u), std::move(levels), cfg.q, sched,
                   rng, cfg.ridge_scale);
  }

  SlaResult run() {
    stage1();
    if (!exhausted_) stage2();
    if (!exhausted_) stage3();
    if (!exhausted_) stage4a();
    if (!exhausted_) stage4b();

    SlaResult result;
    result.trace = std::move(trace_);
    result.total_super_iterations = used_;
    if (exhausted_ && best_obj_ < objective()) {
      result.x_hat = best_x_;
      result.alphabet = best_alphabet_;
      result.objective = best_obj_;
    } else {
      result.x_hat = state_->mapped_signal();
      result.alphabet = state_->alphabet();
      result.objective = objective();
    }
    return result;
  }

 private:
  const Matrix& phi_;
  const Vector& y_;
  const SlaConfig& cfg_;
  std::ostream* energy_trace_;
  double c4_ = 0.0;
  std::optional<LmcmcState> state_;
  SlaTrace trace_;
  std::size_t used_ = 0;
  bool exhausted_ = false;
  double best_obj_ = kInf;
  Vector best_x_;
  AdaptiveAlphabet best_alphabet_;

  double objective() const { return state_->energy_recomputed(); }

  // Runs L-MCMC for at most `budget` super-iterations within the global cap.
  // Returns the number actually run (0 once the budget is exhausted).
  std::size_t run_l(std::size_t budget) {
    const std::size_t room = cfg_.max_total > used_ ? cfg_.max_total - used_ : 0;
    const std::size_t r = std::min(budget, room);
    if (r == 0) {
      exhausted_ = true;
      return 0;
    }
    state_->run(r, energy_trace_);
    used_ += r;
    if (used_ >= cfg_.max_total) exhausted_ = true;
    return r;
  }

  void record(int stage, const std::string& action) {
    const AdaptiveAlphabet a = state_->alphabet();
    const double obj = objective();
    SlaRound round;
    round.stage = stage;
    round.action = action;
    round.z = a.size();
    round.objective = obj;
    round.levels.assign(a.levels.data(), a.levels.data() + a.levels.size());
    round.populations = a.population;
    trace_.rounds.push_back(std::move(round));
    if (obj < best_obj_) {
      best_obj_ = obj;
      best_x_ = state_->mapped_signal();
      best_alphabet_ = a;
    }
  }

  // Rebuild the sampler state after an alphabet change, keeping the schedule
  // offset and the random stream.
  void rebuild_state(SymbolSeq u, Vector levels) {
    AnnealingSchedule sched = state_->schedule();
    Rng rng = state_->rng();
    state_.emplace(phi_, y_, c4_, std::move(u), std::move(levels), cfg_.q,
                   sched, rng, cfg_.ridge_scale);
  }

  // Sort levels ascending and relabel the sequence accordingly.
  void normalize() {
    const Vector& lv = state_->levels();
    const Eigen::Index z = lv.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(z));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return lv[a] < lv[b]; });
    bool sorted = true;
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] != static_cast<Eigen::Index>(i)) sorted = false;
    if (sorted) return;

    Vector new_levels(z);
    Relabel relabel(static_cast<std::size_t>(z));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      new_levels[static_cast<Eigen::Index>(pos)] = lv[order[pos]];
      relabel[static_cast<std::size_t>(order[pos])] = static_cast<Symbol>(pos);
    }
    SymbolSeq u = state_->sequence();
    apply_relabel(u, relabel);
    rebuild_state(std::move(u), std::move(new_levels));
  }

  void stage1() {
    record(1, "init");
    run_l(cfg_.r1);
    normalize();
    record(1, "lmcmc");
  }

  void stage2() {
    // merge adjacent levels closer than I_R / (K1 (|Z| - 1)), re-deriving the
    // threshold after every merge
    std::size_t merges = 0;
    while (state_->levels().size() > 2) {
      const Vector& lv = state_->levels();
      const double range = lv[lv.size() - 1] - lv[0];
      const double threshold =
          range / (cfg_.k1 * static_cast<double>(lv.size() - 1));
      MergePlan plan = merge_closest(lv);
      const double gap = lv[static_cast<Eigen::Index>(plan.pair_lo) + 1] -
                         lv[static_cast<Eigen::Index>(plan.pair_lo)];
      if (!(gap < threshold)) break;
      SymbolSeq u = state_->sequence();
      apply_relabel(u, plan.relabel);
      rebuild_state(std::move(u), std::move(plan.levels));
      ++merges;
    }
    if (merges > 0) record(2, "merge_close");
    run_l(cfg_.r2);
    normalize();
    record(2, "lmcmc");
  }

  void stage3() {
    double prev_obj = objective();
    while (state_->levels().size() > 2) {
      LmcmcState snapshot = *state_;
      MergePlan plan = merge_closest(state_->levels());
      SymbolSeq u = state_->sequence();
      apply_relabel(u, plan.relabel);
      rebuild_state(std::move(u), std::move(plan.levels));
      if (run_l(cfg_.r3) == 0) return;
      normalize();
      record(3, "merge");
      const double obj = objective();
      if (criterion_d1(prev_obj, obj)) {
        prev_obj = obj;
      } else {
        Rng continuation = state_->rng();
        state_ = std::move(snapshot);
        state_->rng() = continuation;
        record(3, "revert");
        break;
      }
    }
  }

  void stage4a() {
    while (true) {
      const D2Sides sides =
          criterion_d2(state_->alphabet(), state_->sequence().size(), cfg_.k2);
      if (!sides.any()) break;
      AddOutPlan plan = add_out(state_->levels(), sides.lower, sides.upper);
      SymbolSeq u = state_->sequence();
      apply_relabel(u, plan.relabel);
      rebuild_state(std::move(u), std::move(plan.levels));
      if (run_l(cfg_.r4a) == 0) return;

      const std::vector<std::int64_t> pops = state_->alphabet().population;
      const bool stop = criterion_d3(plan.added, pops);
      // drop the added levels that stayed empty
      std::vector<bool> keep(static_cast<std::size_t>(state_->levels().size()),
                             true);
      for (std::size_t s : plan.added)
        if (pops[s] == 0) keep[s] = false;
      prune(keep);
      normalize();
      record(4, stop ? "add_out_unpopulated" : "add_out");
      if (stop) break;
    }
  }

  void stage4b() {
    double prev_obj = objective();
    while (true) {
      if (state_->levels().size() < 2) break;
      LmcmcState snapshot = *state_;
      const double s_now = state_->schedule().s(1);  // next super-iteration's s
      // single-site fixed-map energies for the flip probabilities
      const Vector mapped = state_->mapped_signal();
      const Vector e = y_ - phi_ * mapped;
      const Vector col_sq = phi_.colwise().squaredNorm();
      const double n_real = static_cast<double>(state_->sequence().size());
      const SymbolSeq& u_cur = state_->sequence();
      const Vector& lv = state_->levels();
      const ContextCounts& counts = state_->counts();
      auto energy = [&](std::size_t i, Symbol sym) {
        const double dh =
            sym == u_cur[i] ? 0.0 : counts.delta_entropy(u_cur, i, sym);
        const double delta = lv[sym] - lv[u_cur[i]];
        const double dd =
            -2.0 * delta * phi_.col(static_cast<Eigen::Index>(i)).dot(e) +
            delta * delta * col_sq[static_cast<Eigen::Index>(i)];
        return n_real * dh + c4_ * dd;
      };
      SymbolSeq u_new;
      AddInOutcome outcome =
          add_in(u_cur, u_new, lv, s_now, energy, state_->rng());
      rebuild_state(std::move(u_new), std::move(outcome.levels));
      if (run_l(cfg_.r4b) == 0) return;
      normalize();
      record(4, "add_in");
      const double obj = objective();
      if (criterion_d1(prev_obj, obj)) {
        prev_obj = obj;
      } else {
        Rng continuation = state_->rng();
        state_ = std::move(snapshot);
        state_->rng() = continuation;
        record(4, "revert");
        break;
      }
    }
  }

  void prune(const std::vector<bool>& keep) {
    const Vector& lv = state_->levels();
    std::size_t kept = 0;
    for (bool k : keep) kept += k ? 1 : 0;
    if (kept == keep.size()) return;
    Vector levels(static_cast<Eigen::Index>(kept));
    Relabel relabel(keep.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) {
        levels[static_cast<Eigen::Index>(next)] = lv[static_cast<Eigen::Index>(i)];
        relabel[i] = static_cast<Symbol>(next++);
      } else {
        relabel[i] = 0;  // unused: pruned levels are unpopulated
      }
    }
    SymbolSeq u = state_->sequence();
    apply_relabel(u, relabel);
    rebuild_state(std::move(u), std::move(levels));
  }
};

}  // namespace

SlaResult sla_mcmc(const Matrix& phi, const Vector& y, double sigma_z_sq,
                   const SlaConfig& cfg, Rng rng, std::ostream* energy_trace) {
  SlaRun run(phi, y, sigma_z_sq, cfg, rng, energy_trace);
  return run.run();
}

}  // namespace ucs
