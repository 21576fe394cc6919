#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace ucs {

using Symbol = std::uint8_t;
using SymbolSeq = std::vector<Symbol>;

struct ContextModel {
  unsigned q = 0;              // context depth
  unsigned alphabet_size = 1;  // |Z|
};

// Order-q empirical symbol counts over a sequence, with the conditional
// empirical entropy (bits per symbol) maintained incrementally. A single
// substitution touches only the contexts in a +/-q window around the edited
// position, so updates cost O(q |Z|) instead of a full recount.
//
// Contexts are packed 8 bits per symbol into a 64-bit key, which caps the
// depth at 8 and the alphabet at 256 symbols.
class ContextCounts {
 public:
  ContextCounts() = default;

  // Exact counts and entropy for u; requires length(u) > q.
  static ContextCounts build(const SymbolSeq& u, ContextModel model);

  // H_q(u) in bits per symbol.
  double entropy() const { return (ell_sum_ - ell_comp_) / static_cast<double>(n_); }

  // Entropy change if u[pos] were replaced by new_sym; does not mutate.
  double delta_entropy(const SymbolSeq& u, std::size_t pos, Symbol new_sym) const;

  // Applies the substitution to both the table and u.
  void commit_symbol(SymbolSeq& u, std::size_t pos, Symbol new_sym);

  // Counts for the relabeled sequence, produced by transforming the table
  // (no rescan of u). relabel must cover every old symbol; merged symbols
  // are allowed. The caller applies the same relabeling to u separately.
  ContextCounts remapped(const std::vector<Symbol>& relabel,
                         unsigned new_alphabet_size) const;

  const ContextModel& model() const { return model_; }
  std::size_t sequence_length() const { return n_; }
  std::size_t context_rows() const { return table_.size(); }
  std::int64_t total_count() const;

 private:
  struct Row {
    std::vector<std::int32_t> counts;
    std::int64_t total = 0;
    double ell = 0.0;  // total*log2(total) - sum_b counts[b]*log2(counts[b])
  };

  struct Event {  // one counted (context, symbol) slot gaining or losing 1
    std::uint64_t key;
    Symbol sym;
    std::int32_t delta;
  };

  ContextModel model_;
  std::size_t n_ = 0;
  std::unordered_map<std::uint64_t, Row> table_;
  double ell_sum_ = 0.0;   // Kahan-compensated sum of per-row ell values
  double ell_comp_ = 0.0;
  // reusable workspaces; instances are single-writer (one chain each)
  mutable std::vector<Event> events_;
  mutable std::vector<std::int32_t> scratch_counts_;

  std::uint64_t context_key(const SymbolSeq& u, std::size_t pos) const;
  std::uint64_t context_key_edited(const SymbolSeq& u, std::size_t pos,
                                   std::size_t edit_pos, Symbol edit_sym) const;
  void collect_events(const SymbolSeq& u, std::size_t pos, Symbol new_sym,
                      std::vector<Event>& events) const;
  void add_ell(double delta);

  static double row_ell(const std::vector<std::int32_t>& counts,
                        std::int64_t total);
};

// n * log2(n), with 0 log 0 = 0.
double xlog2(std::int64_t n);

}  // namespace ucs
