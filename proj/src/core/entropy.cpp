#include "core/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ucs {

namespace {
constexpr unsigned kMaxDepth = 8;
constexpr std::size_t kXlogTableSize = 1 << 14;

const double* xlog2_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kXlogTableSize, 0.0);
    for (std::size_t i = 2; i < kXlogTableSize; ++i)
      t[i] = static_cast<double>(i) * std::log2(static_cast<double>(i));
    return t;
  }();
  return table.data();
}
}  // namespace

double xlog2(std::int64_t n) {
  if (n <= 1) return 0.0;
  if (n < static_cast<std::int64_t>(kXlogTableSize))
    return xlog2_table()[static_cast<std::size_t>(n)];
  return static_cast<double>(n) * std::log2(static_cast<double>(n));
}

double ContextCounts::row_ell(const std::vector<std::int32_t>& counts,
                              std::int64_t total) {
  double sum = 0.0;
  for (std::int32_t c : counts) sum += xlog2(c);
  return xlog2(total) - sum;
}

void ContextCounts::add_ell(double delta) {
  // Kahan step; keeps the cached entropy within rebuild tolerance over long runs.
  double y = delta - ell_comp_;
  double t = ell_sum_ + y;
  ell_comp_ = (t - ell_sum_) - y;
  ell_sum_ = t;
}

std::uint64_t ContextCounts::context_key(const SymbolSeq& u,
                                         std::size_t pos) const {
  std::uint64_t key = 0;
  for (unsigned j = 1; j <= model_.q; ++j)
    key |= static_cast<std::uint64_t>(u[pos - j]) << (8 * (j - 1));
  return key;
}

std::uint64_t ContextCounts::context_key_edited(const SymbolSeq& u,
                                                std::size_t pos,
                                                std::size_t edit_pos,
                                                Symbol edit_sym) const {
  std::uint64_t key = 0;
  for (unsigned j = 1; j <= model_.q; ++j) {
    std::size_t idx = pos - j;
    Symbol s = (idx == edit_pos) ? edit_sym : u[idx];
    key |= static_cast<std::uint64_t>(s) << (8 * (j - 1));
  }
  return key;
}

ContextCounts ContextCounts::build(const SymbolSeq& u, ContextModel model) {
  if (model.alphabet_size < 1 || model.alphabet_size > 256)
    throw std::invalid_argument("alphabet size must be in [1, 256]");
  if (model.q > kMaxDepth)
    throw std::invalid_argument("context depth larger than 8 is not supported");
  if (u.size() <= model.q)
    throw std::invalid_argument("sequence must be longer than the context depth");
  for (Symbol s : u)
    if (s >= model.alphabet_size)
      throw std::invalid_argument("symbol outside the alphabet");

  ContextCounts cc;
  cc.model_ = model;
  cc.n_ = u.size();
  for (std::size_t i = model.q; i < u.size(); ++i) {
    Row& row = cc.table_[cc.context_key(u, i)];
    if (row.counts.empty()) row.counts.assign(model.alphabet_size, 0);
    ++row.counts[u[i]];
    ++row.total;
  }
  for (auto& [key, row] : cc.table_) {
    row.ell = row_ell(row.counts, row.total);
    cc.add_ell(row.ell);
  }
  return cc;
}

void ContextCounts::collect_events(const SymbolSeq& u, std::size_t pos,
                                   Symbol new_sym,
                                   std::vector<Event>& events) const {
  events.clear();
  const std::size_t n = u.size();
  const unsigned q = model_.q;
  // Positions whose counted (context, symbol) pair involves u[pos]: pos itself
  // (symbol slot) and the q successors (context slot). Positions before q have
  // no context and are never counted.
  const std::size_t lo = std::max<std::size_t>(pos, q);
  const std::size_t hi = std::min(pos + q, n - 1);
  for (std::size_t i = lo; i <= hi; ++i) {
    std::uint64_t old_key = context_key(u, i);
    std::uint64_t new_key =
        (i == pos) ? old_key : context_key_edited(u, i, pos, new_sym);
    Symbol old_s = u[i];
    Symbol new_s = (i == pos) ? new_sym : u[i];
    if (old_key == new_key && old_s == new_s) continue;
    events.push_back({old_key, old_s, -1});
    events.push_back({new_key, new_s, +1});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.key < b.key; });
}

double ContextCounts::delta_entropy(const SymbolSeq& u, std::size_t pos,
                                    Symbol new_sym) const {
  if (pos >= u.size()) throw std::invalid_argument("position out of range");
  if (new_sym >= model_.alphabet_size)
    throw std::invalid_argument("symbol outside the alphabet");
  if (u[pos] == new_sym) return 0.0;

  collect_events(u, pos, new_sym, events_);

  double delta = 0.0;
  std::size_t i = 0;
  while (i < events_.size()) {
    std::uint64_t key = events_[i].key;
    auto it = table_.find(key);
    std::int64_t total = 0;
    double old_ell = 0.0;
    if (it != table_.end()) {
      scratch_counts_ = it->second.counts;
      total = it->second.total;
      old_ell = it->second.ell;
    } else {
      scratch_counts_.assign(model_.alphabet_size, 0);
    }
    for (; i < events_.size() && events_[i].key == key; ++i) {
      scratch_counts_[events_[i].sym] += events_[i].delta;
      total += events_[i].delta;
    }
    delta += row_ell(scratch_counts_, total) - old_ell;
  }
  return delta / static_cast<double>(n_);
}

void ContextCounts::commit_symbol(SymbolSeq& u, std::size_t pos,
                                  Symbol new_sym) {
  if (pos >= u.size()) throw std::invalid_argument("position out of range");
  if (new_sym >= model_.alphabet_size)
    throw std::invalid_argument("symbol outside the alphabet");
  if (u[pos] == new_sym) return;

  collect_events(u, pos, new_sym, events_);

  std::size_t i = 0;
  while (i < events_.size()) {
    std::uint64_t key = events_[i].key;
    Row& row = table_[key];
    if (row.counts.empty()) row.counts.assign(model_.alphabet_size, 0);
    double old_ell = row.ell;
    for (; i < events_.size() && events_[i].key == key; ++i) {
      row.counts[events_[i].sym] += events_[i].delta;
      row.total += events_[i].delta;
    }
    if (row.total == 0) {
      table_.erase(key);
      add_ell(-old_ell);
    } else {
      row.ell = row_ell(row.counts, row.total);
      add_ell(row.ell - old_ell);
    }
  }
  u[pos] = new_sym;
}

ContextCounts ContextCounts::remapped(const std::vector<Symbol>& relabel,
                                      unsigned new_alphabet_size) const {
  if (relabel.size() < model_.alphabet_size)
    throw std::invalid_argument("relabeling must cover the whole alphabet");
  for (unsigned s = 0; s < model_.alphabet_size; ++s)
    if (relabel[s] >= new_alphabet_size)
      throw std::invalid_argument("relabeling target outside the new alphabet");

  ContextCounts out;
  out.model_ = {model_.q, new_alphabet_size};
  out.n_ = n_;
  for (const auto& [key, row] : table_) {
    std::uint64_t new_key = 0;
    for (unsigned j = 0; j < model_.q; ++j) {
      Symbol s = static_cast<Symbol>((key >> (8 * j)) & 0xFF);
      new_key |= static_cast<std::uint64_t>(relabel[s]) << (8 * j);
    }
    Row& dst = out.table_[new_key];
    if (dst.counts.empty()) dst.counts.assign(new_alphabet_size, 0);
    for (unsigned s = 0; s < model_.alphabet_size; ++s)
      dst.counts[relabel[s]] += row.counts[s];
    dst.total += row.total;
  }
  for (auto& [key, row] : out.table_) {
    row.ell = row_ell(row.counts, row.total);
    out.add_ell(row.ell);
  }
  return out;
}

std::int64_t ContextCounts::total_count() const {
  std::int64_t total = 0;
  for (const auto& [key, row] : table_) total += row.total;
  return total;
}

}  // namespace ucs
