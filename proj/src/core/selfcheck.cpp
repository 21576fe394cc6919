#include "core/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "core/annealing.hpp"
#include "core/entropy.hpp"
#include "core/levels.hpp"
#include "core/samplers.hpp"

namespace ucs {

namespace {

SymbolSeq random_sequence(std::size_t n, unsigned z, Rng& rng) {
  SymbolSeq u(n);
  for (Symbol& s : u) s = static_cast<Symbol>(rng.below(z));
  return u;
}

bool entropy_suite(std::ostream& out) {
  Rng rng(0xE17);
  double worst = 0.0;
  for (unsigned q = 0; q <= 3; ++q) {
    for (unsigned z = 2; z <= 8; z += 3) {
      SymbolSeq u = random_sequence(500, z, rng);
      ContextCounts counts = ContextCounts::build(u, {q, z});
      for (int rep = 0; rep < 250; ++rep) {
        const std::size_t pos = static_cast<std::size_t>(rng.below(u.size()));
        const Symbol sym = static_cast<Symbol>(rng.below(z));
        SymbolSeq edited = u;
        edited[pos] = sym;
        const double expect = ContextCounts::build(edited, {q, z}).entropy() -
                              ContextCounts::build(u, {q, z}).entropy();
        const double got = counts.delta_entropy(u, pos, sym);
        worst = std::max(worst, std::abs(got - expect));
        counts.commit_symbol(u, pos, sym);
        worst = std::max(worst,
                         std::abs(counts.entropy() -
                                  ContextCounts::build(u, {q, z}).entropy()));
      }
    }
  }
  const bool ok = worst <= 1e-12;
  out << (ok ? "PASS" : "FAIL")
      << " entropy incremental vs recount (max abs err " << worst << ")\n";
  return ok;
}

bool solver_suite(std::ostream& out) {
  Rng rng(0x50F);
  double worst_solve = 0.0;
  double worst_resid = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t m = 20 + rng.below(60);
    const std::size_t n = m + rng.below(80);
    const unsigned z = 2 + static_cast<unsigned>(rng.below(5));
    Matrix phi(m, n);
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      phi.data()[j] = rng.normal() / std::sqrt(static_cast<double>(m));
    Vector y(m);
    for (Eigen::Index j = 0; j < y.size(); ++j) y[j] = rng.normal();
    SymbolSeq u(n);
    for (std::size_t i = 0; i < n; ++i)
      u[i] = static_cast<Symbol>(i < z ? i : rng.below(z));  // all populated

    LevelSolver solver(phi, y, u, z);
    solver.ridge_scale = 0.0;
    const Vector prev = Vector::Zero(z);
    auto solved = solver.solve(prev);
    if (!solved) {
      out << "FAIL level solver: solve failed\n";
      return false;
    }

    // oracle: explicit M x |Z| design matrix, independent decomposition
    Matrix design = Matrix::Zero(m, z);
    for (std::size_t i = 0; i < n; ++i)
      design.col(u[i]) += phi.col(static_cast<Eigen::Index>(i));
    Vector expect = design.colPivHouseholderQr().solve(y);
    worst_solve = std::max(worst_solve,
                           (*solved - expect).norm() / std::max(1.0, expect.norm()));

    Vector mapped(n);
    for (std::size_t i = 0; i < n; ++i) mapped[static_cast<Eigen::Index>(i)] = (*solved)[u[i]];
    const double direct = (y - phi * mapped).squaredNorm();
    const double fast = solver.fast_residual(*solved);
    worst_resid = std::max(worst_resid,
                           std::abs(fast - direct) / std::max(1.0, direct));
  }
  const bool ok = worst_solve <= 1e-8 && worst_resid <= 1e-8;
  out << (ok ? "PASS" : "FAIL") << " level solver vs design-matrix oracle (solve "
      << worst_solve << ", residual " << worst_resid << ")\n";
  return ok;
}

// Exact worst-case single-site energy change by enumeration.
double exact_delta_q(const Matrix& phi, const Vector& y, const Vector& levels,
                     double c4, unsigned q) {
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  const unsigned z = static_cast<unsigned>(levels.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= z;

  double worst = 0.0;
  SymbolSeq w(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rem = code;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = static_cast<Symbol>(rem % z);
      rem /= z;
    }
    auto energy = [&](const SymbolSeq& seq) {
      Vector mapped(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        mapped[static_cast<Eigen::Index>(i)] = levels[seq[i]];
      return static_cast<double>(n) *
                 ContextCounts::build(seq, {q, z}).entropy() +
             c4 * (y - phi * mapped).squaredNorm();
    };
    const double base = energy(w);
    for (std::size_t pos = 0; pos < n; ++pos) {
      SymbolSeq edited = w;
      for (unsigned b = 0; b < z; ++b) {
        if (b == w[pos]) continue;
        edited[pos] = static_cast<Symbol>(b);
        worst = std::max(worst, std::abs(energy(edited) - base));
        edited[pos] = w[pos];
      }
    }
  }
  return worst;
}

bool delta_q_suite(std::ostream& out) {
  Rng rng(0xD9);
  bool ok = true;
  for (int rep = 0; rep < 3; ++rep) {
    const std::size_t n = 4, m = 4;
    Matrix phi(m, n);
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      phi.data()[j] = rng.normal() / std::sqrt(static_cast<double>(m));
    Vector y(m);
    for (Eigen::Index j = 0; j < y.size(); ++j) y[j] = rng.normal();
    Vector levels(2);
    levels << 0.0, 1.0;
    const double c4 = 10.0;
    const unsigned q = 1;
    const double exact = exact_delta_q(phi, y, levels, c4, q);
    const double bound = estimate_delta_q(phi, y, 0.0, 1.0, c4, q);
    if (bound < exact) {
      out << "FAIL energy-span bound " << bound << " below exact " << exact << "\n";
      ok = false;
    }
  }
  if (ok) out << "PASS energy-span bound covers enumerated worst case\n";
  return ok;
}

bool boltzmann_suite(std::ostream& out) {
  Vector e(3);
  e << 1.0, 2.5, 4.0;
  bool ok = true;
  const Vector base = boltzmann_weights(e, 0.7);
  const Vector shifted = boltzmann_weights(Vector(e.array() + 123.0), 0.7);
  ok = ok && (base - shifted).cwiseAbs().maxCoeff() <= 1e-12;
  // probability ratios square when s doubles
  const Vector twice = boltzmann_weights(e, 1.4);
  const double r1 = base[0] / base[2];
  const double r2 = twice[0] / twice[2];
  ok = ok && std::abs(r2 - r1 * r1) <= 1e-10 * r1 * r1;
  AnnealingSchedule sched{2.0, 0, 3.0, 16};
  ok = ok && sched.s(1) == 0.0;
  for (std::size_t t = 1; t < 64; ++t) ok = ok && sched.s(t + 1) >= sched.s(t);
  out << (ok ? "PASS" : "FAIL") << " Boltzmann/schedule identities\n";
  return ok;
}

bool tiny_anneal_suite(std::ostream& out) {
  Rng rng(0xB3C);
  const std::size_t n = 6, m = 6;
  Matrix phi(m, n);
  for (Eigen::Index j = 0; j < phi.size(); ++j)
    phi.data()[j] = rng.normal() / std::sqrt(static_cast<double>(m));
  Vector x(n);
  x << 1, 0, 0, 1, 0, 0;
  Vector y = phi * x;
  const double sigma_sq = 0.01;

  FixedAlphabet alphabet = FixedAlphabet::from_levels({0.0, 1.0});
  const double c4 = std::log2(std::exp(1.0)) / (2.0 * sigma_sq);

  // enumerate all |Z|^N sequences for the minimum energy
  double min_energy = std::numeric_limits<double>::infinity();
  SymbolSeq w(n);
  const std::size_t total = 1u << n;
  for (std::size_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i) w[i] = (code >> i) & 1u;
    Vector mapped(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      mapped[static_cast<Eigen::Index>(i)] = alphabet.levels[w[i]];
    const double energy =
        static_cast<double>(n) * ContextCounts::build(w, {1, 2}).entropy() +
        c4 * (y - phi * mapped).squaredNorm();
    min_energy = std::min(min_energy, energy);
  }

  BmcmcOptions opt;
  opt.super_iterations = 500;
  opt.q = 1;
  int hits = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng chain(derive_seed(7, static_cast<std::uint64_t>(trial)));
    BmcmcResult res = b_mcmc(phi, y, alphabet, sigma_sq, opt, chain);
    if (res.best_energy <= min_energy + 1e-9) ++hits;
  }
  const bool ok = hits >= 9;
  out << (ok ? "PASS" : "FAIL") << " tiny annealing reaches enumerated minimum ("
      << hits << "/10 trials)\n";
  return ok;
}

}  // namespace

bool run_oracle_suites(std::ostream& out) {
  bool ok = true;
  ok = entropy_suite(out) && ok;
  ok = solver_suite(out) && ok;
  ok = delta_q_suite(out) && ok;
  ok = boltzmann_suite(out) && ok;
  ok = tiny_anneal_suite(out) && ok;
  out << (ok ? "all oracle suites passed\n" : "oracle suite FAILURES\n");
  return ok;
}

}  // namespace ucs
