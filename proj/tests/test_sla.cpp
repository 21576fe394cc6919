#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "core/sla.hpp"

using namespace ucs;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix random_operator(std::size_t m, std::size_t n, Rng& rng) {
  Matrix phi(m, n);
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    phi.data()[i] = rng.normal() / std::sqrt(static_cast<double>(m));
  return phi;
}

Vector levels_of(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("merge replaces the closest pair with its midpoint") {
  MergePlan plan = merge_closest(levels_of({0.0, 0.1, 1.0}));
  CHECK(plan.pair_lo == 0);
  CHECK(plan.levels.size() == 2);
  CHECK(plan.levels[0] == doctest::Approx(0.05));
  CHECK(plan.levels[1] == 1.0);
  CHECK(plan.relabel == Relabel{0, 0, 1});
}

TEST_CASE("equal gaps merge the leftmost pair") {
  MergePlan plan = merge_closest(levels_of({0.0, 1.0, 2.0}));
  CHECK(plan.pair_lo == 0);
  CHECK(plan.levels[0] == doctest::Approx(0.5));
  CHECK(plan.levels[1] == 2.0);
}

TEST_CASE("merge conserves populations through the relabeling") {
  MergePlan plan = merge_closest(levels_of({0.0, 0.2, 5.0}));
  SymbolSeq u = {0, 1, 1, 2, 0, 1};
  apply_relabel(u, plan.relabel);
  AdaptiveAlphabet a = AdaptiveAlphabet::from_sequence(plan.levels, u);
  CHECK(a.population[0] == 5);  // 2 + 3 from the merged pair
  CHECK(a.population[1] == 1);
}

TEST_CASE("merging a single level is refused") {
  CHECK_THROWS_AS(merge_closest(levels_of({1.0})), std::invalid_argument);
}

TEST_CASE("add_out extends both sides by the mean gap") {
  AddOutPlan plan = add_out(levels_of({0.0, 1.0}), true, true);
  REQUIRE(plan.levels.size() == 4);
  CHECK(plan.levels[0] == doctest::Approx(-1.0));
  CHECK(plan.levels[3] == doctest::Approx(2.0));
  CHECK(plan.added == std::vector<std::size_t>{0, 3});
  CHECK(plan.relabel == Relabel{1, 2});
}

TEST_CASE("add_out upper only") {
  AddOutPlan plan = add_out(levels_of({0.0, 0.5, 1.0}), false, true);
  REQUIRE(plan.levels.size() == 4);
  CHECK(plan.levels[3] == doctest::Approx(1.5));
  CHECK(plan.added == std::vector<std::size_t>{3});
  CHECK(plan.relabel == Relabel{0, 1, 2});
}

TEST_CASE("added outside levels start unpopulated") {
  AddOutPlan plan = add_out(levels_of({0.0, 1.0}), true, true);
  SymbolSeq u = {0, 1, 1, 0};
  apply_relabel(u, plan.relabel);
  AdaptiveAlphabet a = AdaptiveAlphabet::from_sequence(plan.levels, u);
  for (std::size_t s : plan.added) CHECK(a.population[s] == 0);
}

TEST_CASE("widest gap selection matches a linear scan") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int z = 2 + static_cast<int>(rng.below(6));
    Vector lv(z);
    lv[0] = rng.uniform();
    for (int i = 1; i < z; ++i) lv[i] = lv[i - 1] + 0.05 + rng.uniform();
    AddInPlan plan = widest_gap_midpoint(lv);
    double best = -kInf;
    std::size_t best_lo = 0;
    for (int i = 0; i + 1 < z; ++i)
      if (lv[i + 1] - lv[i] > best) {
        best = lv[i + 1] - lv[i];
        best_lo = static_cast<std::size_t>(i);
      }
    CHECK(plan.lo == best_lo);
    CHECK(plan.new_level ==
          doctest::Approx(0.5 * (lv[static_cast<Eigen::Index>(best_lo)] +
                                 lv[static_cast<Eigen::Index>(best_lo) + 1])));
  }
}

TEST_CASE("add_in at zero temperature with a dominant endpoint never flips") {
  SymbolSeq u = {0, 0, 1, 1, 0};
  SymbolSeq u_out;
  Rng rng(5);
  // current symbol always has strictly lower energy
  auto energy = [&](std::size_t i, Symbol sym) {
    return sym == u[i] ? 0.0 : 10.0;
  };
  AddInOutcome out = add_in(u, u_out, levels_of({0.0, 1.0}), kInf, energy, rng);
  CHECK(out.flipped == 0);
  CHECK(out.levels.size() == 3);
  CHECK(out.levels[1] == doctest::Approx(0.5));
  // entries keep their original endpoints through the relabeling
  CHECK(u_out == SymbolSeq{0, 0, 2, 2, 0});
}

TEST_CASE("add_in at infinite temperature flips about half the entries") {
  const std::size_t n = 4000;
  SymbolSeq u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<Symbol>(i % 2);
  SymbolSeq u_out;
  Rng rng(7);
  auto energy = [](std::size_t, Symbol) { return 1.0; };
  AddInOutcome out = add_in(u, u_out, levels_of({0.0, 1.0}), 0.0, energy, rng);
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(static_cast<double>(out.flipped) - n / 2.0) < 3.0 * sigma);
}

TEST_CASE("D1 requires strict improvement") {
  CHECK(criterion_d1(10.0, 9.0));
  CHECK_FALSE(criterion_d1(10.0, 10.0));
  CHECK_FALSE(criterion_d1(10.0, 11.0));
}

TEST_CASE("D2 flags sparse extreme levels, strictly") {
  AdaptiveAlphabet a;
  a.levels = levels_of({0.0, 0.5, 1.0});
  SUBCASE("both extremes populous") {
    a.population = {40, 20, 40};  // threshold: 300/(10*3) = 10
    D2Sides sides = criterion_d2(a, 300, 10.0);
    CHECK_FALSE(sides.any());
  }
  SUBCASE("empty upper extreme") {
    a.population = {60, 40, 0};
    D2Sides sides = criterion_d2(a, 100, 10.0);
    CHECK_FALSE(sides.lower);
    CHECK(sides.upper);
  }
  SUBCASE("population exactly at the threshold does not trigger") {
    a.population = {10, 280, 10};  // threshold exactly 10
    D2Sides sides = criterion_d2(a, 300, 10.0);
    CHECK_FALSE(sides.any());
  }
}

TEST_CASE("D3 stops only when every added level stayed empty") {
  CHECK_FALSE(criterion_d3({0, 3}, {0, 5, 5, 2}));  // one populated
  CHECK_FALSE(criterion_d3({0, 3}, {1, 5, 5, 2}));  // all populated
  CHECK(criterion_d3({0, 3}, {0, 5, 5, 0}));        // none populated
}

TEST_CASE("mixing averages the outputs") {
  Vector a = levels_of({1.0, 2.0, 3.0});
  Vector b = levels_of({-1.0, -2.0, -3.0});
  SUBCASE("single output is returned unchanged") {
    CHECK(mix_seeds({a}) == a);
  }
  SUBCASE("opposite vectors cancel") {
    CHECK(mix_seeds({a, b}).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(mix_seeds({}), std::invalid_argument);
  }
}

TEST_CASE("mixing never increases the mean squared error (convexity)") {
  Rng rng(11);
  Vector x(50);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  std::vector<Vector> outputs;
  for (int k = 0; k < 5; ++k) {
    Vector est = x;
    for (Eigen::Index i = 0; i < est.size(); ++i) est[i] += 0.3 * rng.normal();
    outputs.push_back(est);
  }
  const Vector mixed = mix_seeds(outputs);
  double mean_err = 0.0;
  for (const Vector& est : outputs) mean_err += (x - est).squaredNorm();
  mean_err /= static_cast<double>(outputs.size());
  CHECK((x - mixed).squaredNorm() <= mean_err + 1e-12);
}

TEST_CASE("sla on a two-valued source recovers a two-level alphabet") {
  Rng rng(13);
  const std::size_t n = 400, m = 200;
  SourceSpec src;
  src.kind = SourceKind::kBernoulli;
  src.p = 0.05;
  Rng srng(17);
  Vector x = generate_signal(src, n, srng);
  Rng mrng(19);
  MeasurementSystem ms = measure(x, m, 10.0, mrng);

  SlaConfig cfg;  // paper defaults
  SlaResult res = sla_mcmc(ms.phi, ms.y, ms.sigma_z_sq, cfg, Rng(21));

  CHECK(res.total_super_iterations <= cfg.max_total);
  CHECK(res.alphabet.size() >= 2);
  // levels sorted, populations consistent
  for (Eigen::Index i = 0; i + 1 < res.alphabet.levels.size(); ++i)
    CHECK(res.alphabet.levels[i] < res.alphabet.levels[i + 1]);
  std::int64_t total = 0;
  for (std::int64_t p : res.alphabet.population) total += p;
  CHECK(total == static_cast<std::int64_t>(n));
  // the estimate should beat the zero estimator comfortably
  CHECK((x - res.x_hat).squaredNorm() < 0.5 * x.squaredNorm());
}

TEST_CASE("sla trace rows are internally consistent") {
  Rng rng(23);
  const std::size_t n = 200, m = 120;
  Vector x(n);
  x.setZero();
  for (std::size_t i = 0; i < n; i += 9) x[static_cast<Eigen::Index>(i)] = 1.0;
  Rng mrng(29);
  MeasurementSystem ms = measure(x, m, 10.0, mrng);

  SlaConfig cfg;
  cfg.r1 = 20;
  cfg.max_total = 120;
  SlaResult res = sla_mcmc(ms.phi, ms.y, ms.sigma_z_sq, cfg, Rng(31));

  REQUIRE(!res.trace.rounds.empty());
  for (const SlaRound& round : res.trace.rounds) {
    CHECK(round.z == round.levels.size());
    CHECK(round.z == round.populations.size());
    CHECK(std::isfinite(round.objective));
    std::int64_t total = 0;
    for (std::int64_t p : round.populations) total += p;
    CHECK(total == static_cast<std::int64_t>(n));
    for (std::size_t i = 0; i + 1 < round.levels.size(); ++i)
      CHECK(round.levels[i] <= round.levels[i + 1]);
  }
  // |Z| changes by one per merge / add round
  for (std::size_t i = 1; i < res.trace.rounds.size(); ++i) {
    const SlaRound& prev = res.trace.rounds[i - 1];
    const SlaRound& cur = res.trace.rounds[i];
    if (cur.action == "merge")
      CHECK(cur.z == prev.z - 1);
    else if (cur.action == "add_in")
      CHECK(cur.z == prev.z + 1);
  }

  std::ostringstream csv;
  res.trace.write_csv(csv);
  CHECK(csv.str().rfind("round,stage,action,z,objective,levels,populations\n",
                        0) == 0);
}

TEST_CASE("sla is deterministic per seed") {
  Rng rng(37);
  const std::size_t n = 150, m = 90;
  Vector x(n);
  x.setZero();
  for (std::size_t i = 0; i < n; i += 11) x[static_cast<Eigen::Index>(i)] = 1.0;
  Rng mrng(41);
  MeasurementSystem ms = measure(x, m, 10.0, mrng);
  SlaConfig cfg;
  cfg.r1 = 15;
  cfg.max_total = 80;
  SlaResult a = sla_mcmc(ms.phi, ms.y, ms.sigma_z_sq, cfg, Rng(43));
  SlaResult b = sla_mcmc(ms.phi, ms.y, ms.sigma_z_sq, cfg, Rng(43));
  CHECK(a.x_hat == b.x_hat);
  CHECK(a.objective == b.objective);
  CHECK(a.trace.rounds.size() == b.trace.rounds.size());
}

TEST_CASE("config validation") {
  SlaConfig cfg;
  cfg.z_init = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SlaConfig{};
  cfg.r3 = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SlaConfig{};
  cfg.c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
