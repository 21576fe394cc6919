#include "core/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "core/sla.hpp"

namespace ucs {

double msdr_db(const Vector& x, const Vector& x_hat) {
  if (x.size() != x_hat.size())
    throw std::invalid_argument("estimate length does not match signal");
  const double n = static_cast<double>(x.size());
  const double signal_power = x.squaredNorm() / n;
  const double mse = (x - x_hat).squaredNorm() / n;
  if (mse <= 0.0)
    throw std::domain_error("zero-error estimate: MSDR is unbounded");
  return 10.0 * std::log10(signal_power / mse);
}

Vector baseline_least_squares(const Matrix& phi, const Vector& y) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("operator height does not match y");
  return phi.completeOrthogonalDecomposition().solve(y);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("UCS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

std::size_t mode_final_z(const std::vector<std::size_t>& zs) {
  std::map<std::size_t, std::size_t> freq;
  for (std::size_t z : zs) ++freq[z];
  std::size_t best = 0, best_count = 0;
  for (const auto& [z, count] : freq) {
    if (count > best_count) {  // map order makes ties resolve to the smaller z
      best = z;
      best_count = count;
    }
  }
  return best;
}

struct Task {
  std::size_t index;
  std::size_t m_idx, snr_idx, trial;
};

ResultRow run_task(const ExperimentSpec& spec, const Task& task,
                   const RunOptions& opt) {
  const std::size_t m = spec.m_grid[task.m_idx];
  const double snr_db = spec.snr_grid_db[task.snr_idx];

  ResultRow row;
  row.source = source_kind_name(spec.source.kind);
  row.n = spec.n;
  row.m = m;
  row.snr_db = snr_db;
  row.trial = task.trial;

  const auto start = std::chrono::steady_clock::now();
  try {
    const std::uint64_t task_seed =
        derive_seed(spec.master_seed, task.m_idx, task.snr_idx, task.trial);
    Rng signal_rng(derive_seed(task_seed, 1));
    const Vector x = generate_signal(spec.source, spec.n, signal_rng);

    Rng meas_rng(derive_seed(task_seed, 2));
    MeasurementSystem ms;
    if (spec.identity_phi) {
      const double mean_sq = x.squaredNorm() / static_cast<double>(x.size());
      if (mean_sq <= 0.0) throw std::invalid_argument("all-zero signal");
      const double sigma_sq =
          mean_sq / std::pow(10.0, snr_db / 10.0);  // N == M here
      ms = measure_with(Matrix::Identity(x.size(), x.size()), x, sigma_sq,
                        !spec.zero_noise, meas_rng);
    } else if (spec.zero_noise) {
      const double mean_sq = x.squaredNorm() / static_cast<double>(x.size());
      if (mean_sq <= 0.0) throw std::invalid_argument("all-zero signal");
      const double sigma_sq = static_cast<double>(spec.n) * mean_sq /
                              (static_cast<double>(m) *
                               std::pow(10.0, snr_db / 10.0));
      Matrix phi(m, spec.n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (Eigen::Index col = 0; col < phi.cols(); ++col)
        for (Eigen::Index r = 0; r < phi.rows(); ++r)
          phi(r, col) = scale * meas_rng.normal();
      ms = measure_with(std::move(phi), x, sigma_sq, false, meas_rng);
    } else {
      ms = measure(x, m, snr_db, meas_rng);
    }

    std::vector<Vector> outputs;
    std::vector<std::size_t> final_zs;
    std::size_t super_iterations = 0;
    for (std::size_t k = 0; k < spec.seeds_per_trial; ++k) {
      Rng chain_rng(derive_seed(task_seed, 3, k));
      std::ofstream trace_file;
      std::ofstream energy_file;
      std::ostream* energy_trace = nullptr;
      if (!opt.trace_dir.empty()) {
        const std::string stem = opt.trace_dir + "/m" + std::to_string(m) +
                                 "_snr" + format_double(snr_db) + "_trial" +
                                 std::to_string(task.trial) + "_seed" +
                                 std::to_string(k);
        energy_file.open(stem + "_energy.csv");
        energy_file << "t,s,h_q,resid,energy\n";
        energy_trace = &energy_file;
        trace_file.open(stem + "_rounds.csv");
      }
      SlaResult res =
          sla_mcmc(ms.phi, ms.y, ms.sigma_z_sq, spec.sla, chain_rng, energy_trace);
      if (trace_file.is_open()) res.trace.write_csv(trace_file);
      super_iterations += res.total_super_iterations;
      row.seed_mses.push_back((x - res.x_hat).squaredNorm() /
                              static_cast<double>(spec.n));
      final_zs.push_back(res.alphabet.size());
      outputs.push_back(std::move(res.x_hat));
    }
    const Vector x_avg = mix_seeds(outputs);
    row.mixed_mse = (x - x_avg).squaredNorm() / static_cast<double>(spec.n);
    row.msdr_db = msdr_db(x, x_avg);
    row.final_z = mode_final_z(final_zs);
    row.super_iterations = super_iterations;
    row.status = "ok";
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const RunOptions& opt) {
  spec.validate();

  std::vector<Task> tasks;
  std::size_t index = 0;
  for (std::size_t mi = 0; mi < spec.m_grid.size(); ++mi)
    for (std::size_t si = 0; si < spec.snr_grid_db.size(); ++si)
      for (std::size_t t = 0; t < spec.trials; ++t)
        tasks.push_back({index++, mi, si, t});

  std::vector<ResultRow> rows(tasks.size());
  const int threads = resolve_thread_count(
      opt.threads > 0 ? opt.threads : spec.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      rows[tasks[i].index] = run_task(spec, tasks[i], opt);
    }
  };
  if (threads <= 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t count =
        std::min(static_cast<std::size_t>(threads), tasks.size());
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return rows;
}

}  // namespace ucs
