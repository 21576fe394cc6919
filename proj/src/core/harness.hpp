#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/sources.hpp"

namespace ucs {

// 10 log10(E[x^2] / MSE) with the empirical second moment of x.
// Throws std::domain_error when the MSE vanishes (exact recovery).
double msdr_db(const Vector& x, const Vector& x_hat);

// Minimum-norm least-squares solution of y = Phi x.
Vector baseline_least_squares(const Matrix& phi, const Vector& y);

struct RunOptions {
  int threads = 0;            // <= 0: UCS_THREADS env or hardware count
  std::string trace_dir;      // when set, per-run round/energy traces go here
};

// Full sweep: for every (m, snr, trial), generate a signal and measurement,
// run SLA-MCMC once per seed, mix the outputs and score the mixture. Row
// order and content depend only on the spec, so reruns (at any thread count)
// produce identical results files. Trial failures are recorded in the row's
// status, not thrown.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const RunOptions& opt = {});

int resolve_thread_count(int requested);

}  // namespace ucs
