#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/sla.hpp"
#include "core/sources.hpp"

namespace ucs {

// A full experiment: sweep the measurement and SNR grids, run SLA-MCMC over
// several seeds per trial, mix, and score. The defaults reproduce the
// standard protocol (N = 10000, M in 2000..7000, SNR {5, 10} dB, 50 trials,
// 5 mixed seeds, q = 2, |Z| init 7, budgets 50/10/10/10/10 capped at 240,
// K1 = K2 = 10).
struct ExperimentSpec {
  SourceSpec source;
  std::size_t n = 10000;
  std::vector<std::size_t> m_grid = {2000, 3000, 4000, 5000, 6000, 7000};
  std::vector<double> snr_grid_db = {5.0, 10.0};
  std::size_t trials = 50;
  std::size_t seeds_per_trial = 5;
  SlaConfig sla;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 = pick from UCS_THREADS or hardware

  // test hooks
  bool identity_phi = false;  // Phi = I (M = N), scalar channel
  bool zero_noise = false;    // z = 0; sigma_z_sq still set from the SNR

  void validate() const;
};

// Plain-text key-value config with [experiment], [source], [sla] and [debug]
// sections; empty input keeps every default. Unknown keys are errors.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::string& path);

// Named parameter presets: "paper" (the defaults) and "desk"
// (N = 1000, M in 200..700, 10 trials).
void apply_preset(ExperimentSpec& spec, const std::string& name);

// One key=value assignment using the same keys as the file, qualified as
// "section.key" (e.g. "experiment.trials").
void apply_config_override(ExperimentSpec& spec, const std::string& key,
                           const std::string& value);

}  // namespace ucs
