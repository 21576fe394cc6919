#include "ucs/ucs.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/harness.hpp"
#include "core/selfcheck.hpp"
#include "core/sla.hpp"

namespace {

thread_local std::string g_last_error;

ucs_status fail(ucs_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

ucs_status translate_exception() {
  try {
    throw;
  } catch (const std::invalid_argument& e) {
    return fail(UCS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(UCS_ERR_NUMERICAL, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(UCS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(UCS_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(UCS_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(UCS_ERR_RUNTIME, "unknown error");
  }
}

ucs::SlaConfig to_config(const ucs_sla_params* params) {
  ucs::SlaConfig cfg;
  if (!params) return cfg;
  cfg.q = static_cast<unsigned>(params->q);
  cfg.c = params->c;
  cfg.z_init = static_cast<unsigned>(params->z_init);
  cfg.r1 = static_cast<std::size_t>(params->r1);
  cfg.r2 = static_cast<std::size_t>(params->r2);
  cfg.r3 = static_cast<std::size_t>(params->r3);
  cfg.r4a = static_cast<std::size_t>(params->r4a);
  cfg.r4b = static_cast<std::size_t>(params->r4b);
  cfg.max_total = static_cast<std::size_t>(params->max_total);
  cfg.k1 = params->k1;
  cfg.k2 = params->k2;
  cfg.sharpness = params->sharpness;
  return cfg;
}

bool write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << contents;
  return static_cast<bool>(out);
}

}  // namespace

struct ucs_experiment {
  ucs::ExperimentSpec spec;
};

extern "C" {

const char* ucs_version(void) { return "1.0.0"; }

const char* ucs_last_error(void) { return g_last_error.c_str(); }

ucs_status ucs_experiment_create(ucs_experiment** out) {
  if (!out) return fail(UCS_ERR_INVALID_ARGUMENT, "null output handle");
  try {
    *out = new ucs_experiment{};
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_experiment_load(ucs_experiment** out, const char* path) {
  if (!out || !path) return fail(UCS_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto exp = std::make_unique<ucs_experiment>();
    exp->spec = ucs::load_experiment_config(path);
    *out = exp.release();
    return UCS_OK;
  } catch (const std::runtime_error& e) {
    return fail(UCS_ERR_IO, e.what());
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_experiment_apply_preset(ucs_experiment* exp, const char* name) {
  if (!exp || !name) return fail(UCS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    ucs::apply_preset(exp->spec, name);
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_experiment_set(ucs_experiment* exp, const char* key,
                              const char* value) {
  if (!exp || !key || !value)
    return fail(UCS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    ucs::apply_config_override(exp->spec, key, value);
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_experiment_run(const ucs_experiment* exp, const char* out_dir,
                              int threads, int trace) {
  if (!exp || !out_dir) return fail(UCS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    ucs::RunOptions opt;
    opt.threads = threads;
    const std::string dir(out_dir);
    if (trace) {
      opt.trace_dir = dir + "/trace";
      std::filesystem::create_directories(opt.trace_dir);
    }
    const std::vector<ucs::ResultRow> rows = ucs::run_experiment(exp->spec, opt);

    std::ostringstream results, timing, plot;
    ucs::write_results_csv(rows, results);
    ucs::write_timing_csv(rows, timing);
    ucs::write_plotdata_csv(rows, plot);
    if (!write_file(dir + "/results.csv", results.str()) ||
        !write_file(dir + "/timing.csv", timing.str()) ||
        !write_file(dir + "/plotdata.csv", plot.str()))
      return fail(UCS_ERR_IO, "cannot write output files under " + dir);
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

void ucs_experiment_free(ucs_experiment* exp) { delete exp; }

void ucs_sla_params_defaults(ucs_sla_params* params) {
  if (!params) return;
  const ucs::SlaConfig cfg;
  params->q = static_cast<int>(cfg.q);
  params->c = cfg.c;
  params->z_init = static_cast<int>(cfg.z_init);
  params->r1 = static_cast<int>(cfg.r1);
  params->r2 = static_cast<int>(cfg.r2);
  params->r3 = static_cast<int>(cfg.r3);
  params->r4a = static_cast<int>(cfg.r4a);
  params->r4b = static_cast<int>(cfg.r4b);
  params->max_total = static_cast<int>(cfg.max_total);
  params->k1 = cfg.k1;
  params->k2 = cfg.k2;
  params->sharpness = cfg.sharpness;
}

ucs_status ucs_sla_estimate(const double* phi, const double* y, size_t m,
                            size_t n, double sigma_z_sq,
                            const ucs_sla_params* params, uint64_t seed,
                            double* x_hat, int* final_alphabet_size) {
  if (!phi || !y || !x_hat) return fail(UCS_ERR_INVALID_ARGUMENT, "null buffer");
  if (m < 1 || n < 2) return fail(UCS_ERR_INVALID_ARGUMENT, "bad dimensions");
  try {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        phi_map(phi, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    ucs::Matrix phi_mat = phi_map;
    Eigen::Map<const ucs::Vector> y_map(y, static_cast<Eigen::Index>(m));
    ucs::Vector y_vec = y_map;

    ucs::SlaResult res = ucs::sla_mcmc(phi_mat, y_vec, sigma_z_sq,
                                       to_config(params), ucs::Rng(seed));
    Eigen::Map<ucs::Vector>(x_hat, static_cast<Eigen::Index>(n)) = res.x_hat;
    if (final_alphabet_size)
      *final_alphabet_size = static_cast<int>(res.alphabet.size());
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_bmcmc_estimate(const double* phi, const double* y, size_t m,
                              size_t n, double sigma_z_sq,
                              const double* levels, size_t n_levels,
                              int super_iterations, double c, int q,
                              uint64_t seed, double* x_hat) {
  if (!phi || !y || !levels || !x_hat)
    return fail(UCS_ERR_INVALID_ARGUMENT, "null buffer");
  if (m < 1 || n < 1 || n_levels < 1 || super_iterations < 0)
    return fail(UCS_ERR_INVALID_ARGUMENT, "bad dimensions");
  try {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        phi_map(phi, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    ucs::Matrix phi_mat = phi_map;
    ucs::Vector y_vec = Eigen::Map<const ucs::Vector>(y, static_cast<Eigen::Index>(m));

    ucs::FixedAlphabet alphabet = ucs::FixedAlphabet::from_levels(
        std::vector<double>(levels, levels + n_levels));
    ucs::BmcmcOptions opt;
    opt.super_iterations = static_cast<std::size_t>(super_iterations);
    opt.c = c;
    opt.q = static_cast<unsigned>(q);
    ucs::Rng rng(seed);
    ucs::BmcmcResult res =
        ucs::b_mcmc(phi_mat, y_vec, alphabet, sigma_z_sq, opt, rng);
    for (size_t i = 0; i < n; ++i) x_hat[i] = alphabet.levels[res.w[i]];
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_baseline_least_squares(const double* phi, const double* y,
                                      size_t m, size_t n, double* x_hat) {
  if (!phi || !y || !x_hat) return fail(UCS_ERR_INVALID_ARGUMENT, "null buffer");
  try {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        phi_map(phi, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    ucs::Matrix phi_mat = phi_map;
    ucs::Vector y_vec = Eigen::Map<const ucs::Vector>(y, static_cast<Eigen::Index>(m));
    ucs::Vector sol = ucs::baseline_least_squares(phi_mat, y_vec);
    Eigen::Map<ucs::Vector>(x_hat, static_cast<Eigen::Index>(n)) = sol;
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_plotdata(const char* results_csv, const char* out_csv) {
  if (!results_csv || !out_csv)
    return fail(UCS_ERR_INVALID_ARGUMENT, "null path");
  try {
    std::ifstream in(results_csv);
    if (!in) return fail(UCS_ERR_IO, std::string("cannot open ") + results_csv);
    const std::vector<ucs::ResultRow> rows = ucs::parse_results_csv(in);
    std::ostringstream plot;
    ucs::write_plotdata_csv(rows, plot);
    if (!write_file(out_csv, plot.str()))
      return fail(UCS_ERR_IO, std::string("cannot write ") + out_csv);
    return UCS_OK;
  } catch (const std::runtime_error& e) {
    return fail(UCS_ERR_IO, e.what());
  } catch (...) {
    return translate_exception();
  }
}

ucs_status ucs_run_oracles(int verbose) {
  try {
    std::ostringstream sink;
    std::ostream& out = verbose ? std::cout : static_cast<std::ostream&>(sink);
    const bool ok = ucs::run_oracle_suites(out);
    if (!ok) return fail(UCS_ERR_RUNTIME, "oracle suite failures");
    return UCS_OK;
  } catch (...) {
    return translate_exception();
  }
}

}  // extern "C"
