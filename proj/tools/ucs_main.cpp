// Command-line front end; drives everything through the public C API.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "ucs/ucs.h"

namespace {

int report(ucs_status status, const char* what) {
  if (status == UCS_OK) return 0;
  std::fprintf(stderr, "ucs %s failed (%d): %s\n", what, static_cast<int>(status),
               ucs_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal signal estimation from noisy linear measurements"};
  app.require_subcommand(1);

  // run
  std::string config_path, out_dir = ".", preset;
  int threads = 0;
  bool trace = false;
  CLI::App* run = app.add_subcommand(
      "run", "Run an experiment sweep and write results/timing/plotdata CSVs");
  run->add_option("config", config_path,
                  "Config file (omit for the default protocol)");
  run->add_option("-o,--out", out_dir, "Output directory (must exist)");
  run->add_option("--preset", preset, "Parameter preset: desk or paper");
  run->add_option("--threads", threads,
                  "Worker threads (0 = UCS_THREADS env or hardware)");
  run->add_flag("--trace", trace, "Write per-run round and energy traces");

  // oracle
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Run the enumeration/recompute oracle suites");
  bool quiet = false;
  oracle->add_flag("-q,--quiet", quiet, "Suppress per-suite output");

  // plotdata
  std::string results_path, plot_out = "plotdata.csv";
  CLI::App* plotdata = app.add_subcommand(
      "plotdata", "Aggregate a results.csv into plot-ready rows");
  plotdata->add_option("results", results_path, "results.csv path")->required();
  plotdata->add_option("-o,--out", plot_out, "Output CSV path");

  CLI::App* version = app.add_subcommand("version", "Print the library version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::printf("ucs %s\n", ucs_version());
    return 0;
  }

  if (run->parsed()) {
    ucs_experiment* exp = nullptr;
    ucs_status status = config_path.empty()
                            ? ucs_experiment_create(&exp)
                            : ucs_experiment_load(&exp, config_path.c_str());
    if (status != UCS_OK) return report(status, "run");
    if (!preset.empty()) {
      status = ucs_experiment_apply_preset(exp, preset.c_str());
      if (status != UCS_OK) {
        ucs_experiment_free(exp);
        return report(status, "run");
      }
    }
    status = ucs_experiment_run(exp, out_dir.c_str(), threads, trace ? 1 : 0);
    ucs_experiment_free(exp);
    return report(status, "run");
  }

  if (oracle->parsed())
    return report(ucs_run_oracles(quiet ? 0 : 1), "oracle");

  if (plotdata->parsed())
    return report(ucs_plotdata(results_path.c_str(), plot_out.c_str()),
                  "plotdata");

  return 0;
}
