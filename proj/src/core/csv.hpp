#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ucs {

// Exact round-trip double formatting (%.17g), so repeated runs with the same
// seed produce byte-identical files.
std::string format_double(double v);

struct ResultRow {
  std::string source;
  std::size_t n = 0;
  std::size_t m = 0;
  double snr_db = 0.0;
  std::size_t trial = 0;
  std::vector<double> seed_mses;
  double mixed_mse = 0.0;
  double msdr_db = 0.0;
  std::size_t final_z = 0;  // mode over seeds, ties to the smaller size
  std::string status = "ok";
  // timing sidecar fields (not part of the deterministic results file)
  double wall_ms = 0.0;
  std::size_t super_iterations = 0;
};

inline constexpr const char* kResultsHeader =
    "source,n,m,snr_db,trial,seed_mses,mixed_mse,msdr_db,final_z,status";
inline constexpr const char* kTimingHeader =
    "source,n,m,snr_db,trial,wall_ms,super_iterations";
inline constexpr const char* kPlotHeader =
    "snr_db,m,mean_msdr_db,std_msdr_db,trials";

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_timing_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> parse_results_csv(std::istream& in);

// Aggregation for plotting: per (snr, m), mean and sample standard deviation
// of the per-trial MSDR over rows with status "ok".
void write_plotdata_csv(const std::vector<ResultRow>& rows, std::ostream& out);

}  // namespace ucs
