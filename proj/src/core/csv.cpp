#include "core/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ucs {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.source << ',' << r.n << ',' << r.m << ',' << format_double(r.snr_db)
        << ',' << r.trial << ',' << join_doubles(r.seed_mses) << ','
        << format_double(r.mixed_mse) << ',' << format_double(r.msdr_db) << ','
        << r.final_z << ',' << sanitize(r.status) << '\n';
  }
}

void write_timing_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kTimingHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.source << ',' << r.n << ',' << r.m << ',' << format_double(r.snr_db)
        << ',' << r.trial << ',' << format_double(r.wall_ms) << ','
        << r.super_iterations << '\n';
  }
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty results file");
  if (line != kResultsHeader)
    throw std::runtime_error("unexpected results header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 10)
      throw std::runtime_error("malformed results row: " + line);
    ResultRow r;
    r.source = f[0];
    r.n = std::stoull(f[1]);
    r.m = std::stoull(f[2]);
    r.snr_db = std::stod(f[3]);
    r.trial = std::stoull(f[4]);
    if (!f[5].empty())
      for (const std::string& item : split(f[5], ';'))
        r.seed_mses.push_back(std::stod(item));
    r.mixed_mse = std::stod(f[6]);
    r.msdr_db = std::stod(f[7]);
    r.final_z = std::stoull(f[8]);
    r.status = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plotdata_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  // key: (snr, m) -> msdr samples; std::map keeps the output ordering stable
  std::map<std::pair<double, std::size_t>, std::vector<double>> groups;
  for (const ResultRow& r : rows)
    if (r.status == "ok") groups[{r.snr_db, r.m}].push_back(r.msdr_db);

  out << kPlotHeader << '\n';
  for (const auto& [key, samples] : groups) {
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    const double sd =
        samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1))
                           : 0.0;
    out << format_double(key.first) << ',' << key.second << ','
        << format_double(mean) << ',' << format_double(sd) << ','
        << samples.size() << '\n';
  }
}

}  // namespace ucs
