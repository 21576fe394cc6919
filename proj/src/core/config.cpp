#include "core/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucs {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for " + key + ": " + value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer value for " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("bad boolean value for " + key + ": " + value);
}

struct SourceOverrides {
  bool p01_set = false;
  bool p10_set = false;
};

void assign(ExperimentSpec& spec, SourceOverrides& src_set,
            const std::string& section, const std::string& key,
            const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "experiment") {
    if (key == "n") spec.n = parse_u64(full, value);
    else if (key == "m_grid") {
      spec.m_grid.clear();
      for (const std::string& item : split(value, ','))
        spec.m_grid.push_back(parse_u64(full, item));
    } else if (key == "snr_grid_db") {
      spec.snr_grid_db.clear();
      for (const std::string& item : split(value, ','))
        spec.snr_grid_db.push_back(parse_double(full, item));
    } else if (key == "trials") spec.trials = parse_u64(full, value);
    else if (key == "seeds_per_trial") spec.seeds_per_trial = parse_u64(full, value);
    else if (key == "master_seed") spec.master_seed = parse_u64(full, value);
    else if (key == "threads") spec.threads = static_cast<int>(parse_u64(full, value));
    else throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "source") {
    if (key == "kind") spec.source.kind = source_kind_from_name(value);
    else if (key == "p") spec.source.p = parse_double(full, value);
    else if (key == "p01") { spec.source.p01 = parse_double(full, value); src_set.p01_set = true; }
    else if (key == "p10") { spec.source.p10 = parse_double(full, value); src_set.p10_set = true; }
    else if (key == "error_prob") spec.source.error_prob = parse_double(full, value);
    else throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "sla") {
    if (key == "q") spec.sla.q = static_cast<unsigned>(parse_u64(full, value));
    else if (key == "c") spec.sla.c = parse_double(full, value);
    else if (key == "z_init") spec.sla.z_init = static_cast<unsigned>(parse_u64(full, value));
    else if (key == "r1") spec.sla.r1 = parse_u64(full, value);
    else if (key == "r2") spec.sla.r2 = parse_u64(full, value);
    else if (key == "r3") spec.sla.r3 = parse_u64(full, value);
    else if (key == "r4a") spec.sla.r4a = parse_u64(full, value);
    else if (key == "r4b") spec.sla.r4b = parse_u64(full, value);
    else if (key == "max_total") spec.sla.max_total = parse_u64(full, value);
    else if (key == "k1") spec.sla.k1 = parse_double(full, value);
    else if (key == "k2") spec.sla.k2 = parse_double(full, value);
    else if (key == "sharpness") spec.sla.sharpness = parse_double(full, value);
    else if (key == "ridge_scale") spec.sla.ridge_scale = parse_double(full, value);
    else throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "debug") {
    if (key == "identity_phi") spec.identity_phi = parse_bool(full, value);
    else if (key == "zero_noise") spec.zero_noise = parse_bool(full, value);
    else throw std::invalid_argument("unknown config key: " + full);
  } else {
    throw std::invalid_argument("unknown config section: " + section);
  }
}

// The dense Markov-Rademacher protocol uses P01 = 3/70; the sparse
// Markov-Uniform one uses P01 = 3/970. Applied unless the file sets them.
void finish_source_defaults(ExperimentSpec& spec, const SourceOverrides& set) {
  if (spec.source.kind == SourceKind::kMarkovRademacher) {
    if (!set.p01_set) spec.source.p01 = 3.0 / 70.0;
    if (!set.p10_set) spec.source.p10 = 0.10;
  } else if (spec.source.kind == SourceKind::kMarkovUniform) {
    if (!set.p01_set) spec.source.p01 = 3.0 / 970.0;
    if (!set.p10_set) spec.source.p10 = 0.10;
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  source.validate();
  sla.validate();
  if (n < 2) throw std::invalid_argument("signal length must be >= 2");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (seeds_per_trial < 1) throw std::invalid_argument("seeds_per_trial must be >= 1");
  if (m_grid.empty()) throw std::invalid_argument("m_grid must be nonempty");
  if (snr_grid_db.empty()) throw std::invalid_argument("snr_grid_db must be nonempty");
  for (std::size_t m : m_grid)
    if (m < 1) throw std::invalid_argument("measurement counts must be >= 1");
  if (identity_phi)
    for (std::size_t m : m_grid)
      if (m != n)
        throw std::invalid_argument("identity_phi requires every m == n");
}

ExperimentSpec parse_experiment_config(std::istream& in) {
  ExperimentSpec spec;
  SourceOverrides src_set;
  std::string line;
  std::string section = "experiment";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("bad section header at line " +
                                    std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value at line " +
                                  std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    assign(spec, src_set, section, key, value);
  }
  finish_source_defaults(spec, src_set);
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_experiment_config(in);
}

void apply_preset(ExperimentSpec& spec, const std::string& name) {
  if (name == "paper") {
    ExperimentSpec fresh;
    fresh.source = spec.source;
    fresh.master_seed = spec.master_seed;
    fresh.threads = spec.threads;
    spec = fresh;
  } else if (name == "desk") {
    spec.n = 1000;
    spec.m_grid = {200, 300, 400, 500, 600, 700};
    spec.snr_grid_db = {5.0, 10.0};
    spec.trials = 10;
    spec.seeds_per_trial = 5;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  spec.validate();
}

void apply_config_override(ExperimentSpec& spec, const std::string& key,
                           const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    throw std::invalid_argument("override keys use section.key form: " + key);
  SourceOverrides src_set;
  src_set.p01_set = src_set.p10_set = true;  // overrides never re-default
  assign(spec, src_set, key.substr(0, dot), key.substr(dot + 1), value);
  spec.validate();
}

}  // namespace ucs
