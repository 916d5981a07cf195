#include "risd2d/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace risd2d {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  if (!s.empty() && s[0] == '-') throw std::invalid_argument("seed must be nonnegative: '" + s + "'");
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an unsigned integer: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not an unsigned integer: '" + s + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) out.push_back(to_double(item));
  return out;
}

std::vector<int> to_ints(const std::string& s) {
  std::vector<int> out;
  for (const std::string& item : split(s, ',')) out.push_back(static_cast<int>(to_integer(item)));
  return out;
}

std::vector<Point> to_points(const std::string& s) {
  std::vector<Point> out;
  for (const std::string& item : split(s, ';')) {
    const std::vector<double> xy = to_doubles(item);
    if (xy.size() != 2) throw std::invalid_argument("point needs 'x, y': '" + item + "'");
    out.push_back({xy[0], xy[1]});
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_integral_v<T>) {
      out += std::to_string(values[i]);
    } else {
      out += fmt(values[i]);
    }
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"links", [](ExperimentConfig& c, const std::string& v) { c.links = static_cast<int>(to_integer(v)); }},
      {"area_width", [](ExperimentConfig& c, const std::string& v) { c.area.width = to_double(v); }},
      {"area_height", [](ExperimentConfig& c, const std::string& v) { c.area.height = to_double(v); }},
      {"d_min", [](ExperimentConfig& c, const std::string& v) { c.distance.min = to_double(v); }},
      {"d_max", [](ExperimentConfig& c, const std::string& v) { c.distance.max = to_double(v); }},
      {"ris_positions", [](ExperimentConfig& c, const std::string& v) { c.ris_positions = to_points(v); }},
      {"n_elements", [](ExperimentConfig& c, const std::string& v) { c.n_elements = to_ints(v); }},
      {"n_elements_fixed", [](ExperimentConfig& c, const std::string& v) { c.n_elements_fixed = static_cast<int>(to_integer(v)); }},
      {"pmax_dbm", [](ExperimentConfig& c, const std::string& v) { c.pmax_dbm = to_doubles(v); }},
      {"pmax_dbm_fixed", [](ExperimentConfig& c, const std::string& v) { c.pmax_dbm_fixed = to_double(v); }},
      {"rmin", [](ExperimentConfig& c, const std::string& v) { c.rmin = to_doubles(v); }},
      {"rmin_fixed", [](ExperimentConfig& c, const std::string& v) { c.rmin_fixed = to_double(v); }},
      {"bits", [](ExperimentConfig& c, const std::string& v) { c.bits = to_ints(v); }},
      {"noise_dbm", [](ExperimentConfig& c, const std::string& v) { c.noise_dbm = to_double(v); }},
      {"circuit_dbm", [](ExperimentConfig& c, const std::string& v) { c.circuit_dbm = to_double(v); }},
      {"eta", [](ExperimentConfig& c, const std::string& v) { c.eta = to_double(v); }},
      {"rician_k", [](ExperimentConfig& c, const std::string& v) { c.fading.rician_k = to_double(v); }},
      {"pathloss_k", [](ExperimentConfig& c, const std::string& v) { c.fading.pathloss_k = to_double(v); }},
      {"pathloss_exp", [](ExperimentConfig& c, const std::string& v) { c.fading.pathloss_exp = to_double(v); }},
      {"trials", [](ExperimentConfig& c, const std::string& v) { c.trials = static_cast<int>(to_integer(v)); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_unsigned(v); }},
      {"outer_tol", [](ExperimentConfig& c, const std::string& v) { c.outer_tol = to_double(v); }},
      {"outer_max_iter", [](ExperimentConfig& c, const std::string& v) { c.outer_max_iter = static_cast<int>(to_integer(v)); }},
      {"randomization_samples", [](ExperimentConfig& c, const std::string& v) { c.randomization_samples = static_cast<int>(to_integer(v)); }},
      {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<int>(to_integer(v)); }},
      {"output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (links < 1) fail("links must be >= 1");
  if (!(area.width > 0.0) || !(area.height > 0.0)) fail("area must have positive size");
  if (!(distance.min > 0.0) || !(distance.max >= distance.min)) fail("need 0 < d_min <= d_max");
  if (n_elements.empty() || pmax_dbm.empty() || rmin.empty() || bits.empty()) fail("sweep lists must be non-empty");
  for (int n : n_elements) {
    if (n < 0) fail("n_elements entries must be >= 0");
  }
  if (n_elements_fixed < 0) fail("n_elements_fixed must be >= 0");
  for (double r : rmin) {
    if (!(r >= 0.0)) fail("rmin entries must be >= 0");
  }
  if (!(rmin_fixed >= 0.0)) fail("rmin_fixed must be >= 0");
  for (int b : bits) element_power_for_bits(b);
  if (!(eta > 0.0) || eta > 1.0) fail("eta must be in (0, 1]");
  fading.validate();
  if (trials < 1) fail("trials must be >= 1");
  if (!(outer_tol > 0.0)) fail("outer_tol must be positive");
  if (outer_max_iter < 1) fail("outer_max_iter must be >= 1");
  if (randomization_samples < 1) fail("randomization_samples must be >= 1");
  if (threads < 0) fail("threads must be >= 0");
  if (output_dir.empty()) fail("output_dir must be set");
}

std::vector<Point> ExperimentConfig::surfaces() const {
  return ris_positions.empty() ? default_ris_positions(area) : ris_positions;
}

SystemParams ExperimentConfig::system_params(int b, double pmax, double r) const {
  SystemParams sp = SystemParams::defaults(links);
  sp.noise_power = dbm_to_watts(noise_dbm);
  sp.circuit_power = dbm_to_watts(circuit_dbm);
  sp.resolution_bits = b;
  sp.element_power = element_power_for_bits(b);
  sp.p_max = dbm_to_watts(pmax);
  sp.r_min = RVector::Constant(links, r);
  return sp;
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "links = " << links << "\n";
  out << "area_width = " << fmt(area.width) << "\n";
  out << "area_height = " << fmt(area.height) << "\n";
  out << "d_min = " << fmt(distance.min) << "\n";
  out << "d_max = " << fmt(distance.max) << "\n";
  if (!ris_positions.empty()) {
    out << "ris_positions = ";
    for (std::size_t i = 0; i < ris_positions.size(); ++i) {
      out << (i ? "; " : "") << fmt(ris_positions[i].x) << ", " << fmt(ris_positions[i].y);
    }
    out << "\n";
  }
  out << "n_elements = " << join(n_elements) << "\n";
  out << "n_elements_fixed = " << n_elements_fixed << "\n";
  out << "pmax_dbm = " << join(pmax_dbm) << "\n";
  out << "pmax_dbm_fixed = " << fmt(pmax_dbm_fixed) << "\n";
  out << "rmin = " << join(rmin) << "\n";
  out << "rmin_fixed = " << fmt(rmin_fixed) << "\n";
  out << "bits = " << join(bits) << "\n";
  out << "noise_dbm = " << fmt(noise_dbm) << "\n";
  out << "circuit_dbm = " << fmt(circuit_dbm) << "\n";
  out << "eta = " << fmt(eta) << "\n";
  out << "rician_k = " << fmt(fading.rician_k) << "\n";
  out << "pathloss_k = " << fmt(fading.pathloss_k) << "\n";
  out << "pathloss_exp = " << fmt(fading.pathloss_exp) << "\n";
  out << "trials = " << trials << "\n";
  out << "seed = " << seed << "\n";
  out << "outer_tol = " << fmt(outer_tol) << "\n";
  out << "outer_max_iter = " << outer_max_iter << "\n";
  out << "randomization_samples = " << randomization_samples << "\n";
  out << "threads = " << threads << "\n";
  out << "output_dir = " << output_dir << "\n";
  return out.str();
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument(where + "unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in, path);
}

}  // namespace risd2d
