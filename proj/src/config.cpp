#include "gegopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gegopt/benchmarks.hpp"

namespace gegopt {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    config_error("key '" + key + "' expects a real number, got '" + value + "'");
  }
  if (trim(value.substr(used)).size() > 0) {
    config_error("key '" + key + "' expects a real number, got '" + value + "'");
  }
  return parsed;
}

int to_int(const std::string& key, const std::string& value) {
  const double parsed = to_real(key, value);
  if (parsed != std::floor(parsed)) {
    config_error("key '" + key + "' expects an integer, got '" + value + "'");
  }
  return static_cast<int>(parsed);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  config_error("key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string token = trim(item);
    if (!token.empty()) items.push_back(token);
  }
  return items;
}

std::vector<double> to_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(to_real(key, item));
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) out.push_back(to_int(key, item));
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (problem.empty()) config_error("a problem name is required");
  registry_get(problem);  // throws for unknown names
  GegenbauerParam check_alpha(alpha);
  if (K0 < 1) config_error("K must be at least 1");
  if (N < 1 || Lx < 1 || Lu < 0 || M < 1 || Mbar < 1) {
    config_error("mesh degrees out of range");
  }
  adapt.validate();
  if (adapt.N_max < N || adapt.Lx_max < Lx || adapt.Lu_max < Lu) {
    config_error("degree caps must be at least the initial degrees");
  }
  if (samples_per_element < 2) config_error("samples_per_element must be at least 2");
  if (max_outer < 1) config_error("max_outer must be positive");
  if (workers < 1) config_error("workers must be positive");
  const OCProblem p = registry_get(problem);
  for (double edge : interfaces_t) {
    if (edge <= p.t0 || edge >= p.tf) {
      config_error("mesh interfaces must lie strictly inside the horizon");
    }
  }
  for (double edge : fixed_edges_t) {
    if (edge <= p.t0 || edge >= p.tf) {
      config_error("sweep fixed edges must lie strictly inside the horizon");
    }
  }
}

Mesh RunConfig::initial_mesh() const {
  const OCProblem p = registry_get(problem);
  const ElementConfig cfg{N, Lx, Lu, M, Mbar};
  if (!interfaces_t.empty()) {
    std::vector<double> taus;
    taus.reserve(interfaces_t.size());
    for (double t : interfaces_t) taus.push_back(affine_to_tau(t, p.t0, p.tf));
    return Mesh::with_interfaces(taus, cfg, GegenbauerParam(alpha));
  }
  return Mesh::uniform(K0, cfg, GegenbauerParam(alpha));
}

OCProblem RunConfig::make_problem() const {
  OCProblem p = registry_get(problem);
  if (control_continuity.has_value()) p.continuous_controls = *control_continuity;
  return p;
}

RunConfig default_config(const std::string& problem) {
  RunConfig c;
  c.problem = problem;
  c.nlp.feas_tol = 1e-8;
  c.nlp.opt_tol = 1e-8;
  if (problem == "example1") {
    c.alpha = 0.2;
    c.N = 14;
    c.Lx = c.Lu = 8;
    c.M = 16;
    c.Mbar = 4;
    c.adapt = AdaptParams{1e-2, 1e-1, 3.0, 20, 0.1, 4, 4, 4, 20, 20, 20};
    c.init_coeff = 1.0;
  } else if (problem == "breakwell") {
    c.alpha = 0.5;
    c.N = 18;
    c.Lx = c.Lu = 17;
    c.M = 16;
    c.Mbar = 4;
    c.adapt = AdaptParams{1e-2, 1e-3, 1.5, 20, 0.1, 4, 4, 4, 30, 30, 30};
    c.init_coeff = 0.0;
  } else if (problem == "example3") {
    c.alpha = 0.0;
    c.N = 5;
    c.Lx = c.Lu = 6;
    c.M = 16;
    c.Mbar = 6;
    c.adapt = AdaptParams{1e-3, 1e-4, 2.0, 20, 0.2, 2, 2, 2, 30, 30, 30};
    c.init_coeff = 0.0;
  } else {
    registry_get(problem);  // raise the standard unknown-problem error
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  // first pass: collect section/key/value triples
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> entries;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        config_error("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error("line " + std::to_string(lineno) + ": empty key");
    if (section.empty()) {
      config_error("line " + std::to_string(lineno) + ": key outside any section");
    }
    entries.emplace_back(section, std::make_pair(key, value));
  }

  // the problem name decides the defaults everything else overrides
  std::string problem;
  for (const auto& [sec, kv] : entries) {
    if (sec == "problem" && kv.first == "name") problem = kv.second;
  }
  if (problem.empty()) config_error("[problem] name is required");
  RunConfig c = default_config(problem);

  for (const auto& [sec, kv] : entries) {
    const std::string& key = kv.first;
    const std::string& value = kv.second;
    const std::string qualified = sec + "." + key;
    if (sec == "problem") {
      if (key == "name") {
        // already applied
      } else if (key == "control_continuity") {
        c.control_continuity = to_bool(qualified, value);
      } else {
        config_error("unknown key '" + qualified + "'");
      }
    } else if (sec == "mesh") {
      if (key == "alpha") c.alpha = to_real(qualified, value);
      else if (key == "K") c.K0 = to_int(qualified, value);
      else if (key == "interfaces") c.interfaces_t = to_real_list(qualified, value);
      else if (key == "N") c.N = to_int(qualified, value);
      else if (key == "Lx") c.Lx = to_int(qualified, value);
      else if (key == "Lu") c.Lu = to_int(qualified, value);
      else if (key == "L") c.Lx = c.Lu = to_int(qualified, value);
      else if (key == "M") c.M = to_int(qualified, value);
      else if (key == "Mbar") c.Mbar = to_int(qualified, value);
      else config_error("unknown key '" + qualified + "'");
    } else if (sec == "adapt") {
      if (key == "enabled") c.adapt_enabled = to_bool(qualified, value);
      else if (key == "eps_R") c.adapt.eps_R = to_real(qualified, value);
      else if (key == "eps_coeff") c.adapt.eps_coeff = to_real(qualified, value);
      else if (key == "rho") c.adapt.rho = to_real(qualified, value);
      else if (key == "k_max") c.adapt.k_max = to_int(qualified, value);
      else if (key == "eps_ES") c.adapt.eps_ES = to_real(qualified, value);
      else if (key == "N_bar") c.adapt.N_bar = to_int(qualified, value);
      else if (key == "Lx_bar") c.adapt.Lx_bar = to_int(qualified, value);
      else if (key == "Lu_bar") c.adapt.Lu_bar = to_int(qualified, value);
      else if (key == "N_max") c.adapt.N_max = to_int(qualified, value);
      else if (key == "Lx_max") c.adapt.Lx_max = to_int(qualified, value);
      else if (key == "Lu_max") c.adapt.Lu_max = to_int(qualified, value);
      else if (key == "max_outer") c.max_outer = to_int(qualified, value);
      else if (key == "row_mode") {
        if (value == "fixed") c.row_mode = RowParamMode::fixed;
        else if (value == "bound-min") c.row_mode = RowParamMode::bound_min;
        else config_error("row_mode must be 'fixed' or 'bound-min'");
      } else {
        config_error("unknown key '" + qualified + "'");
      }
    } else if (sec == "nlp") {
      if (key == "solver") c.solver = value == "builtin" ? "" : value;
      else if (key == "feas_tol") c.nlp.feas_tol = to_real(qualified, value);
      else if (key == "opt_tol") c.nlp.opt_tol = to_real(qualified, value);
      else if (key == "max_iter") c.nlp.max_iter = to_int(qualified, value);
      else if (key == "max_inner") c.nlp.max_inner = to_int(qualified, value);
      else config_error("unknown key '" + qualified + "'");
    } else if (sec == "run") {
      if (key == "init_coeff") c.init_coeff = to_real(qualified, value);
      else if (key == "samples_per_element") c.samples_per_element = to_int(qualified, value);
      else if (key == "out") c.out_path = value;
      else if (key == "csv") c.csv_path = value;
      else if (key == "table") c.table_path = value;
      else if (key == "workers") c.workers = to_int(qualified, value);
      else config_error("unknown key '" + qualified + "'");
    } else if (sec == "sweep") {
      if (key == "alphas") c.sweep_alphas = to_real_list(qualified, value);
      else if (key == "N_list") c.sweep_N = to_int_list(qualified, value);
      else if (key == "L_list") c.sweep_L = to_int_list(qualified, value);
      else if (key == "fixed_edges") c.fixed_edges_t = to_real_list(qualified, value);
      else config_error("unknown key '" + qualified + "'");
    } else {
      config_error("unknown section '" + sec + "'");
    }
  }

  c.validate();
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace gegopt
