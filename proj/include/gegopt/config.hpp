#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gegopt/adaptive.hpp"
#include "gegopt/nlp.hpp"
#include "gegopt/quadrature.hpp"

namespace gegopt {

/// One run's full parameterization. Every key is optional in the config
/// file; unset values resolve to the registered problem's reference
/// settings.
struct RunConfig {
  std::string problem;

  // initial mesh
  double alpha = 0.5;
  int K0 = 1;
  std::vector<double> interfaces_t;  // explicit interior interfaces, original time
  int N = 8, Lx = 8, Lu = 8, M = 16, Mbar = 4;

  AdaptParams adapt;
  bool adapt_enabled = true;
  int max_outer = 25;
  RowParamMode row_mode = RowParamMode::fixed;

  SolveOptions nlp;
  std::string solver;  // registered adapter key; empty = builtin

  double init_coeff = 0.0;
  int samples_per_element = 20;
  std::string out_path, csv_path, table_path;
  int workers = 1;
  std::optional<bool> control_continuity;

  // sweep schedule
  std::vector<double> sweep_alphas;
  std::vector<int> sweep_N;
  std::vector<int> sweep_L;  // empty: ceil(N/2) + 1
  std::vector<double> fixed_edges_t;

  void validate() const;
  Mesh initial_mesh() const;
  OCProblem make_problem() const;  // registry problem with overrides applied
};

/// Reference settings for a registered benchmark.
RunConfig default_config(const std::string& problem);

/// Parse the flat sectioned key = value format; unknown sections or keys are
/// configuration errors. Settings left out fall back to the problem defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace gegopt
