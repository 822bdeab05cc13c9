#pragma once

#include <string>
#include <vector>

#include "gegopt/problem.hpp"

namespace gegopt {

/// Benchmark problems registered in code.
OCProblem registry_get(const std::string& name);
std::vector<std::string> registry_names();

/// Exact optimal control of the state-constrained double integrator, for
/// accuracy studies. Original time.
double breakwell_exact_control(double t);

}  // namespace gegopt
