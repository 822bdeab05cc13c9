#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace gegopt {

/// Dense nonlinear program: minimize objective subject to equalities = 0,
/// range inequalities, and variable bounds.
struct NLPProblem {
  int n = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  int m_eq = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)> equalities;
  int m_in = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)> inequalities;
  Eigen::VectorXd ineq_lower, ineq_upper;
  Eigen::VectorXd lower, upper;  // variable bounds; +-inf when absent
};

enum class SolveStatus { converged, max_iter, line_search_failure };

const char* to_string(SolveStatus status);

struct SolveOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  int max_iter = 40;       // outer (multiplier) iterations
  int max_inner = 4000;    // quasi-Newton steps per outer iteration
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e12;
};

struct SolveReport {
  Eigen::VectorXd z;
  double objective = 0.0;
  double max_violation = 0.0;  // constraint and bound infeasibility, inf norm
  double stationarity = 0.0;   // projected gradient norm of the augmented Lagrangian
  int outer_iterations = 0;
  long inner_iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  std::vector<double> violation_history;  // one entry per outer iteration
};

/// Built-in augmented-Lagrangian solve; inequalities become slack equalities
/// with box bounds, inner subproblems run a projected quasi-Newton method
/// with a backtracking line search. Never throws for iteration or line
/// search exhaustion; inspect the report status.
SolveReport solve(const NLPProblem& problem, const Eigen::VectorXd& z0,
                  const SolveOptions& opts = {});

/// Forward-difference gradient, step sqrt(eps) * (1 + |z_i|) by default.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& z, double scale = -1.0);

/// Forward-difference Jacobian of an m-valued callback.
Eigen::MatrixXd fd_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)>& f, int m,
    const Eigen::VectorXd& z);

using SolverFn =
    std::function<SolveReport(const NLPProblem&, const Eigen::VectorXd&, const SolveOptions&)>;

/// Register an external solver adapter under a configuration key.
void register_external_solver(const std::string& name, SolverFn adapter);

/// Route a solve through a registered adapter; "" and "builtin" select the
/// built-in method. Unknown names raise a configuration error.
SolveReport solve_with(const std::string& solver_name, const NLPProblem& problem,
                       const Eigen::VectorXd& z0, const SolveOptions& opts = {});

std::vector<std::string> registered_solvers();

}  // namespace gegopt
