#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "gegopt/nlp.hpp"
#include "gegopt/problem.hpp"
#include "gegopt/transcription.hpp"

namespace gegopt {

/// Thresholds and budgets of the h/p refinement strategy.
struct AdaptParams {
  double eps_R = 1e-2;      // residual threshold (Condition A)
  double eps_coeff = 1e-3;  // last-coefficient threshold (Condition B)
  double rho = 2.0;         // peak threshold on the normalized residual
  int k_max = 20;           // global split budget
  double eps_ES = 0.1;      // edge spacing / minimum splittable length
  int N_bar = 4, Lx_bar = 4, Lu_bar = 4;     // p-refinement increments
  int N_max = 30, Lx_max = 30, Lu_max = 30;  // degree caps

  void validate() const;
};

enum class ActionKind {
  accept,
  split,
  p_increase,
  forced_golden_split,
  capped_accept_with_warning,
};

const char* to_string(ActionKind kind);

struct RefinementAction {
  ActionKind kind = ActionKind::accept;
  std::vector<double> split_points;  // strictly interior, ascending
  bool raise_N = false, raise_Lx = false, raise_Lu = false;
};

/// Per-element diagnostics backing a refinement decision.
struct ElementReport {
  Eigen::MatrixXd residual;  // (N+1) x n_x, midpoint rows
  int i_max = 0, j_max = 0;
  double max_residual = 0.0;
  bool condition_A = false;
  bool condition_B = false;
  Eigen::VectorXd beta;                          // empty when the residual is uniformly zero
  std::vector<std::pair<int, double>> peaks;     // (midpoint index, beta value)
  RefinementAction action;
};

/// Midpoints of consecutive augmented collocation nodes: N+1 interior points.
NodeSet midpoints(const GegenbauerParam& alpha, int N, const Element& element);

/// Absolute residual of the integral dynamics at the element midpoints,
/// rows indexed by midpoint, columns by state.
Eigen::MatrixXd residual_matrix(const OCProblem& problem, const GegenbauerParam& alpha,
                                const MeshElement& element,
                                const Eigen::Ref<const Eigen::MatrixXd>& state_coeffs,
                                const Eigen::Ref<const Eigen::MatrixXd>& control_coeffs,
                                RowParamMode row_mode = RowParamMode::fixed);

bool condition_A(const Eigen::MatrixXd& residual, double eps_R);

/// Strict bound on every state's and control's last spectral coefficient.
bool condition_B(const Eigen::Ref<const Eigen::MatrixXd>& state_coeffs,
                 const Eigen::Ref<const Eigen::MatrixXd>& control_coeffs, double eps_coeff);

/// Worst residual column normalized by its arithmetic mean; nullopt signals a
/// uniformly zero residual (treat as accepted).
std::optional<Eigen::VectorXd> beta_vector(const Eigen::MatrixXd& residual);

/// Interior strict local maxima plus the boundary cases: an endpoint joins
/// when it exceeds its single neighbor.
std::vector<std::pair<int, double>> beta_peaks(const Eigen::VectorXd& beta);

/// Refinement decision for an element that failed Conditions A and B.
/// splits_remaining is the unspent global budget.
RefinementAction decide(const Element& element, const ElementConfig& config,
                        const GegenbauerParam& alpha, const ElementReport& report,
                        const AdaptParams& params, int splits_remaining);

struct IterationRecord {
  int iteration = 0;
  int K = 0;
  std::vector<double> interfaces;  // transformed time, K+1 entries
  double objective = 0.0;
  SolveStatus solver_status = SolveStatus::max_iter;
  double max_violation = 0.0;
  std::vector<double> element_max_residual;
  std::vector<std::string> element_actions;

  std::string format() const;
};

struct AdaptiveOptions {
  int max_outer = 25;       // refine/solve round limit
  double init_coeff = 0.0;  // broadcast initial value for all coefficients
  bool enabled = true;      // false solves the initial mesh once
  RowParamMode row_mode = RowParamMode::fixed;
  std::string solver;       // registered adapter name; empty = builtin
};

struct AdaptiveResult {
  SpectralSolution solution;
  SolveReport nlp_report;
  std::vector<IterationRecord> trace;
  std::vector<std::string> warnings;
  bool accepted = false;  // every element passed (possibly capped-accept)
  int splits_used = 0;
  std::vector<ElementReport> final_reports;
};

/// Outer solve-refine loop: transcribe, solve, diagnose each element, apply
/// the refinement actions, warm start from the previous trajectory, repeat
/// until acceptance or budget exhaustion.
AdaptiveResult run_adaptive(const OCProblem& problem, const Mesh& initial_mesh,
                            const AdaptParams& params, const SolveOptions& nlp_options,
                            const AdaptiveOptions& options = {});

}  // namespace gegopt
