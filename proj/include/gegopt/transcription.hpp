#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "gegopt/nlp.hpp"
#include "gegopt/problem.hpp"
#include "gegopt/quadrature.hpp"

namespace gegopt {

struct TranscriptionOptions {
  RowParamMode row_mode = RowParamMode::fixed;  // adjoint-node parameter policy
};

/// Immutable per-element operators: integration matrix, basis matrices at the
/// augmented collocation nodes and at each distinct adjoint node set, and the
/// original-time images of all sample points.
struct ElementOperators {
  Element domain{-1.0, 1.0};
  ElementConfig config;
  IntegrationMatrix P;                       // (N+2) x (M+1)
  Eigen::MatrixXd Bx_aug, Bu_aug;            // (N+2) x (L+1), last row all ones
  std::vector<double> aug_t;                 // original time at augmented nodes
  // adjoint node data, deduplicated across rows
  std::vector<Eigen::MatrixXd> Bx_adj, Bu_adj;
  std::vector<std::vector<double>> adj_t;
  std::vector<std::size_t> row_adj;          // row -> distinct adjoint set
};

/// Sizes of the assembled constraint blocks.
struct ConstraintPartition {
  int m_dynamics = 0;
  int m_boundary = 0;
  int m_continuity = 0;
  int m_path = 0;  // inequality rows (path function plus finite box components)
  int m_eq() const { return m_dynamics + m_boundary + m_continuity; }
};

/// Everything needed to evaluate the discrete problem on a fixed mesh.
struct TranscriptionWorkspace {
  const OCProblem* problem = nullptr;
  Mesh mesh;
  DecisionLayout layout;
  std::vector<ElementOperators> ops;
  ConstraintPartition partition;
  Eigen::VectorXd path_lower, path_upper;  // per inequality row
  std::vector<int> x_box, u_box;           // component indices with a finite bound

  static TranscriptionWorkspace build(const OCProblem& problem, const Mesh& mesh,
                                      const TranscriptionOptions& options = {});
};

double assemble_cost(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z);

/// Defect vector of length sum_k n_x (N_k + 2); element-major, then
/// collocation row, then state component. State continuity across interfaces
/// is embedded through the previous element's right-endpoint value.
void assemble_dynamics_defects(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                               Eigen::Ref<Eigen::VectorXd> out);

/// Path rows at every augmented node of every element: declared path
/// components first, then finite state-box and control-box components.
void assemble_path_constraints(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                               Eigen::Ref<Eigen::VectorXd> out);

void assemble_boundary_constraints(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                                   Eigen::Ref<Eigen::VectorXd> out);

/// Control value matching across interfaces, emitted only when the problem
/// declares continuous controls (empty otherwise).
void assemble_control_continuity(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                                 Eigen::Ref<Eigen::VectorXd> out);

/// Bundle the assemblers over a shared decision layout into a dense NLP.
/// The returned problem owns a shared workspace.
NLPProblem assemble_nlp(const OCProblem& problem, const Mesh& mesh,
                        const TranscriptionOptions& options = {},
                        std::shared_ptr<const TranscriptionWorkspace>* out_ws = nullptr);

}  // namespace gegopt
