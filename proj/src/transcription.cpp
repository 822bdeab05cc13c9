#include "gegopt/transcription.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gegopt {

namespace {

Eigen::VectorXd alternating_ones(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = i % 2 == 0 ? 1.0 : -1.0;
  return v;
}

Eigen::MatrixXd basis_matrix(const GegenbauerParam& alpha, int L, const Element& domain,
                             const std::vector<double>& taus) {
  Eigen::MatrixXd B(static_cast<Eigen::Index>(taus.size()), L + 1);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const auto row = basis_row(alpha, L, domain, taus[i]);
    for (int j = 0; j <= L; ++j) {
      B(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    }
  }
  return B;
}

[[noreturn]] void rethrow_with_context(const std::exception& err, int element, double t) {
  std::ostringstream os;
  os << "callback failure on element " << element + 1 << " at t = " << t << ": "
     << err.what();
  throw std::runtime_error(os.str());
}

// Per-element state/control samples at every distinct adjoint node set plus
// the augmented nodes, shared by the assemblers.
struct ElementEval {
  Eigen::MatrixXd Xaug, Uaug;               // (N+2) x n
  std::vector<Eigen::MatrixXd> Xadj, Uadj;  // per distinct adjoint set
};

ElementEval evaluate_element(const TranscriptionWorkspace& ws, int k,
                             const Eigen::VectorXd& z) {
  const ElementOperators& op = ws.ops[static_cast<std::size_t>(k)];
  const auto A = ws.layout.state_coeffs(z, k);
  const auto B = ws.layout.control_coeffs(z, k);
  ElementEval ev;
  ev.Xaug = op.Bx_aug * A;
  ev.Uaug = op.Bu_aug * B;
  ev.Xadj.reserve(op.Bx_adj.size());
  ev.Uadj.reserve(op.Bu_adj.size());
  for (std::size_t d = 0; d < op.Bx_adj.size(); ++d) {
    ev.Xadj.push_back(op.Bx_adj[d] * A);
    ev.Uadj.push_back(op.Bu_adj[d] * B);
  }
  return ev;
}

}  // namespace

TranscriptionWorkspace TranscriptionWorkspace::build(const OCProblem& problem,
                                                     const Mesh& mesh,
                                                     const TranscriptionOptions& options) {
  problem.validate();
  mesh.validate();

  TranscriptionWorkspace ws;
  ws.problem = &problem;
  ws.mesh = mesh;
  ws.layout = DecisionLayout::build(problem.n_x, problem.n_u, mesh);

  for (int k = 0; k < mesh.size(); ++k) {
    const MeshElement& me = mesh.elements[static_cast<std::size_t>(k)];
    ElementOperators op;
    op.domain = me.domain;
    op.config = me.config;

    const NodeSet aug = augmented_collocation_nodes(mesh.alpha, me.config.N, me.domain);
    std::vector<GegenbauerParam> params;
    params.reserve(aug.size());
    const RowParamSpec spec{options.row_mode, mesh.alpha};
    for (std::size_t i = 0; i < aug.size(); ++i) {
      params.push_back(select_row_param(spec, me.config.M, me.domain, aug[i]));
    }
    op.P = build_obgim(me.domain, aug, me.config.M, params);

    op.Bx_aug = basis_matrix(mesh.alpha, me.config.Lx, me.domain, aug.nodes);
    op.Bu_aug = basis_matrix(mesh.alpha, me.config.Lu, me.domain, aug.nodes);
    op.aug_t.reserve(aug.size());
    for (double tau : aug.nodes) {
      op.aug_t.push_back(affine_from_tau(tau, problem.t0, problem.tf));
    }

    op.row_adj.resize(aug.size());
    std::vector<std::vector<double>> distinct;
    for (std::size_t i = 0; i < aug.size(); ++i) {
      const std::vector<double>& nodes = op.P.adjoint_nodes[i].nodes;
      std::size_t found = distinct.size();
      for (std::size_t d = 0; d < distinct.size(); ++d) {
        if (distinct[d] == nodes) {
          found = d;
          break;
        }
      }
      if (found == distinct.size()) {
        distinct.push_back(nodes);
        op.Bx_adj.push_back(basis_matrix(mesh.alpha, me.config.Lx, me.domain, nodes));
        op.Bu_adj.push_back(basis_matrix(mesh.alpha, me.config.Lu, me.domain, nodes));
        std::vector<double> ts;
        ts.reserve(nodes.size());
        for (double tau : nodes) ts.push_back(affine_from_tau(tau, problem.t0, problem.tf));
        op.adj_t.push_back(std::move(ts));
      }
      op.row_adj[i] = found;
    }

    ws.partition.m_dynamics += problem.n_x * (me.config.N + 2);
    ws.ops.push_back(std::move(op));
  }

  ws.partition.m_boundary = problem.n_psi;
  ws.partition.m_continuity =
      problem.continuous_controls && mesh.size() > 1 ? problem.n_u * (mesh.size() - 1) : 0;

  for (int r = 0; r < problem.n_x; ++r) {
    const bool lo = problem.x_lower.size() > 0 && std::isfinite(problem.x_lower(r));
    const bool hi = problem.x_upper.size() > 0 && std::isfinite(problem.x_upper(r));
    if (lo || hi) ws.x_box.push_back(r);
  }
  for (int s = 0; s < problem.n_u; ++s) {
    const bool lo = problem.u_lower.size() > 0 && std::isfinite(problem.u_lower(s));
    const bool hi = problem.u_upper.size() > 0 && std::isfinite(problem.u_upper(s));
    if (lo || hi) ws.u_box.push_back(s);
  }

  const int rows_per_node =
      problem.n_C + static_cast<int>(ws.x_box.size()) + static_cast<int>(ws.u_box.size());
  int total_nodes = 0;
  for (const MeshElement& me : mesh.elements) total_nodes += me.config.N + 2;
  ws.partition.m_path = rows_per_node * total_nodes;

  const double inf = std::numeric_limits<double>::infinity();
  ws.path_lower.resize(ws.partition.m_path);
  ws.path_upper.resize(ws.partition.m_path);
  int row = 0;
  for (int k = 0; k < mesh.size(); ++k) {
    const int nodes = mesh.elements[static_cast<std::size_t>(k)].config.N + 2;
    for (int i = 0; i < nodes; ++i) {
      for (int c = 0; c < problem.n_C; ++c) {
        ws.path_lower(row) = problem.path_lower(c);
        ws.path_upper(row) = problem.path_upper(c);
        ++row;
      }
      for (int r : ws.x_box) {
        ws.path_lower(row) = problem.x_lower.size() > 0 ? problem.x_lower(r) : -inf;
        ws.path_upper(row) = problem.x_upper.size() > 0 ? problem.x_upper(r) : inf;
        ++row;
      }
      for (int s : ws.u_box) {
        ws.path_lower(row) = problem.u_lower.size() > 0 ? problem.u_lower(s) : -inf;
        ws.path_upper(row) = problem.u_upper.size() > 0 ? problem.u_upper(s) : inf;
        ++row;
      }
    }
  }
  return ws;
}

double assemble_cost(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z) {
  const OCProblem& p = *ws.problem;
  const int K = ws.mesh.size();
  const Eigen::VectorXd alt = alternating_ones(ws.layout.Lx.front() + 1);
  const Eigen::VectorXd x_start = ws.layout.state_coeffs(z, 0).transpose() * alt;
  const Eigen::VectorXd x_end =
      ws.layout.state_coeffs(z, K - 1).colwise().sum().transpose();

  double J = 0.0;
  if (p.terminal_cost) J = p.terminal_cost(x_start, p.t0, x_end, p.tf);
  if (!p.lagrangian) return J;

  const double scale = 0.5 * (p.tf - p.t0);
  for (int k = 0; k < K; ++k) {
    const ElementOperators& op = ws.ops[static_cast<std::size_t>(k)];
    const int last = op.P.rows() - 1;
    const std::size_t d = op.row_adj[static_cast<std::size_t>(last)];
    const auto A = ws.layout.state_coeffs(z, k);
    const auto B = ws.layout.control_coeffs(z, k);
    const Eigen::MatrixXd X = op.Bx_adj[d] * A;
    const Eigen::MatrixXd U = op.Bu_adj[d] * B;
    Eigen::VectorXd values(X.rows());
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
      const double t = op.adj_t[d][static_cast<std::size_t>(q)];
      try {
        values(q) = p.lagrangian(X.row(q).transpose(), U.row(q).transpose(), t);
      } catch (const std::exception& err) {
        rethrow_with_context(err, k, t);
      }
    }
    J += scale * op.P.apply_row(last, values);
  }
  return J;
}

void assemble_dynamics_defects(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                               Eigen::Ref<Eigen::VectorXd> out) {
  const OCProblem& p = *ws.problem;
  const double scale = 0.5 * (p.tf - p.t0);
  const int n_x = p.n_x;
  int base = 0;
  Eigen::VectorXd x_left;
  Eigen::VectorXd fval(n_x);
  for (int k = 0; k < ws.mesh.size(); ++k) {
    const ElementOperators& op = ws.ops[static_cast<std::size_t>(k)];
    const ElementEval ev = evaluate_element(ws, k, z);
    if (k == 0) {
      const Eigen::VectorXd alt = alternating_ones(ws.layout.Lx.front() + 1);
      x_left = ws.layout.state_coeffs(z, 0).transpose() * alt;
    }

    // dynamics samples at each distinct adjoint set
    std::vector<Eigen::MatrixXd> F(ev.Xadj.size());
    for (std::size_t d = 0; d < ev.Xadj.size(); ++d) {
      F[d].resize(ev.Xadj[d].rows(), n_x);
      for (Eigen::Index q = 0; q < ev.Xadj[d].rows(); ++q) {
        const double t = op.adj_t[d][static_cast<std::size_t>(q)];
        try {
          p.dynamics(ev.Xadj[d].row(q).transpose(), ev.Uadj[d].row(q).transpose(), t, fval);
        } catch (const std::exception& err) {
          rethrow_with_context(err, k, t);
        }
        F[d].row(q) = fval.transpose();
      }
    }

    const int rows = op.P.rows();
    for (int i = 0; i < rows; ++i) {
      const std::size_t d = op.row_adj[static_cast<std::size_t>(i)];
      const Eigen::RowVectorXd integral = op.P.entries.row(i) * F[d];
      for (int r = 0; r < n_x; ++r) {
        out(base + i * n_x + r) = ev.Xaug(i, r) - x_left(r) - scale * integral(r);
      }
    }
    base += rows * n_x;
    // the next element's left endpoint state is this element's right endpoint
    // value, which embeds state continuity in the defects
    x_left = ev.Xaug.row(rows - 1).transpose();
  }
}

void assemble_path_constraints(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                               Eigen::Ref<Eigen::VectorXd> out) {
  const OCProblem& p = *ws.problem;
  if (ws.partition.m_path == 0) return;
  Eigen::VectorXd cval(p.n_C);
  int row = 0;
  for (int k = 0; k < ws.mesh.size(); ++k) {
    const ElementOperators& op = ws.ops[static_cast<std::size_t>(k)];
    const ElementEval ev = evaluate_element(ws, k, z);
    for (Eigen::Index i = 0; i < ev.Xaug.rows(); ++i) {
      const double t = op.aug_t[static_cast<std::size_t>(i)];
      if (p.n_C > 0) {
        try {
          p.path(ev.Xaug.row(i).transpose(), ev.Uaug.row(i).transpose(), t, cval);
        } catch (const std::exception& err) {
          rethrow_with_context(err, k, t);
        }
        out.segment(row, p.n_C) = cval;
        row += p.n_C;
      }
      for (int r : ws.x_box) out(row++) = ev.Xaug(i, r);
      for (int s : ws.u_box) out(row++) = ev.Uaug(i, s);
    }
  }
}

void assemble_boundary_constraints(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                                   Eigen::Ref<Eigen::VectorXd> out) {
  const OCProblem& p = *ws.problem;
  if (p.n_psi == 0) return;
  const int K = ws.mesh.size();
  const Eigen::VectorXd alt = alternating_ones(ws.layout.Lx.front() + 1);
  const Eigen::VectorXd x_start = ws.layout.state_coeffs(z, 0).transpose() * alt;
  const Eigen::VectorXd x_end =
      ws.layout.state_coeffs(z, K - 1).colwise().sum().transpose();
  Eigen::VectorXd psi(p.n_psi);
  try {
    p.boundary(x_start, p.t0, x_end, p.tf, psi);
  } catch (const std::exception& err) {
    rethrow_with_context(err, 0, p.t0);
  }
  out.head(p.n_psi) = psi;
}

void assemble_control_continuity(const TranscriptionWorkspace& ws, const Eigen::VectorXd& z,
                                 Eigen::Ref<Eigen::VectorXd> out) {
  if (ws.partition.m_continuity == 0) return;
  const int n_u = ws.problem->n_u;
  int row = 0;
  for (int k = 1; k < ws.mesh.size(); ++k) {
    const Eigen::VectorXd alt = alternating_ones(ws.layout.Lu[static_cast<std::size_t>(k)] + 1);
    const Eigen::VectorXd left_value = ws.layout.control_coeffs(z, k).transpose() * alt;
    const Eigen::VectorXd prev_value =
        ws.layout.control_coeffs(z, k - 1).colwise().sum().transpose();
    out.segment(row, n_u) = left_value - prev_value;
    row += n_u;
  }
}

NLPProblem assemble_nlp(const OCProblem& problem, const Mesh& mesh,
                        const TranscriptionOptions& options,
                        std::shared_ptr<const TranscriptionWorkspace>* out_ws) {
  auto ws = std::make_shared<const TranscriptionWorkspace>(
      TranscriptionWorkspace::build(problem, mesh, options));
  if (out_ws) *out_ws = ws;

  NLPProblem nlp;
  nlp.n = ws->layout.total;
  nlp.objective = [ws](const Eigen::VectorXd& z) { return assemble_cost(*ws, z); };
  nlp.m_eq = ws->partition.m_eq();
  nlp.equalities = [ws](const Eigen::VectorXd& z, Eigen::Ref<Eigen::VectorXd> out) {
    const ConstraintPartition& part = ws->partition;
    assemble_dynamics_defects(*ws, z, out.head(part.m_dynamics));
    if (part.m_boundary > 0) {
      assemble_boundary_constraints(*ws, z, out.segment(part.m_dynamics, part.m_boundary));
    }
    if (part.m_continuity > 0) {
      assemble_control_continuity(
          *ws, z, out.segment(part.m_dynamics + part.m_boundary, part.m_continuity));
    }
  };
  nlp.m_in = ws->partition.m_path;
  nlp.inequalities = [ws](const Eigen::VectorXd& z, Eigen::Ref<Eigen::VectorXd> out) {
    assemble_path_constraints(*ws, z, out);
  };
  nlp.ineq_lower = ws->path_lower;
  nlp.ineq_upper = ws->path_upper;
  const double inf = std::numeric_limits<double>::infinity();
  nlp.lower = Eigen::VectorXd::Constant(nlp.n, -inf);
  nlp.upper = Eigen::VectorXd::Constant(nlp.n, inf);
  return nlp;
}

}  // namespace gegopt
