#include "gegopt/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gegopt {

namespace {

constexpr double kGoldenRatio = 1.6180339887498948482;

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

}  // namespace

void AdaptParams::validate() const {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(eps_ES > 0.0)) throw std::invalid_argument("edge spacing must be positive");
  if (!(eps_R > 0.0) || !(eps_coeff > 0.0)) {
    throw std::invalid_argument("acceptance thresholds must be positive");
  }
  if (k_max < 0) throw std::invalid_argument("split budget must be nonnegative");
  if (N_bar < 1 || Lx_bar < 1 || Lu_bar < 1) {
    throw std::invalid_argument("p-refinement increments must be at least 1");
  }
  if (N_max < 1 || Lx_max < 1 || Lu_max < 1) {
    throw std::invalid_argument("degree caps must be positive");
  }
}

const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::accept: return "accept";
    case ActionKind::split: return "split";
    case ActionKind::p_increase: return "p-increase";
    case ActionKind::forced_golden_split: return "forced-golden-split";
    case ActionKind::capped_accept_with_warning: return "capped-accept-with-warning";
  }
  return "unknown";
}

NodeSet midpoints(const GegenbauerParam& alpha, int N, const Element& element) {
  const NodeSet aug = augmented_collocation_nodes(alpha, N, element);
  NodeSet mids;
  mids.degree = N;
  mids.nodes.resize(aug.size() - 1);
  for (std::size_t i = 0; i + 1 < aug.size(); ++i) {
    mids.nodes[i] = 0.5 * (aug[i] + aug[i + 1]);
  }
  return mids;
}

Eigen::MatrixXd residual_matrix(const OCProblem& problem, const GegenbauerParam& alpha,
                                const MeshElement& element,
                                const Eigen::Ref<const Eigen::MatrixXd>& state_coeffs,
                                const Eigen::Ref<const Eigen::MatrixXd>& control_coeffs,
                                RowParamMode row_mode) {
  const Element& domain = element.domain;
  const ElementConfig& cfg = element.config;
  const NodeSet mids = midpoints(alpha, cfg.N, domain);
  const RowParamSpec spec{row_mode, alpha};
  std::vector<GegenbauerParam> params;
  params.reserve(mids.size());
  for (std::size_t i = 0; i < mids.size(); ++i) {
    params.push_back(select_row_param(spec, cfg.Mbar, domain, mids[i]));
  }
  const IntegrationMatrix check = build_obgim(domain, mids, cfg.Mbar, params);

  const Eigen::MatrixXd Bx_mid = basis_matrix(alpha, cfg.Lx, domain, mids.nodes);
  const Eigen::MatrixXd x_mid = Bx_mid * state_coeffs;
  const Eigen::VectorXd x_left =
      state_coeffs.transpose() * alternating_ones(cfg.Lx + 1);

  const int n_x = problem.n_x;
  const double scale = 0.5 * (problem.tf - problem.t0);
  Eigen::MatrixXd R(static_cast<Eigen::Index>(mids.size()), n_x);
  Eigen::VectorXd fval(n_x);

  // dynamics samples per distinct adjoint set
  std::vector<std::vector<double>> distinct;
  std::vector<Eigen::MatrixXd> F;
  std::vector<std::size_t> row_set(mids.size());
  for (std::size_t i = 0; i < mids.size(); ++i) {
    const std::vector<double>& nodes = check.adjoint_nodes[i].nodes;
    std::size_t found = distinct.size();
    for (std::size_t d = 0; d < distinct.size(); ++d) {
      if (distinct[d] == nodes) {
        found = d;
        break;
      }
    }
    if (found == distinct.size()) {
      distinct.push_back(nodes);
      const Eigen::MatrixXd Bx = basis_matrix(alpha, cfg.Lx, domain, nodes);
      const Eigen::MatrixXd Bu = basis_matrix(alpha, cfg.Lu, domain, nodes);
      const Eigen::MatrixXd X = Bx * state_coeffs;
      const Eigen::MatrixXd U = Bu * control_coeffs;
      Eigen::MatrixXd Fd(X.rows(), n_x);
      for (Eigen::Index q = 0; q < X.rows(); ++q) {
        const double t =
            affine_from_tau(nodes[static_cast<std::size_t>(q)], problem.t0, problem.tf);
        try {
          problem.dynamics(X.row(q).transpose(), U.row(q).transpose(), t, fval);
        } catch (const std::exception& err) {
          std::ostringstream os;
          os << "residual evaluation failed at midpoint row, t = " << t << ": "
             << err.what();
          throw std::runtime_error(os.str());
        }
        Fd.row(q) = fval.transpose();
      }
      F.push_back(std::move(Fd));
    }
    row_set[i] = found;
  }

  for (std::size_t i = 0; i < mids.size(); ++i) {
    const Eigen::RowVectorXd integral =
        check.entries.row(static_cast<Eigen::Index>(i)) * F[row_set[i]];
    for (int r = 0; r < n_x; ++r) {
      R(static_cast<Eigen::Index>(i), r) =
          std::abs(x_mid(static_cast<Eigen::Index>(i), r) - x_left(r) - scale * integral(r));
    }
  }
  return R;
}

bool condition_A(const Eigen::MatrixXd& residual, double eps_R) {
  return residual.size() == 0 || residual.maxCoeff() < eps_R;
}

bool condition_B(const Eigen::Ref<const Eigen::MatrixXd>& state_coeffs,
                 const Eigen::Ref<const Eigen::MatrixXd>& control_coeffs, double eps_coeff) {
  const double worst_state = state_coeffs.row(state_coeffs.rows() - 1).cwiseAbs().maxCoeff();
  const double worst_control =
      control_coeffs.row(control_coeffs.rows() - 1).cwiseAbs().maxCoeff();
  return worst_state < eps_coeff && worst_control < eps_coeff;
}

std::optional<Eigen::VectorXd> beta_vector(const Eigen::MatrixXd& residual) {
  Eigen::Index i_max = 0, j_max = 0;
  residual.maxCoeff(&i_max, &j_max);
  const Eigen::VectorXd column = residual.col(j_max);
  const double mean = column.mean();
  if (mean == 0.0) return std::nullopt;
  return column / mean;
}

std::vector<std::pair<int, double>> beta_peaks(const Eigen::VectorXd& beta) {
  std::vector<std::pair<int, double>> peaks;
  const int n = static_cast<int>(beta.size());
  if (n < 2) return peaks;
  if (beta(0) > beta(1)) peaks.emplace_back(0, beta(0));
  for (int i = 1; i + 1 < n; ++i) {
    if (beta(i - 1) < beta(i) && beta(i) > beta(i + 1)) peaks.emplace_back(i, beta(i));
  }
  if (beta(n - 1) > beta(n - 2)) peaks.emplace_back(n - 1, beta(n - 1));
  return peaks;
}

RefinementAction decide(const Element& element, const ElementConfig& config,
                        const GegenbauerParam& alpha, const ElementReport& report,
                        const AdaptParams& params, int splits_remaining) {
  RefinementAction action;
  const bool can_raise =
      config.N < params.N_max || config.Lx < params.Lx_max || config.Lu < params.Lu_max;
  const double golden = element.left + element.length() / kGoldenRatio;

  auto p_increase = [&]() {
    action.kind = ActionKind::p_increase;
    action.raise_N = config.N < params.N_max;
    action.raise_Lx = config.Lx < params.Lx_max;
    action.raise_Lu = config.Lu < params.Lu_max;
  };

  std::vector<std::pair<int, double>> over;
  for (const auto& peak : report.peaks) {
    if (peak.second > params.rho) over.push_back(peak);
  }

  if (over.empty()) {
    // uniform error
    if (can_raise) {
      p_increase();
    } else if (element.length() >= params.eps_ES && splits_remaining >= 1) {
      action.kind = ActionKind::forced_golden_split;
      action.split_points = {golden};
    } else {
      action.kind = ActionKind::capped_accept_with_warning;
    }
    return action;
  }

  if (element.length() < params.eps_ES) {
    // too small to divide further
    if (can_raise) {
      p_increase();
    } else {
      action.kind = ActionKind::capped_accept_with_warning;
    }
    return action;
  }

  if (splits_remaining <= 0) {
    if (can_raise) {
      p_increase();
    } else {
      action.kind = ActionKind::capped_accept_with_warning;
    }
    return action;
  }

  const NodeSet mids = midpoints(alpha, config.N, element);
  std::vector<std::pair<double, double>> candidates;  // (location, beta)
  for (const auto& [index, value] : over) {
    const double p = mids[static_cast<std::size_t>(index)];
    if (p - element.left < params.eps_ES || element.right - p < params.eps_ES) {
      continue;  // edge point, discarded
    }
    candidates.emplace_back(p, value);
  }

  if (candidates.empty()) {
    action.kind = ActionKind::forced_golden_split;
    action.split_points = {golden};
    return action;
  }
  if (static_cast<int>(candidates.size()) > splits_remaining) {
    // keep the strongest peaks the budget allows
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    candidates.resize(static_cast<std::size_t>(splits_remaining));
  }
  action.kind = ActionKind::split;
  for (const auto& [p, value] : candidates) action.split_points.push_back(p);
  std::sort(action.split_points.begin(), action.split_points.end());
  return action;
}

std::string IterationRecord::format() const {
  std::ostringstream os;
  os.precision(10);
  os << "iter " << iteration << ": K=" << K << " J=" << objective
     << " status=" << to_string(solver_status) << " viol=" << max_violation
     << " interfaces=[";
  for (std::size_t i = 0; i < interfaces.size(); ++i) {
    if (i > 0) os << ", ";
    os << interfaces[i];
  }
  os << "]";
  for (std::size_t k = 0; k < element_max_residual.size(); ++k) {
    os << " | elem " << k + 1 << ": maxR=" << element_max_residual[k] << " "
       << element_actions[k];
  }
  return os.str();
}

namespace {

std::vector<double> mesh_interfaces(const Mesh& mesh) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(mesh.size()) + 1);
  pts.push_back(mesh.elements.front().domain.left);
  for (const MeshElement& e : mesh.elements) pts.push_back(e.domain.right);
  return pts;
}

// Coefficients for the new mesh, least-squares fitted to the previous
// trajectory at each element's augmented nodes; unchanged elements copy
// their blocks bitwise.
Eigen::VectorXd warm_start(const SpectralSolution& previous, const Mesh& new_mesh,
                           const DecisionLayout& new_layout) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(new_layout.total);
  for (int k = 0; k < new_mesh.size(); ++k) {
    const MeshElement& me = new_mesh.elements[static_cast<std::size_t>(k)];
    int copy_from = -1;
    for (int j = 0; j < previous.mesh.size(); ++j) {
      const MeshElement& old = previous.mesh.elements[static_cast<std::size_t>(j)];
      if (old.domain == me.domain && old.config.Lx == me.config.Lx &&
          old.config.Lu == me.config.Lu) {
        copy_from = j;
        break;
      }
    }
    if (copy_from >= 0) {
      new_layout.state_coeffs(z, k) = previous.layout.state_coeffs(previous.coeffs, copy_from);
      new_layout.control_coeffs(z, k) =
          previous.layout.control_coeffs(previous.coeffs, copy_from);
      continue;
    }
    const NodeSet nodes =
        augmented_collocation_nodes(new_mesh.alpha, me.config.N, me.domain);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(nodes.size()), previous.n_x);
    Eigen::MatrixXd U(static_cast<Eigen::Index>(nodes.size()), previous.n_u);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = previous.state_at_tau(nodes[i]).transpose();
      U.row(static_cast<Eigen::Index>(i)) = previous.control_at_tau(nodes[i]).transpose();
    }
    const Eigen::MatrixXd Bx = basis_matrix(new_mesh.alpha, me.config.Lx, me.domain, nodes.nodes);
    const Eigen::MatrixXd Bu = basis_matrix(new_mesh.alpha, me.config.Lu, me.domain, nodes.nodes);
    new_layout.state_coeffs(z, k) = Bx.colPivHouseholderQr().solve(X);
    new_layout.control_coeffs(z, k) = Bu.colPivHouseholderQr().solve(U);
  }
  return z;
}

}  // namespace

AdaptiveResult run_adaptive(const OCProblem& problem, const Mesh& initial_mesh,
                            const AdaptParams& params, const SolveOptions& nlp_options,
                            const AdaptiveOptions& options) {
  problem.validate();
  initial_mesh.validate();
  params.validate();

  AdaptiveResult result;
  Mesh mesh = initial_mesh;
  Eigen::VectorXd z0;
  bool have_warm_start = false;
  SpectralSolution current;

  for (int iteration = 1; iteration <= options.max_outer; ++iteration) {
    std::shared_ptr<const TranscriptionWorkspace> ws;
    const NLPProblem nlp = assemble_nlp(problem, mesh, {options.row_mode}, &ws);
    if (!have_warm_start) {
      z0 = Eigen::VectorXd::Constant(nlp.n, options.init_coeff);
    }
    const SolveReport rep = solve_with(options.solver, nlp, z0, nlp_options);

    current = SpectralSolution{};
    current.mesh = mesh;
    current.layout = ws->layout;
    current.coeffs = rep.z;
    current.objective = rep.objective;
    current.n_x = problem.n_x;
    current.n_u = problem.n_u;
    current.t0 = problem.t0;
    current.tf = problem.tf;
    current.refresh_interface_states();
    result.nlp_report = rep;

    IterationRecord record;
    record.iteration = iteration;
    record.K = mesh.size();
    record.interfaces = mesh_interfaces(mesh);
    record.objective = rep.objective;
    record.solver_status = rep.status;
    record.max_violation = rep.max_violation;

    // per-element diagnostics and decisions
    std::vector<ElementReport> reports(static_cast<std::size_t>(mesh.size()));
    int budget = params.k_max - result.splits_used;
    bool all_accept = true;
    for (int k = 0; k < mesh.size(); ++k) {
      const MeshElement& me = mesh.elements[static_cast<std::size_t>(k)];
      ElementReport& er = reports[static_cast<std::size_t>(k)];
      const auto A = ws->layout.state_coeffs(rep.z, k);
      const auto B = ws->layout.control_coeffs(rep.z, k);
      er.residual = residual_matrix(problem, mesh.alpha, me, A, B, options.row_mode);
      Eigen::Index i_max = 0, j_max = 0;
      er.max_residual = er.residual.maxCoeff(&i_max, &j_max);
      er.i_max = static_cast<int>(i_max);
      er.j_max = static_cast<int>(j_max);
      er.condition_A = condition_A(er.residual, params.eps_R);
      er.condition_B = condition_B(A, B, params.eps_coeff);

      if (er.condition_A && er.condition_B) {
        er.action.kind = ActionKind::accept;
      } else {
        const auto beta = beta_vector(er.residual);
        if (!beta.has_value()) {
          er.action.kind = ActionKind::accept;  // uniformly zero residual
        } else {
          er.beta = *beta;
          er.peaks = beta_peaks(er.beta);
          er.action = decide(me.domain, me.config, mesh.alpha, er, params, budget);
          if (er.action.kind == ActionKind::split ||
              er.action.kind == ActionKind::forced_golden_split) {
            budget -= static_cast<int>(er.action.split_points.size());
          }
        }
      }
      if (er.action.kind != ActionKind::accept &&
          er.action.kind != ActionKind::capped_accept_with_warning) {
        all_accept = false;
      }

      record.element_max_residual.push_back(er.max_residual);
      std::ostringstream os;
      os << to_string(er.action.kind);
      if (!er.action.split_points.empty()) {
        os << "@{";
        for (std::size_t i = 0; i < er.action.split_points.size(); ++i) {
          if (i > 0) os << ", ";
          os << er.action.split_points[i];
        }
        os << "}";
      }
      record.element_actions.push_back(os.str());
    }
    result.trace.push_back(record);
    result.final_reports = reports;

    if (!options.enabled || all_accept) {
      result.accepted = all_accept || !options.enabled;
      for (int k = 0; k < mesh.size(); ++k) {
        if (reports[static_cast<std::size_t>(k)].action.kind ==
            ActionKind::capped_accept_with_warning) {
          std::ostringstream os;
          os << "element " << k + 1 << " accepted at its degree caps with max residual "
             << reports[static_cast<std::size_t>(k)].max_residual;
          result.warnings.push_back(os.str());
        }
      }
      break;
    }
    if (iteration == options.max_outer) {
      result.warnings.push_back("refinement iteration limit reached before acceptance");
      break;
    }

    // apply the refinement actions
    Mesh refined{{}, mesh.alpha};
    for (int k = 0; k < mesh.size(); ++k) {
      const MeshElement& me = mesh.elements[static_cast<std::size_t>(k)];
      const RefinementAction& action = reports[static_cast<std::size_t>(k)].action;
      switch (action.kind) {
        case ActionKind::accept:
        case ActionKind::capped_accept_with_warning:
          refined.elements.push_back(me);
          break;
        case ActionKind::p_increase: {
          MeshElement bumped = me;
          if (action.raise_N) {
            bumped.config.N = std::min(me.config.N + params.N_bar, params.N_max);
          }
          if (action.raise_Lx) {
            bumped.config.Lx = std::min(me.config.Lx + params.Lx_bar, params.Lx_max);
          }
          if (action.raise_Lu) {
            bumped.config.Lu = std::min(me.config.Lu + params.Lu_bar, params.Lu_max);
          }
          refined.elements.push_back(bumped);
          break;
        }
        case ActionKind::split:
        case ActionKind::forced_golden_split: {
          double left = me.domain.left;
          for (double p : action.split_points) {
            refined.elements.push_back({Element(left, p), me.config});
            left = p;
          }
          refined.elements.push_back({Element(left, me.domain.right), me.config});
          result.splits_used += static_cast<int>(action.split_points.size());
          break;
        }
      }
    }
    refined.validate();

    const DecisionLayout new_layout =
        DecisionLayout::build(problem.n_x, problem.n_u, refined);
    z0 = warm_start(current, refined, new_layout);
    have_warm_start = true;
    mesh = refined;
  }

  result.solution = current;
  return result;
}

}  // namespace gegopt
