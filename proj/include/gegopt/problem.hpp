#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "gegopt/gegenbauer.hpp"

namespace gegopt {

using DynamicsFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                      double t, Eigen::Ref<Eigen::VectorXd> out)>;
using LagrangianFn =
    std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;
using TerminalCostFn = std::function<double(const Eigen::VectorXd& x0, double t0,
                                            const Eigen::VectorXd& xf, double tf)>;
using PathFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
                                  Eigen::Ref<Eigen::VectorXd> out)>;
using BoundaryFn = std::function<void(const Eigen::VectorXd& x0, double t0,
                                      const Eigen::VectorXd& xf, double tf,
                                      Eigen::Ref<Eigen::VectorXd> out)>;

/// Continuous optimal control problem in Bolza form on a fixed horizon.
struct OCProblem {
  std::string name;
  int n_x = 0;
  int n_u = 0;
  int n_C = 0;
  int n_psi = 0;
  double t0 = 0.0;
  double tf = 1.0;

  DynamicsFn dynamics;
  LagrangianFn lagrangian;        // null means zero
  TerminalCostFn terminal_cost;   // null means zero
  PathFn path;                    // required when n_C > 0
  Eigen::VectorXd path_lower, path_upper;
  BoundaryFn boundary;            // required when n_psi > 0
  Eigen::VectorXd x_lower, x_upper;  // optional state box (size n_x or empty)
  Eigen::VectorXd u_lower, u_upper;  // optional control box (size n_u or empty)
  bool continuous_controls = false;  // opt-in interface continuity constraints

  void validate() const;
};

/// Discretization knobs of one element.
struct ElementConfig {
  int N = 8;     // collocation count (N+2 augmented nodes)
  int Lx = 8;    // state expansion degree
  int Lu = 8;    // control expansion degree
  int M = 16;    // integration matrix order
  int Mbar = 4;  // residual-check matrix order
};

struct MeshElement {
  Element domain;
  ElementConfig config;
};

/// Partition of [-1,1] with per-element configuration and a global family
/// parameter.
struct Mesh {
  std::vector<MeshElement> elements;
  GegenbauerParam alpha{0.5};

  int size() const { return static_cast<int>(elements.size()); }
  void validate() const;  // elements must tile [-1,1] exactly

  static Mesh uniform(int K, const ElementConfig& config, const GegenbauerParam& alpha);
  /// Mesh with prescribed interior interfaces in transformed time.
  static Mesh with_interfaces(const std::vector<double>& interior,
                              const ElementConfig& config, const GegenbauerParam& alpha);
};

/// Affine map from original time in [t0,tf] to tau in [-1,1].
double affine_to_tau(double t, double t0, double tf);
double affine_from_tau(double tau, double t0, double tf);

/// Flat decision-vector layout: per element, the state coefficients
/// (state-major) followed by the control coefficients (control-major).
struct DecisionLayout {
  int n_x = 0, n_u = 0;
  std::vector<int> a_offset, b_offset;
  std::vector<int> Lx, Lu;
  int total = 0;

  static DecisionLayout build(int n_x, int n_u, const Mesh& mesh);

  /// (Lx+1) x n_x view of element k's state coefficients; column r holds
  /// the coefficients of state r.
  Eigen::Map<const Eigen::MatrixXd> state_coeffs(const Eigen::VectorXd& z, int k) const {
    return {z.data() + a_offset[static_cast<std::size_t>(k)],
            Lx[static_cast<std::size_t>(k)] + 1, n_x};
  }
  Eigen::Map<const Eigen::MatrixXd> control_coeffs(const Eigen::VectorXd& z, int k) const {
    return {z.data() + b_offset[static_cast<std::size_t>(k)],
            Lu[static_cast<std::size_t>(k)] + 1, n_u};
  }
  Eigen::Map<Eigen::MatrixXd> state_coeffs(Eigen::VectorXd& z, int k) const {
    return {z.data() + a_offset[static_cast<std::size_t>(k)],
            Lx[static_cast<std::size_t>(k)] + 1, n_x};
  }
  Eigen::Map<Eigen::MatrixXd> control_coeffs(Eigen::VectorXd& z, int k) const {
    return {z.data() + b_offset[static_cast<std::size_t>(k)],
            Lu[static_cast<std::size_t>(k)] + 1, n_u};
  }
};

/// Solved spectral coefficients on a mesh, samplable to trajectories.
struct SpectralSolution {
  Mesh mesh;
  DecisionLayout layout;
  Eigen::VectorXd coeffs;
  double objective = 0.0;
  int n_x = 0, n_u = 0;
  double t0 = 0.0, tf = 1.0;
  Eigen::MatrixXd interface_states;  // (K+1) x n_x, states at the mesh points

  void refresh_interface_states();

  int element_of_tau(double tau) const;  // interfaces resolve to the left element
  Eigen::VectorXd state_at_tau(double tau) const;
  Eigen::VectorXd control_at_tau(double tau) const;
};

struct Trajectory {
  std::vector<double> t;
  Eigen::MatrixXd x;  // one row per time, one column per state
  Eigen::MatrixXd u;
};

/// Sample states and controls at original-time points inside the horizon.
Trajectory sample_solution(const SpectralSolution& sol, const std::vector<double>& times);

}  // namespace gegopt
