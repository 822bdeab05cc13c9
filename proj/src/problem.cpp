#include "gegopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gegopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void OCProblem::validate() const {
  require(n_x >= 1 && n_u >= 1, "problem needs at least one state and one control");
  require(n_C >= 0 && n_psi >= 0, "constraint counts must be nonnegative");
  require(tf > t0, "horizon must satisfy tf > t0");
  require(static_cast<bool>(dynamics), "dynamics callback is required");
  if (n_C > 0) {
    require(static_cast<bool>(path), "path callback required when n_C > 0");
    require(path_lower.size() == n_C && path_upper.size() == n_C,
            "path bounds must have length n_C");
    for (int i = 0; i < n_C; ++i) {
      require(path_lower(i) <= path_upper(i), "path bounds must be ordered");
    }
  }
  if (n_psi > 0) require(static_cast<bool>(boundary), "boundary callback required");
  auto check_box = [](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int n,
                      const char* what) {
    require((lo.size() == 0 && hi.size() == 0) || (lo.size() == n && hi.size() == n),
            std::string(what) + " box bounds must be empty or full-size");
    for (int i = 0; i < lo.size(); ++i) {
      require(lo(i) <= hi(i), std::string(what) + " box bounds must be ordered");
    }
  };
  check_box(x_lower, x_upper, n_x, "state");
  check_box(u_lower, u_upper, n_u, "control");
}

void Mesh::validate() const {
  if (elements.empty()) throw std::invalid_argument("mesh has no elements");
  if (elements.front().domain.left != -1.0 || elements.back().domain.right != 1.0) {
    throw std::invalid_argument("mesh must start at -1 and end at +1");
  }
  for (std::size_t k = 0; k + 1 < elements.size(); ++k) {
    if (elements[k].domain.right != elements[k + 1].domain.left) {
      std::ostringstream os;
      os << "mesh elements " << k << " and " << k + 1 << " do not share an interface";
      throw std::invalid_argument(os.str());
    }
  }
  for (const MeshElement& e : elements) {
    const ElementConfig& c = e.config;
    if (c.N < 1 || c.Lx < 1 || c.Lu < 0 || c.M < 1 || c.Mbar < 1) {
      throw std::invalid_argument("element configuration out of range");
    }
  }
}

Mesh Mesh::uniform(int K, const ElementConfig& config, const GegenbauerParam& alpha) {
  if (K < 1) throw std::invalid_argument("mesh needs at least one element");
  Mesh mesh{{}, alpha};
  mesh.elements.reserve(static_cast<std::size_t>(K));
  double left = -1.0;
  for (int k = 1; k <= K; ++k) {
    const double right = k == K ? 1.0 : -1.0 + 2.0 * k / K;
    mesh.elements.push_back({Element(left, right), config});
    left = right;
  }
  mesh.validate();
  return mesh;
}

Mesh Mesh::with_interfaces(const std::vector<double>& interior, const ElementConfig& config,
                           const GegenbauerParam& alpha) {
  std::vector<double> pts = interior;
  std::sort(pts.begin(), pts.end());
  Mesh mesh{{}, alpha};
  double left = -1.0;
  for (double p : pts) {
    mesh.elements.push_back({Element(left, p), config});
    left = p;
  }
  mesh.elements.push_back({Element(left, 1.0), config});
  mesh.validate();
  return mesh;
}

double affine_to_tau(double t, double t0, double tf) {
  if (!(tf > t0)) throw std::domain_error("horizon must satisfy tf > t0");
  if (t == t0) return -1.0;
  if (t == tf) return 1.0;
  return (2.0 * t - t0 - tf) / (tf - t0);
}

double affine_from_tau(double tau, double t0, double tf) {
  if (!(tf > t0)) throw std::domain_error("horizon must satisfy tf > t0");
  if (tau == -1.0) return t0;
  if (tau == 1.0) return tf;
  return 0.5 * ((tf - t0) * tau + t0 + tf);
}

DecisionLayout DecisionLayout::build(int n_x, int n_u, const Mesh& mesh) {
  DecisionLayout layout;
  layout.n_x = n_x;
  layout.n_u = n_u;
  int off = 0;
  for (const MeshElement& e : mesh.elements) {
    layout.a_offset.push_back(off);
    layout.Lx.push_back(e.config.Lx);
    off += n_x * (e.config.Lx + 1);
    layout.b_offset.push_back(off);
    layout.Lu.push_back(e.config.Lu);
    off += n_u * (e.config.Lu + 1);
  }
  layout.total = off;
  return layout;
}

int SpectralSolution::element_of_tau(double tau) const {
  if (tau < -1.0 || tau > 1.0) throw std::domain_error("tau outside [-1, 1]");
  // interfaces belong to the element on their left
  for (int k = 0; k < mesh.size(); ++k) {
    if (tau <= mesh.elements[static_cast<std::size_t>(k)].domain.right) return k;
  }
  return mesh.size() - 1;
}

Eigen::VectorXd SpectralSolution::state_at_tau(double tau) const {
  const int k = element_of_tau(tau);
  const MeshElement& e = mesh.elements[static_cast<std::size_t>(k)];
  const auto row = basis_row(mesh.alpha, e.config.Lx, e.domain, tau);
  const Eigen::Map<const Eigen::RowVectorXd> b(row.data(),
                                               static_cast<Eigen::Index>(row.size()));
  return (b * layout.state_coeffs(coeffs, k)).transpose();
}

Eigen::VectorXd SpectralSolution::control_at_tau(double tau) const {
  const int k = element_of_tau(tau);
  const MeshElement& e = mesh.elements[static_cast<std::size_t>(k)];
  const auto row = basis_row(mesh.alpha, e.config.Lu, e.domain, tau);
  const Eigen::Map<const Eigen::RowVectorXd> b(row.data(),
                                               static_cast<Eigen::Index>(row.size()));
  return (b * layout.control_coeffs(coeffs, k)).transpose();
}

void SpectralSolution::refresh_interface_states() {
  interface_states.resize(mesh.size() + 1, n_x);
  interface_states.row(0) = state_at_tau(-1.0).transpose();
  for (int k = 0; k < mesh.size(); ++k) {
    interface_states.row(k + 1) =
        state_at_tau(mesh.elements[static_cast<std::size_t>(k)].domain.right).transpose();
  }
}

Trajectory sample_solution(const SpectralSolution& sol, const std::vector<double>& times) {
  Trajectory traj;
  traj.t = times;
  traj.x.resize(static_cast<Eigen::Index>(times.size()), sol.n_x);
  traj.u.resize(static_cast<Eigen::Index>(times.size()), sol.n_u);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < sol.t0 || t > sol.tf) {
      std::ostringstream os;
      os << "sample time " << t << " outside horizon [" << sol.t0 << ", " << sol.tf << "]";
      throw std::domain_error(os.str());
    }
    const double tau = affine_to_tau(t, sol.t0, sol.tf);
    traj.x.row(static_cast<Eigen::Index>(i)) = sol.state_at_tau(tau).transpose();
    traj.u.row(static_cast<Eigen::Index>(i)) = sol.control_at_tau(tau).transpose();
  }
  return traj;
}

}  // namespace gegopt
