#include "gegopt/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gegopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OCProblem make_example1() {
  OCProblem p;
  p.name = "example1";
  p.n_x = 1;
  p.n_u = 1;
  p.t0 = 0.0;
  p.tf = 1.0;
  p.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double t,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = -std::tan(std::numbers::pi / 8.0 * u(0) * u(0) * u(0) + t);
  };
  p.lagrangian = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t) {
    return std::sin(3.0 * std::numbers::pi * t) * x(0);
  };
  p.n_psi = 2;
  p.boundary = [](const Eigen::VectorXd& x0, double, const Eigen::VectorXd& xf, double,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = x0(0) - 1.0;
    out(1) = xf(0);
  };
  p.u_lower = Eigen::VectorXd::Constant(1, 0.0);
  p.u_upper = Eigen::VectorXd::Constant(1, 1.0);
  return p;
}

OCProblem make_breakwell() {
  OCProblem p;
  p.name = "breakwell";
  p.n_x = 2;
  p.n_u = 1;
  p.t0 = 0.0;
  p.tf = 1.0;
  p.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = x(1);
    out(1) = u(0);
  };
  p.lagrangian = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    return 0.5 * u(0) * u(0);
  };
  p.n_psi = 4;
  p.boundary = [](const Eigen::VectorXd& x0, double, const Eigen::VectorXd& xf, double,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = x0(0);
    out(1) = xf(0);
    out(2) = x0(1) - 1.0;
    out(3) = xf(1) + 1.0;
  };
  p.n_C = 1;
  p.path = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double,
              Eigen::Ref<Eigen::VectorXd> out) { out(0) = x(0); };
  p.path_lower = Eigen::VectorXd::Constant(1, -kInf);
  p.path_upper = Eigen::VectorXd::Constant(1, 0.1);
  return p;
}

OCProblem make_example3() {
  OCProblem p;
  p.name = "example3";
  p.n_x = 1;
  p.n_u = 1;
  p.t0 = 0.0;
  p.tf = 2.0;
  p.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = -std::abs(x(0) - 0.5) + 2.0 * (u(0) + 1.0) / (t + 2.0) - 0.5;
  };
  p.lagrangian = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double t) {
    return u(0) * (u(0) - t);
  };
  p.n_psi = 1;
  p.boundary = [](const Eigen::VectorXd& x0, double, const Eigen::VectorXd&, double,
                  Eigen::Ref<Eigen::VectorXd> out) { out(0) = x0(0) - 0.1; };
  p.x_lower = Eigen::VectorXd::Constant(1, 0.0);
  p.x_upper = Eigen::VectorXd::Constant(1, 1.0);
  p.u_lower = Eigen::VectorXd::Constant(1, -1.0);
  p.u_upper = Eigen::VectorXd::Constant(1, 1.0);
  return p;
}

}  // namespace

OCProblem registry_get(const std::string& name) {
  if (name == "example1") return make_example1();
  if (name == "breakwell") return make_breakwell();
  if (name == "example3") return make_example3();
  std::ostringstream os;
  os << "unknown problem '" << name << "'; registered problems:";
  for (const std::string& known : registry_names()) os << " " << known;
  throw std::invalid_argument(os.str());
}

std::vector<std::string> registry_names() { return {"example1", "breakwell", "example3"}; }

double breakwell_exact_control(double t) {
  if (t <= 0.3) return 200.0 * t / 9.0 - 20.0 / 3.0;
  if (t <= 0.7) return 0.0;
  return -200.0 * t / 9.0 + 140.0 / 9.0;
}

}  // namespace gegopt
