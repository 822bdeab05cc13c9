#include "gegopt/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace gegopt {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::line_search_failure: return "line-search-failure";
  }
  return "unknown";
}

namespace {

constexpr double kFdScale = 1.4901161193847656e-08;   // sqrt(machine epsilon)
constexpr double kCentralScale = 6.0554544523933395e-06;  // cbrt(machine epsilon)
constexpr double kCentralSwitch = 5e-5;  // projected-gradient level for refinement

double fd_step(double zi, double scale) { return scale * (1.0 + std::abs(zi)); }

}  // namespace

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& z, double scale) {
  if (scale <= 0.0) scale = kFdScale;
  const double base = f(z);
  if (!std::isfinite(base)) {
    throw std::runtime_error("fd_gradient: non-finite objective at the base point");
  }
  Eigen::VectorXd g(z.size());
  Eigen::VectorXd zp = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = fd_step(z(i), scale);
    zp(i) = z(i) + h;
    const double fp = f(zp);
    zp(i) = z(i);
    if (!std::isfinite(fp)) {
      std::ostringstream os;
      os << "fd_gradient: non-finite objective when perturbing index " << i;
      throw std::runtime_error(os.str());
    }
    g(i) = (fp - base) / h;
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)>& f, int m,
    const Eigen::VectorXd& z) {
  Eigen::VectorXd base(m), pert(m);
  f(z, base);
  for (int j = 0; j < m; ++j) {
    if (!std::isfinite(base(j))) {
      std::ostringstream os;
      os << "fd_jacobian: non-finite output component " << j << " at the base point";
      throw std::runtime_error(os.str());
    }
  }
  Eigen::MatrixXd J(m, z.size());
  Eigen::VectorXd zp = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = fd_step(z(i), kFdScale);
    zp(i) = z(i) + h;
    f(zp, pert);
    zp(i) = z(i);
    for (int j = 0; j < m; ++j) {
      if (!std::isfinite(pert(j))) {
        std::ostringstream os;
        os << "fd_jacobian: non-finite output component " << j << " when perturbing index "
           << i;
        throw std::runtime_error(os.str());
      }
    }
    J.col(i) = (pert - base) / h;
  }
  return J;
}

namespace {

// Augmented-Lagrangian machinery over the slack-extended variable v = [z; s]:
// constraints c(v) = [eq(z); in(z) - s], box bounds on z (if any) and on s.
struct ALProblem {
  const NLPProblem& p;
  int nz, ms, n, mc;
  Eigen::VectorXd lower, upper;

  explicit ALProblem(const NLPProblem& problem)
      : p(problem),
        nz(problem.n),
        ms(problem.m_in),
        n(problem.n + problem.m_in),
        mc(problem.m_eq + problem.m_in) {
    const double inf = std::numeric_limits<double>::infinity();
    lower = Eigen::VectorXd::Constant(n, -inf);
    upper = Eigen::VectorXd::Constant(n, inf);
    if (p.lower.size() == nz) lower.head(nz) = p.lower;
    if (p.upper.size() == nz) upper.head(nz) = p.upper;
    if (ms > 0) {
      lower.tail(ms) = p.ineq_lower;
      upper.tail(ms) = p.ineq_upper;
    }
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const {
    return v.cwiseMax(lower).cwiseMin(upper);
  }

  // objective and constraint vector in one pass; false on non-finite values
  bool evaluate(const Eigen::VectorXd& v, double& f, Eigen::VectorXd& c) const {
    const Eigen::VectorXd z = v.head(nz);
    f = p.objective(z);
    if (!std::isfinite(f)) return false;
    c.resize(mc);
    if (p.m_eq > 0) p.equalities(z, c.head(p.m_eq));
    if (ms > 0) {
      p.inequalities(z, c.segment(p.m_eq, ms));
      c.tail(ms) -= v.tail(ms);
    }
    return c.allFinite();
  }

  double merit(double f, const Eigen::VectorXd& c, const Eigen::VectorXd& lambda,
               double mu) const {
    return f + lambda.dot(c) + 0.5 * mu * c.squaredNorm();
  }

  // gradient of the augmented Lagrangian by one finite-difference sweep of
  // the combined (objective, constraints) evaluation over the z coordinates;
  // the slack block is analytic. Central differences refine the endgame where
  // forward-difference truncation error would dominate.
  bool gradient(const Eigen::VectorXd& v, double f0, const Eigen::VectorXd& c0,
                const Eigen::VectorXd& lambda, double mu, bool central,
                Eigen::VectorXd& g) const {
    const Eigen::VectorXd w = lambda + mu * c0;
    g.resize(n);
    Eigen::VectorXd vp = v;
    double fp, fm;
    Eigen::VectorXd cp, cm;
    for (int i = 0; i < nz; ++i) {
      const double h = fd_step(v(i), central ? kCentralScale : kFdScale);
      vp(i) = v(i) + h;
      if (!evaluate(vp, fp, cp)) return false;
      if (central) {
        vp(i) = v(i) - h;
        if (!evaluate(vp, fm, cm)) return false;
        vp(i) = v(i);
        g(i) = (fp - fm) / (2.0 * h) + w.dot(cp - cm) / (2.0 * h);
      } else {
        vp(i) = v(i);
        g(i) = (fp - f0) / h + w.dot(cp - c0) / h;
      }
    }
    if (ms > 0) g.tail(ms) = -w.tail(ms);
    return true;
  }
};

struct InnerResult {
  double pg_norm = std::numeric_limits<double>::infinity();
  long iterations = 0;
  bool line_search_failed = false;
  bool gradient_failed = false;
};

// Projected quasi-Newton (dense BFGS on the inverse Hessian) with a
// backtracking Armijo line search along the projected path.
InnerResult inner_minimize(const ALProblem& al, Eigen::VectorXd& v,
                           const Eigen::VectorXd& lambda, double mu, double tol,
                           int max_steps) {
  InnerResult res;
  const int n = al.n;
  double f0;
  Eigen::VectorXd c0;
  if (!al.evaluate(v, f0, c0)) {
    res.gradient_failed = true;
    return res;
  }
  double phi = al.merit(f0, c0, lambda, mu);
  bool central = false;
  Eigen::VectorXd g(n);
  if (!al.gradient(v, f0, c0, lambda, mu, central, g)) {
    res.gradient_failed = true;
    return res;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;
  Eigen::VectorXd d(n), vt(n), gt(n), c1;

  for (int it = 0; it < max_steps; ++it) {
    res.pg_norm = (v - al.clamp(v - g)).cwiseAbs().maxCoeff();
    if (!central && tol < kCentralSwitch && res.pg_norm <= kCentralSwitch) {
      central = true;  // forward-difference noise floor reached
      if (!al.gradient(v, f0, c0, lambda, mu, central, g)) {
        res.gradient_failed = true;
        return res;
      }
      res.pg_norm = (v - al.clamp(v - g)).cwiseAbs().maxCoeff();
    }
    if (res.pg_norm <= tol && (central || tol >= kCentralSwitch)) return res;

    d = -(H * g);
    if (d.dot(g) > -1e-12 * d.norm() * g.norm()) {
      d = -g;
      H.setIdentity();
      h_is_identity = true;
    }

    double t = 1.0;
    bool accepted = false;
    double phi_t = 0.0, f1 = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      vt = al.clamp(v + t * d);
      if ((vt - v).cwiseAbs().maxCoeff() == 0.0) break;
      if (al.evaluate(vt, f1, c1)) {
        phi_t = al.merit(f1, c1, lambda, mu);
        if (phi_t <= phi + 1e-4 * g.dot(vt - v)) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!h_is_identity) {  // retry once from a steepest-descent model
        H.setIdentity();
        h_is_identity = true;
        continue;
      }
      res.line_search_failed = true;
      return res;
    }

    ++res.iterations;
    if (!al.gradient(vt, f1, c1, lambda, mu, central, gt)) {
      res.gradient_failed = true;
      v = vt;
      return res;
    }
    const Eigen::VectorXd s = vt - v;
    const Eigen::VectorXd y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity) {
        H *= sy / y.squaredNorm();  // standard initial scaling
        h_is_identity = false;
      }
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      H += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
      H -= (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
    v = vt;
    g = gt;
    phi = phi_t;
    f0 = f1;
    c0 = c1;
  }
  res.pg_norm = (v - al.clamp(v - g)).cwiseAbs().maxCoeff();
  return res;
}

SolveReport solve_builtin(const NLPProblem& problem, const Eigen::VectorXd& z0,
                          const SolveOptions& opts) {
  if (z0.size() != problem.n) throw std::invalid_argument("initial point has wrong size");
  const ALProblem al(problem);

  Eigen::VectorXd v(al.n);
  v.head(al.nz) = z0;
  if (al.ms > 0) {
    Eigen::VectorXd gin(al.ms);
    problem.inequalities(z0, gin);
    v.tail(al.ms) = gin;
  }
  v = al.clamp(v);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(al.mc);
  double mu = opts.initial_penalty;
  double omega = al.mc == 0 ? opts.opt_tol : std::max(opts.opt_tol, 1e-3);
  double viol_prev = std::numeric_limits<double>::infinity();
  int ls_failures = 0;

  SolveReport report;
  report.status = SolveStatus::max_iter;

  double f = 0.0;
  Eigen::VectorXd c;
  for (int outer = 1; outer <= opts.max_iter; ++outer) {
    report.outer_iterations = outer;
    const InnerResult inner = inner_minimize(al, v, lambda, mu, omega, opts.max_inner);
    report.inner_iterations += inner.iterations;

    if (!al.evaluate(v, f, c)) {
      report.status = SolveStatus::line_search_failure;
      break;
    }
    const double viol = al.mc > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
    report.violation_history.push_back(viol);
    report.stationarity = inner.pg_norm;

    if (viol <= opts.feas_tol && inner.pg_norm <= opts.opt_tol) {
      report.status = SolveStatus::converged;
      break;
    }
    if (inner.gradient_failed || inner.line_search_failed) {
      if (++ls_failures >= 3) {
        report.status = SolveStatus::line_search_failure;
        break;
      }
    } else {
      ls_failures = 0;
    }

    if (al.mc == 0) {
      // unconstrained: the inner result is final
      report.status = inner.line_search_failed || inner.gradient_failed
                          ? SolveStatus::line_search_failure
                          : SolveStatus::max_iter;
      if (inner.pg_norm <= opts.opt_tol) report.status = SolveStatus::converged;
      break;
    }

    if (viol <= std::max(opts.feas_tol, 0.25 * viol_prev)) {
      lambda += mu * c;
      viol_prev = viol;
      omega = std::max(opts.opt_tol, 0.2 * omega);
    } else {
      mu = std::min(mu * opts.penalty_growth, opts.penalty_max);
      omega = std::max(opts.opt_tol, 0.5 * omega);
    }
  }

  report.z = v.head(al.nz);
  report.objective = problem.objective(report.z);

  // violation of the original problem statement
  double viol = 0.0;
  if (problem.m_eq > 0) {
    Eigen::VectorXd eq(problem.m_eq);
    problem.equalities(report.z, eq);
    viol = eq.cwiseAbs().maxCoeff();
  }
  if (problem.m_in > 0) {
    Eigen::VectorXd gin(problem.m_in);
    problem.inequalities(report.z, gin);
    const Eigen::VectorXd lo = problem.ineq_lower - gin;
    const Eigen::VectorXd hi = gin - problem.ineq_upper;
    viol = std::max(viol, lo.cwiseMax(0.0).maxCoeff());
    viol = std::max(viol, hi.cwiseMax(0.0).maxCoeff());
  }
  report.max_violation = viol;
  if (report.status == SolveStatus::converged && viol > opts.feas_tol) {
    report.status = SolveStatus::max_iter;  // never report a false convergence
  }
  return report;
}

std::map<std::string, SolverFn>& solver_registry() {
  static std::map<std::string, SolverFn> registry;
  return registry;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SolveReport solve(const NLPProblem& problem, const Eigen::VectorXd& z0,
                  const SolveOptions& opts) {
  return solve_builtin(problem, z0, opts);
}

void register_external_solver(const std::string& name, SolverFn adapter) {
  if (name.empty() || name == "builtin") {
    throw std::invalid_argument("solver name '" + name + "' is reserved");
  }
  std::lock_guard<std::mutex> lock(registry_mutex());
  solver_registry()[name] = std::move(adapter);
}

SolveReport solve_with(const std::string& solver_name, const NLPProblem& problem,
                       const Eigen::VectorXd& z0, const SolveOptions& opts) {
  if (solver_name.empty() || solver_name == "builtin") {
    return solve_builtin(problem, z0, opts);
  }
  SolverFn fn;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = solver_registry().find(solver_name);
    if (it == solver_registry().end()) {
      std::string names = "builtin";
      for (const auto& [key, value] : solver_registry()) names += ", " + key;
      throw std::invalid_argument("unknown solver '" + solver_name +
                                  "'; registered: " + names);
    }
    fn = it->second;
  }
  return fn(problem, z0, opts);
}

std::vector<std::string> registered_solvers() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names{"builtin"};
  for (const auto& [key, value] : solver_registry()) names.push_back(key);
  return names;
}

}  // namespace gegopt
