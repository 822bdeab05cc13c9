#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gegopt/transcription.hpp"

using namespace gegopt;

namespace {

// interpolation-based coefficient fit, exact for polynomials of degree <= L
Eigen::VectorXd fit_coeffs(const GegenbauerParam& alpha, int L, const Element& e,
                           const std::function<double(double)>& f_of_tau) {
  const NodeSet nodes = augmented_collocation_nodes(alpha, std::max(L, 1), e);
  Eigen::MatrixXd B(static_cast<Eigen::Index>(nodes.size()), L + 1);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = basis_row(alpha, L, e, nodes[i]);
    for (int j = 0; j <= L; ++j) B(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    rhs(static_cast<Eigen::Index>(i)) = f_of_tau(nodes[i]);
  }
  return B.colPivHouseholderQr().solve(rhs);
}

// independent summation oracle for reconstructing a value from coefficients
double direct_sum(const GegenbauerParam& p, const Element& e, const Eigen::VectorXd& coeff,
                  double tau) {
  const double x = (2.0 * tau - e.left - e.right) / (e.right - e.left);
  double total = coeff(0);
  double gm1 = 1.0, g = x;
  for (int j = 1; j < coeff.size(); ++j) {
    total += coeff(j) * g;
    const double gp1 = (2.0 * (j + p.alpha) * x * g - j * gm1) / (j + 2.0 * p.alpha);
    gm1 = g;
    g = gp1;
  }
  return total;
}

OCProblem trivial_problem(int n_x = 1, int n_u = 1) {
  OCProblem p;
  p.name = "trivial";
  p.n_x = n_x;
  p.n_u = n_u;
  p.t0 = 0.0;
  p.tf = 1.0;
  p.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                  Eigen::Ref<Eigen::VectorXd> out) { out.setZero(); };
  return p;
}

OCProblem breakwell_like() {
  OCProblem p;
  p.name = "breakwell-test";
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
  return p;
}

double breakwell_exact_u(double t) {
  if (t <= 0.3) return 200.0 * t / 9.0 - 20.0 / 3.0;
  if (t <= 0.7) return 0.0;
  return -200.0 * t / 9.0 + 140.0 / 9.0;
}

}  // namespace

TEST_CASE("affine time mapping") {
  CHECK(affine_to_tau(0.0, 0.0, 2.0) == -1.0);
  CHECK(affine_to_tau(2.0, 0.0, 2.0) == 1.0);
  CHECK(affine_to_tau(1.0, 0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(affine_to_tau(0.0, 1.0, 1.0), std::domain_error);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ts(-3.0, 7.0);
  for (int i = 0; i < 50; ++i) {
    const double t = ts(rng);
    const double back = affine_from_tau(affine_to_tau(t, -3.0, 7.0), -3.0, 7.0);
    CHECK(std::abs(back - t) <= 1e-14 * std::max(1.0, std::abs(t)));
  }
}

TEST_CASE("decision layout sizes") {
  // per-element 2 states x 4 coefficients + 1 control x 4 coefficients
  const Mesh mesh3 = Mesh::uniform(3, {4, 3, 3, 4, 4}, GegenbauerParam(0.5));
  const DecisionLayout small = DecisionLayout::build(2, 1, mesh3);
  CHECK(small.total == 36);

  const Mesh mesh14 = Mesh::uniform(3, {14, 14, 14, 14, 4}, GegenbauerParam(0.5));
  const DecisionLayout medium = DecisionLayout::build(2, 1, mesh14);
  CHECK(medium.total == 3 * (2 + 1) * 15);
}

TEST_CASE("equality constraint partition") {
  OCProblem p = trivial_problem();
  p.n_psi = 1;
  p.boundary = [](const Eigen::VectorXd& x0, double, const Eigen::VectorXd&, double,
                  Eigen::Ref<Eigen::VectorXd> out) { out(0) = x0(0); };
  const Mesh mesh = Mesh::uniform(1, {5, 4, 4, 8, 4}, GegenbauerParam(0.0));
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  CHECK(ws.partition.m_dynamics == 7);  // N + 2 rows
  CHECK(ws.partition.m_boundary == 1);
  CHECK(ws.partition.m_continuity == 0);
}

TEST_CASE("sampling a solution") {
  const GegenbauerParam alpha(0.3);
  const Mesh mesh = Mesh::uniform(2, {6, 5, 4, 8, 4}, alpha);
  SpectralSolution sol;
  sol.mesh = mesh;
  sol.n_x = 2;
  sol.n_u = 1;
  sol.t0 = 0.0;
  sol.tf = 2.0;
  sol.layout = DecisionLayout::build(2, 1, mesh);
  sol.coeffs = Eigen::VectorXd::Zero(sol.layout.total);

  SUBCASE("constant modes only") {
    for (int k = 0; k < 2; ++k) {
      auto A = sol.layout.state_coeffs(sol.coeffs, k);
      A(0, 0) = 3.25;
      A(0, 1) = -1.5;
    }
    const Trajectory traj = sample_solution(sol, {0.0, 0.37, 1.0, 1.8, 2.0});
    for (Eigen::Index i = 0; i < traj.x.rows(); ++i) {
      CHECK(traj.x(i, 0) == doctest::Approx(3.25).epsilon(1e-14));
      CHECK(traj.x(i, 1) == doctest::Approx(-1.5).epsilon(1e-14));
    }
  }

  SUBCASE("endpoint value is the coefficient sum") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index i = 0; i < sol.coeffs.size(); ++i) sol.coeffs(i) = dist(rng);
    const auto A = sol.layout.state_coeffs(sol.coeffs, 0);
    const double right = mesh.elements[0].domain.right;
    const Eigen::VectorXd at_interface = sol.state_at_tau(right);
    for (int r = 0; r < 2; ++r) {
      CHECK(at_interface(r) == doctest::Approx(A.col(r).sum()).epsilon(1e-14));
    }
  }

  SUBCASE("matches a direct summation oracle") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index i = 0; i < sol.coeffs.size(); ++i) sol.coeffs(i) = dist(rng);
    std::uniform_real_distribution<double> taus(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      const double tau = taus(rng);
      const int k = sol.element_of_tau(tau);
      const Eigen::VectorXd x = sol.state_at_tau(tau);
      const auto A = sol.layout.state_coeffs(sol.coeffs, k);
      for (int r = 0; r < 2; ++r) {
        const double oracle =
            direct_sum(alpha, mesh.elements[static_cast<std::size_t>(k)].domain, A.col(r), tau);
        CHECK(std::abs(x(r) - oracle) <= 1e-13 * std::max(1.0, std::abs(oracle)));
      }
    }
  }

  SUBCASE("times outside the horizon are rejected") {
    CHECK_THROWS_AS(sample_solution(sol, {-0.1}), std::domain_error);
    CHECK_THROWS_AS(sample_solution(sol, {2.1}), std::domain_error);
  }
}

TEST_CASE("cost assembly basics") {
  OCProblem p = trivial_problem();
  const Mesh mesh = Mesh::uniform(3, {5, 4, 4, 8, 4}, GegenbauerParam(0.2));
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  const Eigen::VectorXd z = Eigen::VectorXd::Random(ws.layout.total);

  // no cost terms at all
  CHECK(assemble_cost(ws, z) == 0.0);

  OCProblem p1 = trivial_problem();
  p1.t0 = -0.5;
  p1.tf = 2.25;
  p1.lagrangian = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) { return 1.0; };
  const TranscriptionWorkspace ws1 = TranscriptionWorkspace::build(p1, mesh);
  CHECK(assemble_cost(ws1, z) == doctest::Approx(p1.tf - p1.t0).epsilon(1e-13));
}

TEST_CASE("breakwell cost of the interpolated exact control is 40/9") {
  OCProblem p = breakwell_like();
  const GegenbauerParam alpha(0.5);
  const Mesh mesh = Mesh::with_interfaces({-0.4, 0.4}, {4, 3, 3, 8, 4}, alpha);
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
  for (int k = 0; k < 3; ++k) {
    const Element& e = mesh.elements[static_cast<std::size_t>(k)].domain;
    const Eigen::VectorXd b = fit_coeffs(alpha, 3, e, [&p](double tau) {
      return breakwell_exact_u(affine_from_tau(tau, p.t0, p.tf));
    });
    ws.layout.control_coeffs(z, k).col(0) = b;
  }
  CHECK(assemble_cost(ws, z) == doctest::Approx(40.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("objective consistency on the known linear control") {
  // integral of u (u - t) over [0, 2] at u = t/2 is -2/3
  OCProblem p = trivial_problem();
  p.t0 = 0.0;
  p.tf = 2.0;
  p.lagrangian = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double t) {
    return u(0) * (u(0) - t);
  };
  const GegenbauerParam alpha(0.0);
  const Mesh mesh = Mesh::uniform(1, {5, 4, 1, 16, 6}, alpha);
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
  const Eigen::VectorXd b = fit_coeffs(alpha, 1, Element(-1.0, 1.0), [&p](double tau) {
    return 0.5 * affine_from_tau(tau, p.t0, p.tf);
  });
  ws.layout.control_coeffs(z, 0).col(0) = b;
  CHECK(std::abs(assemble_cost(ws, z) - (-2.0 / 3.0)) <= 1e-10);
}

TEST_CASE("dynamics defects") {
  SUBCASE("zero field with constant states") {
    OCProblem p = trivial_problem(2, 1);
    const Mesh mesh = Mesh::uniform(2, {5, 4, 3, 8, 4}, GegenbauerParam(0.5));
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
    for (int k = 0; k < 2; ++k) {
      auto A = ws.layout.state_coeffs(z, k);
      A(0, 0) = 0.8;
      A(0, 1) = -2.0;
    }
    Eigen::VectorXd defects(ws.partition.m_dynamics);
    assemble_dynamics_defects(ws, z, defects);
    CHECK(defects.cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("unit-speed dynamics with the exact linear state") {
    OCProblem p = trivial_problem();
    p.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                    Eigen::Ref<Eigen::VectorXd> out) { out(0) = 1.0; };
    const GegenbauerParam alpha(0.5);
    const Mesh mesh = Mesh::uniform(2, {5, 4, 3, 8, 4}, alpha);
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
    for (int k = 0; k < 2; ++k) {
      const Element& e = mesh.elements[static_cast<std::size_t>(k)].domain;
      // x(t) = t on [0, 1]
      ws.layout.state_coeffs(z, k).col(0) = fit_coeffs(alpha, 4, e, [&p](double tau) {
        return affine_from_tau(tau, p.t0, p.tf);
      });
    }
    Eigen::VectorXd defects(ws.partition.m_dynamics);
    assemble_dynamics_defects(ws, z, defects);
    CHECK(defects.cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("cubic state for a quadratic field, defects below 1e-10") {
    OCProblem p = trivial_problem();
    p.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double t,
                    Eigen::Ref<Eigen::VectorXd> out) { out(0) = 3.0 * t * t; };
    const GegenbauerParam alpha(0.5);
    const Mesh mesh = Mesh::uniform(1, {6, 5, 2, 8, 4}, alpha);
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
    ws.layout.state_coeffs(z, 0).col(0) =
        fit_coeffs(alpha, 5, Element(-1.0, 1.0), [&p](double tau) {
          const double t = affine_from_tau(tau, p.t0, p.tf);
          return t * t * t;
        });
    Eigen::VectorXd defects(ws.partition.m_dynamics);
    assemble_dynamics_defects(ws, z, defects);
    CHECK(defects.cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("path constraints") {
  SUBCASE("no path rows without declarations") {
    OCProblem p = trivial_problem();
    const Mesh mesh = Mesh::uniform(1, {4, 3, 3, 8, 4}, GegenbauerParam(0.0));
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    CHECK(ws.partition.m_path == 0);
  }

  SUBCASE("state box reduces to sampled-state rows") {
    OCProblem p = trivial_problem();
    p.x_lower = Eigen::VectorXd::Constant(1, 0.0);
    p.x_upper = Eigen::VectorXd::Constant(1, 1.0);
    const Mesh mesh = Mesh::uniform(1, {4, 3, 3, 8, 4}, GegenbauerParam(0.0));
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    CHECK(ws.partition.m_path == 6);  // one row per augmented node
    CHECK(ws.path_lower.minCoeff() == 0.0);
    CHECK(ws.path_upper.maxCoeff() == 1.0);

    Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
    ws.layout.state_coeffs(z, 0)(0, 0) = 0.37;
    Eigen::VectorXd rows(ws.partition.m_path);
    assemble_path_constraints(ws, z, rows);
    CHECK((rows.array() - 0.37).abs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("boundary constraints") {
  OCProblem p = trivial_problem();
  p.n_psi = 2;
  p.boundary = [](const Eigen::VectorXd& x0, double, const Eigen::VectorXd& xf, double,
                  Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = x0(0) - 1.0;
    out(1) = xf(0);
  };
  const Mesh mesh = Mesh::uniform(1, {4, 3, 3, 8, 4}, GegenbauerParam(0.0));
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
  ws.layout.state_coeffs(z, 0)(0, 0) = 1.0;  // x identically one
  Eigen::VectorXd psi(2);
  assemble_boundary_constraints(ws, z, psi);
  CHECK(std::abs(psi(0)) <= 1e-15);
  CHECK(psi(1) == doctest::Approx(1.0));
}

TEST_CASE("control continuity constraints") {
  OCProblem p = trivial_problem();
  p.continuous_controls = true;

  SUBCASE("single element emits nothing") {
    const Mesh mesh = Mesh::uniform(1, {4, 3, 3, 8, 4}, GegenbauerParam(0.0));
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    CHECK(ws.partition.m_continuity == 0);
  }

  SUBCASE("constant equal controls satisfy the constraints") {
    const Mesh mesh = Mesh::uniform(3, {4, 3, 3, 8, 4}, GegenbauerParam(0.0));
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    CHECK(ws.partition.m_continuity == 2);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ws.layout.total);
    for (int k = 0; k < 3; ++k) ws.layout.control_coeffs(z, k)(0, 0) = 1.7;
    Eigen::VectorXd cont(2);
    assemble_control_continuity(ws, z, cont);
    CHECK(cont.cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("residual equals the sampled interface jump") {
    const GegenbauerParam alpha(0.4);
    const Mesh mesh = Mesh::uniform(2, {5, 4, 4, 8, 4}, alpha);
    const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
    Eigen::VectorXd z = Eigen::VectorXd::Random(ws.layout.total);
    Eigen::VectorXd cont(1);
    assemble_control_continuity(ws, z, cont);

    SpectralSolution sol;
    sol.mesh = mesh;
    sol.layout = ws.layout;
    sol.coeffs = z;
    sol.n_x = 1;
    sol.n_u = 1;
    sol.t0 = p.t0;
    sol.tf = p.tf;
    // left element owns the interface; evaluate the right element directly
    const Element& right = mesh.elements[1].domain;
    const auto row = basis_row(alpha, 4, right, right.left);
    double right_value = 0.0;
    for (int j = 0; j <= 4; ++j) {
      right_value += row[static_cast<std::size_t>(j)] * ws.layout.control_coeffs(z, 1)(j, 0);
    }
    const double left_value = sol.control_at_tau(mesh.elements[0].domain.right)(0);
    CHECK(std::abs(cont(0) - (right_value - left_value)) <= 1e-13);
  }
}

TEST_CASE("assembled nlp bundles all pieces") {
  OCProblem p = breakwell_like();
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
  p.path_lower = Eigen::VectorXd::Constant(1, -std::numeric_limits<double>::infinity());
  p.path_upper = Eigen::VectorXd::Constant(1, 0.1);

  const Mesh mesh = Mesh::uniform(3, {4, 3, 3, 8, 4}, GegenbauerParam(0.5));
  std::shared_ptr<const TranscriptionWorkspace> ws;
  const NLPProblem nlp = assemble_nlp(p, mesh, {}, &ws);
  CHECK(nlp.n == 36);
  CHECK(nlp.m_eq == 2 * 6 * 3 + 4);
  CHECK(nlp.m_in == 6 * 3);
  CHECK(nlp.ineq_upper.maxCoeff() == 0.1);

  const Eigen::VectorXd z = Eigen::VectorXd::Zero(nlp.n);
  Eigen::VectorXd eq(nlp.m_eq);
  nlp.equalities(z, eq);
  // zero coefficients violate only the x2 boundary conditions
  CHECK(eq.head(nlp.m_eq - 4).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(eq(nlp.m_eq - 2) == doctest::Approx(-1.0));
  CHECK(eq(nlp.m_eq - 1) == doctest::Approx(1.0));
}

TEST_CASE("endpoint identity between assembly and sampling") {
  const GegenbauerParam alpha(0.7);
  const Mesh mesh = Mesh::uniform(2, {5, 4, 3, 8, 4}, alpha);
  OCProblem p = trivial_problem(2, 1);
  const TranscriptionWorkspace ws = TranscriptionWorkspace::build(p, mesh);
  std::mt19937 rng(44);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd z(ws.layout.total);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = dist(rng);

  SpectralSolution sol;
  sol.mesh = mesh;
  sol.layout = ws.layout;
  sol.coeffs = z;
  sol.n_x = 2;
  sol.n_u = 1;
  sol.t0 = p.t0;
  sol.tf = p.tf;

  for (int k = 0; k < 2; ++k) {
    const double tau_k = mesh.elements[static_cast<std::size_t>(k)].domain.right;
    const Eigen::VectorXd sum =
        ws.layout.state_coeffs(z, k).colwise().sum().transpose();
    const Eigen::VectorXd sampled = sol.state_at_tau(tau_k);
    CHECK((sum - sampled).cwiseAbs().maxCoeff() <= 1e-14);
  }
}
