#include "gegopt/gegenbauer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gegopt {

namespace {

[[noreturn]] void fail_domain(const std::string& msg) { throw std::domain_error(msg); }

}  // namespace

GegenbauerParam::GegenbauerParam(double a) : alpha(a) {
  if (!(a > -0.5)) {
    std::ostringstream os;
    os << "Gegenbauer parameter must satisfy alpha > -1/2, got " << a;
    fail_domain(os.str());
  }
}

Element::Element(double l, double r) : left(l), right(r) {
  if (!(l < r) || l < -1.0 || r > 1.0) {
    std::ostringstream os;
    os << "element [" << l << ", " << r << "] must satisfy -1 <= left < right <= 1";
    fail_domain(os.str());
  }
}

double eval_gegenbauer(const GegenbauerParam& param, int degree, double x) {
  if (degree < 0) fail_domain("polynomial degree must be nonnegative");
  if (std::abs(x) > 1.0) fail_domain("evaluation point must lie in [-1, 1]");
  if (x == 1.0) return 1.0;  // endpoint normalization, exact by construction
  if (degree == 0) return 1.0;
  // G_1 = x directly; the j = 0 recurrence step would be 0/0 at alpha = 0.
  double gm1 = 1.0;
  double g = x;
  for (int j = 1; j < degree; ++j) {
    const double gp1 = (2.0 * (j + param.alpha) * x * g - j * gm1) / (j + 2.0 * param.alpha);
    gm1 = g;
    g = gp1;
  }
  return g;
}

std::pair<double, double> eval_gegenbauer_with_derivative(const GegenbauerParam& param,
                                                          int degree, double x) {
  if (degree < 0) fail_domain("polynomial degree must be nonnegative");
  if (degree == 0) return {1.0, 0.0};
  double gm1 = 1.0, dm1 = 0.0;
  double g = x, d = 1.0;
  for (int j = 1; j < degree; ++j) {
    const double denom = j + 2.0 * param.alpha;
    const double gp1 = (2.0 * (j + param.alpha) * x * g - j * gm1) / denom;
    const double dp1 = (2.0 * (j + param.alpha) * (g + x * d) - j * dm1) / denom;
    gm1 = g;
    dm1 = d;
    g = gp1;
    d = dp1;
  }
  return {g, d};
}

namespace {

// Affine pullback of tau in [left,right] to [-1,1], exact at the endpoints.
double pullback(const Element& e, double tau) {
  if (tau == e.right) return 1.0;
  if (tau == e.left) return -1.0;
  return (2.0 * tau - e.left - e.right) / (e.right - e.left);
}

// Push x in [-1,1] forward to [left,right], exact at the endpoints.
double pushforward(const Element& e, double x) {
  if (x == 1.0) return e.right;
  if (x == -1.0) return e.left;
  return 0.5 * ((e.left + e.right) + (e.right - e.left) * x);
}

}  // namespace

double eval_shifted(const GegenbauerParam& param, int degree, const Element& element,
                    double tau) {
  if (!element.contains(tau)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside element [" << element.left << ", " << element.right
       << "]";
    fail_domain(os.str());
  }
  return eval_gegenbauer(param, degree, pullback(element, tau));
}

std::vector<double> basis_row(const GegenbauerParam& param, int L, const Element& element,
                              double tau) {
  if (L < 0) fail_domain("basis length must be nonnegative");
  if (!element.contains(tau)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside element [" << element.left << ", " << element.right
       << "]";
    fail_domain(os.str());
  }
  std::vector<double> row(static_cast<std::size_t>(L) + 1);
  const double x = pullback(element, tau);
  if (x == 1.0) {
    std::fill(row.begin(), row.end(), 1.0);
    return row;
  }
  row[0] = 1.0;
  if (L == 0) return row;
  row[1] = x;
  for (int j = 1; j < L; ++j) {
    row[j + 1] =
        (2.0 * (j + param.alpha) * x * row[j] - j * row[j - 1]) / (j + 2.0 * param.alpha);
  }
  return row;
}

namespace {

// All zeros of G_m by bisection on interlacing brackets, built degree by degree.
std::vector<double> zeros_by_bisection(const GegenbauerParam& param, int m) {
  std::vector<double> roots = {0.0};  // G_1 = x
  for (int k = 2; k <= m; ++k) {
    std::vector<double> brackets;
    brackets.reserve(roots.size() + 2);
    brackets.push_back(-1.0);
    brackets.insert(brackets.end(), roots.begin(), roots.end());
    brackets.push_back(1.0);
    std::vector<double> next;
    next.reserve(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i + 1 < brackets.size(); ++i) {
      double lo = brackets[i], hi = brackets[i + 1];
      double flo = eval_gegenbauer(param, k, lo);
      double fhi = eval_gegenbauer(param, k, hi);
      // nudge off an exact zero at a bracket edge (cannot coincide with a
      // root of G_k by strict interlacing, but guard against roundoff)
      for (int tries = 0; flo == 0.0 && tries < 4; ++tries) {
        lo = std::nextafter(lo, hi);
        flo = eval_gegenbauer(param, k, lo);
      }
      for (int tries = 0; fhi == 0.0 && tries < 4; ++tries) {
        hi = std::nextafter(hi, lo);
        fhi = eval_gegenbauer(param, k, hi);
      }
      if (flo * fhi > 0.0) {
        std::ostringstream os;
        os << "Gauss node bracketing lost a sign change for (alpha = " << param.alpha
           << ", m = " << m << ")";
        throw std::runtime_error(os.str());
      }
      for (int it = 0; it < 200 && hi - lo > 1e-16 * (2.0); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_gegenbauer(param, k, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0.0) {
          hi = mid;
          fhi = fm;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      next.push_back(0.5 * (lo + hi));
    }
    roots = std::move(next);
  }
  return roots;
}

bool nodes_valid(const GegenbauerParam& param, int m, const std::vector<double>& x) {
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) >= 1.0) return false;
    if (i > 0 && !(x[i] > x[i - 1])) return false;
    if (std::abs(eval_gegenbauer(param, m, x[i])) > 1e-12) return false;
  }
  return true;
}

}  // namespace

NodeSet gauss_nodes(const GegenbauerParam& param, int m) {
  if (m < 1) fail_domain("Gauss node count must be positive");
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    x[static_cast<std::size_t>(i)] =
        -std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * m));
  }
  for (int i = 0; i < m; ++i) {
    double xi = x[static_cast<std::size_t>(i)];
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      const auto [g, d] = eval_gegenbauer_with_derivative(param, m, xi);
      if (d == 0.0) break;
      const double step = g / d;
      xi -= step;
      xi = std::clamp(xi, -1.0, 1.0);
      if (std::abs(step) < 1e-15) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      x.clear();
      break;
    }
    x[static_cast<std::size_t>(i)] = xi;
  }
  if (x.empty() || !nodes_valid(param, m, x)) {
    x = zeros_by_bisection(param, m);
  }
  // enforce the symmetry of the zero set about the origin
  for (int i = 0; i < m / 2; ++i) {
    const double v = 0.5 * (x[static_cast<std::size_t>(i)] -
                            x[static_cast<std::size_t>(m - 1 - i)]);
    x[static_cast<std::size_t>(i)] = v;
    x[static_cast<std::size_t>(m - 1 - i)] = -v;
  }
  if (m % 2 == 1) x[static_cast<std::size_t>(m / 2)] = 0.0;
  if (!nodes_valid(param, m, x)) {
    std::ostringstream os;
    os << "Gauss node solve failed to converge for (alpha = " << param.alpha
       << ", m = " << m << ")";
    throw std::runtime_error(os.str());
  }
  NodeSet set;
  set.nodes = std::move(x);
  set.degree = m;
  return set;
}

NodeSet shifted_gauss_nodes(const GegenbauerParam& param, int m, const Element& element) {
  NodeSet set = gauss_nodes(param, m);
  for (double& v : set.nodes) v = pushforward(element, v);
  return set;
}

NodeSet augment(NodeSet set, const Element& element) {
  if (!set.nodes.empty() && !(set.nodes.back() < element.right)) {
    fail_domain("augmented node set requires all Gauss nodes left of the element endpoint");
  }
  set.nodes.push_back(element.right);
  set.augmented = true;
  return set;
}

NodeSet augmented_collocation_nodes(const GegenbauerParam& param, int N,
                                    const Element& element) {
  if (N < 1) fail_domain("collocation count N must be positive");
  NodeSet set = augment(shifted_gauss_nodes(param, N + 1, element), element);
  set.degree = N;
  return set;
}

double leading_coefficient(const GegenbauerParam& param, int degree, const Element& element) {
  if (degree < 0) fail_domain("polynomial degree must be nonnegative");
  if (degree == 0) return 1.0;  // the Gamma ratio reduces to 2 for every alpha
  const double a = param.alpha;
  const double lg = std::lgamma(2.0 * a + 1.0) + std::lgamma(degree + a) -
                    std::lgamma(a + 1.0) - std::lgamma(degree + 2.0 * a);
  return std::pow(2.0, 2.0 * degree - 1.0) / std::pow(element.length(), degree) *
         std::exp(lg);
}

QuadratureRule reference_gegenbauer_rule(const GegenbauerParam& param, int npoints) {
  if (npoints < 1) fail_domain("quadrature rule needs at least one point");
  const double a = param.alpha - 0.5;  // Jacobi exponent, both sides
  const int n = npoints;
  // Golub-Welsch on the monic Jacobi recurrence; the symmetric weight makes
  // the diagonal vanish.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double beta;
    if (k == 1) {
      beta = 1.0 / (3.0 + 2.0 * a);
    } else {
      beta = k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0));
    }
    const double e = std::sqrt(beta);
    J(k - 1, k) = e;
    J(k, k - 1) = e;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("reference quadrature eigen decomposition failed");
  }
  const double mu0 = std::exp(2.0 * param.alpha * std::numbers::ln2 +
                              2.0 * std::lgamma(param.alpha + 0.5) -
                              std::lgamma(2.0 * param.alpha + 1.0));
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

QuadratureRule gauss_legendre_rule(int npoints) {
  const GegenbauerParam legendre(0.5);
  NodeSet set = gauss_nodes(legendre, npoints);
  QuadratureRule rule;
  rule.nodes = set.nodes;
  rule.weights.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double x = set.nodes[i];
    const double d = eval_gegenbauer_with_derivative(legendre, npoints, x).second;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * d * d);
  }
  return rule;
}

double weighted_inner_product(const GegenbauerParam& param, int m, int n,
                              const Element& element) {
  if (m < 0 || n < 0) fail_domain("polynomial degrees must be nonnegative");
  const QuadratureRule rule = reference_gegenbauer_rule(param, std::max(m, n) + 32);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * eval_gegenbauer(param, m, rule.nodes[i]) *
           eval_gegenbauer(param, n, rule.nodes[i]);
  }
  return std::pow(0.5 * element.length(), 2.0 * param.alpha) * acc;
}

double norm_factor(const GegenbauerParam& param, int degree, const Element& element) {
  if (degree < 0) fail_domain("polynomial degree must be nonnegative");
  return weighted_inner_product(param, degree, degree, element);
}

}  // namespace gegopt
