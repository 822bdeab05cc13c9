#include "gegopt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gegopt {

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  if (n == 0) throw std::invalid_argument("barycentric weights need at least one node");
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  const auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end());
  const double capacity = 4.0 / (*hi - *lo);  // keeps the products in range
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j) continue;
      const double d = nodes[j] - nodes[l];
      if (d == 0.0) throw std::invalid_argument("degenerate (duplicate) interpolation nodes");
      w[j] /= d * capacity;
    }
  }
  double wmax = 0.0;
  for (double v : w) wmax = std::max(wmax, std::abs(v));
  for (double& v : w) v /= wmax;
  return w;
}

namespace {

// Values of all barycentric Lagrange basis polynomials at x (second form).
void lagrange_basis_at(const std::vector<double>& nodes, const std::vector<double>& w,
                       double x, Eigen::VectorXd& out) {
  const std::size_t n = nodes.size();
  out.setZero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (x == nodes[j]) {
      out(static_cast<Eigen::Index>(j)) = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = w[j] / (x - nodes[j]);
    out(static_cast<Eigen::Index>(j)) = q;
    denom += q;
  }
  out /= denom;
}

}  // namespace

IntegrationMatrix build_obgim(const Element& element, const NodeSet& upper_limits, int M,
                              const std::vector<GegenbauerParam>& row_params) {
  if (M < 1) throw std::invalid_argument("integration matrix order M must be >= 1");
  const std::size_t nrows = upper_limits.size();
  if (row_params.size() != nrows) {
    throw std::invalid_argument("one row parameter required per upper limit");
  }
  for (std::size_t i = 0; i < nrows; ++i) {
    const double y = upper_limits[i];
    if (!(y > element.left) || y > element.right) {
      std::ostringstream os;
      os << "upper limit " << y << " outside (" << element.left << ", " << element.right
         << "]";
      throw std::domain_error(os.str());
    }
  }

  // Adjoint sets repeat whenever row parameters repeat; build each distinct
  // parameter's nodes and barycentric weights once.
  std::vector<double> distinct_alpha;
  std::vector<std::size_t> row_set(nrows);
  std::vector<NodeSet> sets;
  std::vector<std::vector<double>> bary;
  for (std::size_t i = 0; i < nrows; ++i) {
    const double a = row_params[i].alpha;
    auto it = std::find(distinct_alpha.begin(), distinct_alpha.end(), a);
    if (it == distinct_alpha.end()) {
      distinct_alpha.push_back(a);
      sets.push_back(shifted_gauss_nodes(row_params[i], M + 1, element));
      bary.push_back(barycentric_weights(sets.back().nodes));
      row_set[i] = sets.size() - 1;
    } else {
      row_set[i] = static_cast<std::size_t>(it - distinct_alpha.begin());
    }
  }

  const QuadratureRule gl = gauss_legendre_rule(M + 1);

  IntegrationMatrix matrix{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nrows), M + 1),
                           upper_limits,
                           {},
                           row_params,
                           element};
  matrix.adjoint_nodes.reserve(nrows);
  Eigen::VectorXd basis(M + 1);
  for (std::size_t i = 0; i < nrows; ++i) {
    const std::size_t s = row_set[i];
    matrix.adjoint_nodes.push_back(sets[s]);
    const double y = upper_limits[i];
    const double half = 0.5 * (y - element.left);
    const double mid = 0.5 * (y + element.left);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = mid + half * gl.nodes[q];
      lagrange_basis_at(sets[s].nodes, bary[s], t, basis);
      matrix.entries.row(static_cast<Eigen::Index>(i)) +=
          half * gl.weights[q] * basis.transpose();
    }
  }
  return matrix;
}

IntegrationMatrix scale_to_element(const IntegrationMatrix& reference,
                                   const Element& element) {
  if (reference.element.left != -1.0 || reference.element.right != 1.0) {
    throw std::invalid_argument("scale_to_element expects a matrix built on [-1, 1]");
  }
  IntegrationMatrix scaled = reference;
  scaled.element = element;
  scaled.entries *= 0.5 * element.length();
  auto map = [&element](double x) {
    if (x == 1.0) return element.right;
    if (x == -1.0) return element.left;
    return 0.5 * ((element.left + element.right) + (element.right - element.left) * x);
  };
  for (double& v : scaled.upper_limits.nodes) v = map(v);
  for (NodeSet& set : scaled.adjoint_nodes) {
    for (double& v : set.nodes) v = map(v);
  }
  return scaled;
}

GegenbauerParam select_row_param(const RowParamSpec& spec, int m, const Element& element,
                                 double upper_limit) {
  if (m < 1) throw std::invalid_argument("row parameter selection requires m >= 1");
  if (spec.mode == RowParamMode::fixed) return spec.alpha;
  constexpr double lo = -0.4;  // -1/2 + epsilon, epsilon = 0.1
  constexpr double hi = 2.0;
  constexpr int count = 101;
  double best_alpha = lo;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double a = lo + (hi - lo) * i / (count - 1);
    const double value =
        eval_error_bound({m, GegenbauerParam(a), 1.0, element, upper_limit});
    if (value < best_value) {
      best_value = value;
      best_alpha = a;
    }
  }
  return GegenbauerParam(best_alpha);
}

double eval_error_bound(const QuadErrorBound& bound) {
  if (bound.m < 1) throw std::invalid_argument("error bound requires m >= 1");
  if (bound.derivative_bound < 0.0) {
    throw std::invalid_argument("derivative bound must be nonnegative");
  }
  const double y = bound.upper_limit;
  if (!(y > bound.element.left) || y > bound.element.right) {
    throw std::domain_error("upper limit outside the element");
  }
  if (bound.derivative_bound == 0.0) return 0.0;
  const double a = bound.alpha_star.alpha;
  const double m = bound.m;
  double log_bracket = 0.0;
  if (a < 0.0) {
    if (bound.m % 2 == 1) {
      log_bracket = std::lgamma(0.5 * m + 1.0) + std::lgamma(a + 0.5) -
                    0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * m + a + 1.0);
    } else {
      log_bracket = std::numbers::ln2 + std::lgamma(0.5 * (m + 3.0)) +
                    std::lgamma(a + 0.5) - 0.5 * std::log(std::numbers::pi) -
                    0.5 * std::log((m + 1.0) * (m + 2.0 * a + 1.0)) -
                    std::lgamma(0.5 * (m + 1.0) + a);
    }
  }
  const double log_value = std::log(bound.derivative_bound) -
                           (2.0 * m + 1.0) * std::numbers::ln2 + m +
                           (a - m - 1.5) * std::log(m) + std::log(y - bound.element.left) +
                           (m + 1.0) * std::log(bound.element.length()) + log_bracket;
  return std::exp(log_value);
}

void dump_matrix_csv(const IntegrationMatrix& matrix, std::ostream& os) {
  const auto& e = matrix.entries;
  os.precision(17);
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      if (j > 0) os << ',';
      os << e(i, j);
    }
    os << '\n';
  }
}

}  // namespace gegopt
