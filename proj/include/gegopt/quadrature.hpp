#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "gegopt/gegenbauer.hpp"

namespace gegopt {

/// Rectangular barycentric Gegenbauer integration operator. Row i maps
/// integrand samples at that row's adjoint nodes to the integral from the
/// element's left endpoint to upper_limits[i]; exact on polynomials of
/// degree <= order().
struct IntegrationMatrix {
  Eigen::MatrixXd entries;                    // rows x (M+1)
  NodeSet upper_limits;                       // one per row
  std::vector<NodeSet> adjoint_nodes;         // one set per row
  std::vector<GegenbauerParam> row_params;    // one per row
  Element element{-1.0, 1.0};

  int rows() const { return static_cast<int>(entries.rows()); }
  int order() const { return static_cast<int>(entries.cols()) - 1; }

  /// Row dotted with integrand samples at the row's adjoint nodes.
  double apply_row(int i, const Eigen::Ref<const Eigen::VectorXd>& samples) const {
    return entries.row(i).dot(samples);
  }
};

/// Weights of the stable barycentric form for the given nodes, rescaled so
/// max |w_j| = 1 (any common rescaling leaves the interpolant unchanged).
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

/// Build the integration matrix on an element for the given upper limits.
/// Row i's adjoint nodes are the degree-(M+1) shifted Gauss nodes with
/// parameter row_params[i] on the full element; entries integrate the
/// barycentric Lagrange basis with an (M+1)-point Gauss-Legendre rule.
IntegrationMatrix build_obgim(const Element& element, const NodeSet& upper_limits, int M,
                              const std::vector<GegenbauerParam>& row_params);

/// Map a matrix built on [-1,1] to an element: entries scale by half the
/// element length; limits and adjoint nodes map affinely.
IntegrationMatrix scale_to_element(const IntegrationMatrix& reference,
                                   const Element& element);

enum class RowParamMode { fixed, bound_min };

/// How the per-row Gegenbauer parameters of an integration matrix are chosen.
struct RowParamSpec {
  RowParamMode mode = RowParamMode::fixed;
  GegenbauerParam alpha{0.5};
};

/// Fixed mode returns the global alpha; bound-min scans 101 equispaced
/// parameters in [-0.4, 2] for the smallest truncation-error bound
/// (unit derivative bound), ties broken toward the smallest alpha.
GegenbauerParam select_row_param(const RowParamSpec& spec, int m, const Element& element,
                                 double upper_limit);

/// Inputs of the quadrature truncation-error bound.
struct QuadErrorBound {
  int m;
  GegenbauerParam alpha_star;
  double derivative_bound;  // sup of |g^(m+1)| on the element
  Element element;
  double upper_limit;
};

/// Evaluate the truncation-error bound. The two unknown constants of the
/// underlying estimate are taken as 1, so the value is meaningful for
/// relative comparisons (parameter selection, decay checks), not absolute
/// certification.
double eval_error_bound(const QuadErrorBound& bound);

/// Debug dump: entries row-major, comma separated, 17 significant digits.
void dump_matrix_csv(const IntegrationMatrix& matrix, std::ostream& os);

}  // namespace gegopt
