#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gegopt {

/// Gegenbauer family parameter; valid only for alpha > -1/2.
/// alpha = 0 selects the Chebyshev (first kind) family, alpha = 0.5 the
/// Legendre family, both under the endpoint normalization G_j(1) = 1.
struct GegenbauerParam {
  double alpha;
  explicit GegenbauerParam(double a);
};

/// One mesh interval [left, right] in transformed time, contained in [-1, 1].
struct Element {
  double left;
  double right;
  Element(double l, double r);
  double length() const { return right - left; }
  double midpoint() const { return 0.5 * (left + right); }
  bool contains(double tau) const { return tau >= left && tau <= right; }
  bool operator==(const Element& o) const { return left == o.left && right == o.right; }
};

/// Strictly increasing node list on some element. A Gauss set holds the
/// `degree` zeros of the degree-`degree` polynomial; an augmented set
/// additionally carries the element's right endpoint as its last node.
struct NodeSet {
  std::vector<double> nodes;
  int degree = 0;
  bool augmented = false;

  std::size_t size() const { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
  double front() const { return nodes.front(); }
  double back() const { return nodes.back(); }
};

/// G_degree^{(alpha)}(x) on [-1,1], normalized so G_j(1) = 1 for every j.
double eval_gegenbauer(const GegenbauerParam& param, int degree, double x);

/// Value and x-derivative in one recurrence pass.
std::pair<double, double> eval_gegenbauer_with_derivative(const GegenbauerParam& param,
                                                          int degree, double x);

/// Shifted polynomial on an element via the affine pullback to [-1,1].
/// Exactly 1 at the right endpoint; (-1)^degree at the left up to roundoff.
double eval_shifted(const GegenbauerParam& param, int degree, const Element& element,
                    double tau);

/// Row vector [G_0, ..., G_L] of shifted polynomials at tau.
std::vector<double> basis_row(const GegenbauerParam& param, int L, const Element& element,
                              double tau);

/// The m zeros of G_m^{(alpha)} on (-1,1), ascending and symmetric about 0.
/// Newton from Chebyshev-zero guesses with a bisection fallback.
NodeSet gauss_nodes(const GegenbauerParam& param, int m);

/// Affine image of gauss_nodes in the element.
NodeSet shifted_gauss_nodes(const GegenbauerParam& param, int m, const Element& element);

/// Append the element's right endpoint as the last node.
NodeSet augment(NodeSet set, const Element& element);

/// Augmented collocation set: the N+1 zeros of the degree-(N+1) shifted
/// polynomial plus the right endpoint (N+2 nodes total).
NodeSet augmented_collocation_nodes(const GegenbauerParam& param, int N,
                                    const Element& element);

/// Leading coefficient of the degree-j shifted polynomial on the element.
double leading_coefficient(const GegenbauerParam& param, int degree, const Element& element);

/// Squared weighted norm of the degree-n shifted polynomial on the element,
/// computed with an (n+32)-point reference Gauss rule for the Gegenbauer weight.
double norm_factor(const GegenbauerParam& param, int degree, const Element& element);

/// Nodes/weights pair for weighted quadrature on [-1,1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule for the weight (1-x^2)^{alpha-1/2} on [-1,1]; exact for
/// polynomial integrands of degree <= 2*npoints - 1 against that weight.
QuadratureRule reference_gegenbauer_rule(const GegenbauerParam& param, int npoints);

/// Gauss-Legendre nodes and weights on [-1,1].
QuadratureRule gauss_legendre_rule(int npoints);

/// Weighted inner product (G_m, G_n) on the element via the reference rule.
double weighted_inner_product(const GegenbauerParam& param, int m, int n,
                              const Element& element);

}  // namespace gegopt
