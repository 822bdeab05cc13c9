#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gegopt/gegenbauer.hpp"

using namespace gegopt;

namespace {

// closed-form oracles for the two classical specializations
double chebyshev_t(int n, double x) { return std::cos(n * std::acos(x)); }

double legendre_p(int n, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = x;
  for (int j = 1; j < n; ++j) {
    const double pp1 = ((2.0 * j + 1.0) * x * p - j * pm1) / (j + 1.0);
    pm1 = p;
    p = pp1;
  }
  return p;
}

}  // namespace

TEST_CASE("parameter domain") {
  CHECK_NOTHROW(GegenbauerParam(-0.49));
  CHECK_THROWS_AS(GegenbauerParam(-0.5), std::domain_error);
  CHECK_THROWS_AS(GegenbauerParam(-2.0), std::domain_error);
}

TEST_CASE("element validation") {
  CHECK_NOTHROW(Element(-1.0, 1.0));
  CHECK_NOTHROW(Element(0.3, 0.7));
  CHECK_THROWS_AS(Element(0.7, 0.3), std::domain_error);
  CHECK_THROWS_AS(Element(-1.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(Element(0.0, 1.5), std::domain_error);
}

TEST_CASE("pointwise values") {
  CHECK(eval_gegenbauer(GegenbauerParam(0.3), 0, 0.7) == 1.0);
  // T_3(0.5) = 4 x^3 - 3 x = -1
  CHECK(eval_gegenbauer(GegenbauerParam(0.0), 3, 0.5) == doctest::Approx(-1.0).epsilon(1e-14));
  // P_2(0.5) = (3 x^2 - 1) / 2 = -0.125
  CHECK(eval_gegenbauer(GegenbauerParam(0.5), 2, 0.5) ==
        doctest::Approx(-0.125).epsilon(1e-14));
  CHECK_THROWS_AS(eval_gegenbauer(GegenbauerParam(0.5), 2, 1.5), std::domain_error);
  CHECK_THROWS_AS(eval_gegenbauer(GegenbauerParam(0.5), -1, 0.5), std::domain_error);
}

TEST_CASE("chebyshev and legendre specializations on random points") {
  std::mt19937 rng(20240);
  std::uniform_real_distribution<double> pts(-1.0, 1.0);
  const GegenbauerParam cheb(0.0), leg(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = pts(rng);
    for (int n = 0; n <= 10; ++n) {
      CHECK(eval_gegenbauer(cheb, n, x) == doctest::Approx(chebyshev_t(n, x)).epsilon(1e-12));
      CHECK(eval_gegenbauer(leg, n, x) == doctest::Approx(legendre_p(n, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("shifted evaluation and endpoint normalization") {
  const Element e(0.0, 1.0);
  for (double a : {0.0, 0.5, 1.7}) {
    const GegenbauerParam p(a);
    for (int j = 0; j <= 6; ++j) {
      CHECK(eval_shifted(p, j, e, e.right) == 1.0);  // exact by construction
      CHECK(eval_shifted(p, j, e, e.left) ==
            doctest::Approx(j % 2 == 0 ? 1.0 : -1.0).epsilon(1e-13));
    }
  }
  // linear map: 2 * 0.75 - 1 = 0.5
  CHECK(eval_shifted(GegenbauerParam(0.0), 1, e, 0.75) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(eval_shifted(GegenbauerParam(0.0), 1, e, 1.25), std::domain_error);
}

TEST_CASE("basis row endpoint vectors") {
  const GegenbauerParam p(0.8);
  const Element e(-0.25, 0.5);
  const auto ones = basis_row(p, 5, e, e.right);
  const auto alt = basis_row(p, 5, e, e.left);
  for (int j = 0; j <= 5; ++j) {
    CHECK(ones[static_cast<std::size_t>(j)] == 1.0);
    CHECK(alt[static_cast<std::size_t>(j)] ==
          doctest::Approx(j % 2 == 0 ? 1.0 : -1.0).epsilon(1e-13));
  }
  const auto mid = basis_row(GegenbauerParam(0.0), 2, Element(-1.0, 1.0), 0.0);
  CHECK(mid[0] == doctest::Approx(1.0));
  CHECK(mid[1] == doctest::Approx(0.0));
  CHECK(mid[2] == doctest::Approx(-1.0));
}

TEST_CASE("gauss nodes: known zero sets") {
  const NodeSet cheb2 = gauss_nodes(GegenbauerParam(0.0), 2);
  REQUIRE(cheb2.size() == 2);
  CHECK(cheb2[0] == doctest::Approx(-std::numbers::sqrt2 / 2).epsilon(1e-14));
  CHECK(cheb2[1] == doctest::Approx(std::numbers::sqrt2 / 2).epsilon(1e-14));

  const NodeSet leg3 = gauss_nodes(GegenbauerParam(0.5), 3);
  REQUIRE(leg3.size() == 3);
  CHECK(leg3[0] == doctest::Approx(-std::sqrt(3.0 / 5.0)).epsilon(1e-14));
  CHECK(leg3[1] == 0.0);
  CHECK(leg3[2] == doctest::Approx(std::sqrt(3.0 / 5.0)).epsilon(1e-14));

  const NodeSet wide = gauss_nodes(GegenbauerParam(2.7), 9);
  REQUIRE(wide.size() == 9);
  CHECK(wide[4] == 0.0);
  for (int i = 0; i < 9; ++i) CHECK(wide[static_cast<std::size_t>(i)] == -wide[static_cast<std::size_t>(8 - i)]);
}

TEST_CASE("gauss nodes: residual, ordering, symmetry across parameters") {
  for (double a : {-0.4, -0.1, 0.0, 0.5, 1.0, 2.0, 5.0, 12.0, 20.0}) {
    const GegenbauerParam p(a);
    for (int m : {1, 2, 3, 5, 8, 14, 19, 25}) {
      const NodeSet set = gauss_nodes(p, m);
      REQUIRE(set.size() == static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        const double x = set[static_cast<std::size_t>(i)];
        CHECK(std::abs(eval_gegenbauer(p, m, x)) <= 1e-12);
        if (i > 0) CHECK(x > set[static_cast<std::size_t>(i - 1)]);
        CHECK(std::abs(x + set[static_cast<std::size_t>(m - 1 - i)]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("shifted gauss nodes and augmentation") {
  const Element e(0.0, 1.0);
  const NodeSet s = shifted_gauss_nodes(GegenbauerParam(0.0), 2, e);
  CHECK(s[0] == doctest::Approx((1.0 - std::numbers::sqrt2 / 2) / 2).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx((1.0 + std::numbers::sqrt2 / 2) / 2).epsilon(1e-14));

  const NodeSet aug = augmented_collocation_nodes(GegenbauerParam(0.5), 4, e);
  CHECK(aug.augmented);
  CHECK(aug.size() == 6);  // N+2
  CHECK(aug.back() == e.right);

  // identity map on [-1,1]
  const NodeSet base = gauss_nodes(GegenbauerParam(1.3), 7);
  const NodeSet same = shifted_gauss_nodes(GegenbauerParam(1.3), 7, Element(-1.0, 1.0));
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i] == same[i]);
}

TEST_CASE("leading coefficients") {
  for (double a : {-0.3, 0.0, 0.5, 2.0}) {
    const GegenbauerParam p(a);
    CHECK(leading_coefficient(p, 0, Element(-1.0, 1.0)) == 1.0);
    CHECK(leading_coefficient(p, 1, Element(0.25, 0.75)) ==
          doctest::Approx(2.0 / 0.5).epsilon(1e-13));
  }
  // T_2 = 2 x^2 - 1
  CHECK(leading_coefficient(GegenbauerParam(0.0), 2, Element(-1.0, 1.0)) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("leading coefficient consistency via divided differences") {
  // G_j - K_j x^j must have degree <= j-1, i.e. a vanishing j-th divided
  // difference on any j+1 distinct nodes.
  const Element e(-1.0, 1.0);
  for (double a : {-0.2, 0.0, 0.5, 1.5}) {
    const GegenbauerParam p(a);
    for (int j = 1; j <= 8; ++j) {
      const double kj = leading_coefficient(p, j, e);
      std::vector<double> x(static_cast<std::size_t>(j) + 1);
      std::vector<double> f(static_cast<std::size_t>(j) + 1);
      for (int i = 0; i <= j; ++i) {
        x[static_cast<std::size_t>(i)] = std::cos(std::numbers::pi * i / j);
        f[static_cast<std::size_t>(i)] =
            eval_gegenbauer(p, j, x[static_cast<std::size_t>(i)]) -
            kj * std::pow(x[static_cast<std::size_t>(i)], j);
      }
      for (int level = 1; level <= j; ++level) {
        for (int i = 0; i <= j - level; ++i) {
          f[static_cast<std::size_t>(i)] =
              (f[static_cast<std::size_t>(i + 1)] - f[static_cast<std::size_t>(i)]) /
              (x[static_cast<std::size_t>(i + level)] - x[static_cast<std::size_t>(i)]);
        }
      }
      CHECK(std::abs(f[0]) <= 1e-8 * std::max(1.0, kj));
    }
  }
}

TEST_CASE("norm factors: closed-form cases") {
  const Element full(-1.0, 1.0);
  CHECK(norm_factor(GegenbauerParam(0.5), 0, full) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(norm_factor(GegenbauerParam(0.5), 1, full) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(norm_factor(GegenbauerParam(0.0), 0, full) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("orthogonality under the weighted inner product") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> alphas(-0.4, 3.0);
  const Element e(0.3, 0.7);
  for (int trial = 0; trial < 12; ++trial) {
    const GegenbauerParam p(alphas(rng));
    for (int m = 0; m <= 10; ++m) {
      for (int n = 0; n < m; ++n) {
        const double ip = weighted_inner_product(p, m, n, e);
        const double scale =
            std::sqrt(norm_factor(p, m, e) * norm_factor(p, n, e));
        CHECK(std::abs(ip) / scale <= 1e-10);
      }
    }
  }
}

TEST_CASE("reference rule cross-checks the newton node solve") {
  // two independent routes to the same zero sets
  for (double a : {-0.3, 0.0, 0.9, 3.5}) {
    const GegenbauerParam p(a);
    const NodeSet newton = gauss_nodes(p, 12);
    const QuadratureRule gw = reference_gegenbauer_rule(p, 12);
    for (std::size_t i = 0; i < newton.size(); ++i) {
      CHECK(newton[i] == doctest::Approx(gw.nodes[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const QuadratureRule gl = gauss_legendre_rule(6);
  for (int d = 0; d <= 11; ++d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      acc += gl.weights[i] * std::pow(gl.nodes[i], d);
    }
    const double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1.0);
    CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
  }
}
