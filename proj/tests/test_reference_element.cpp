// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "sturm/reference_element.hpp"
#include "test_support.hpp"

using namespace sturm;

namespace {

// exact integral of xi^m over (-1, 1)
double monomial_integral(int m) { return (m % 2 == 0) ? 2.0 / (m + 1) : 0.0; }

// random polynomial of the given degree as monomial coefficients in [-1, 1]
std::vector<double> random_poly(int degree) {
  std::vector<double> c(degree + 1);
  for (auto& v : c) v = sturm_test::uniform(-1.0, 1.0);
  return c;
}

double eval_poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double eval_poly_d2(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 2; --i) {
    acc = acc * x + c[i] * i * (i - 1);
  }
  return acc;
}

// exact integral of the product of two monomial-coefficient polynomials
double exact_product_integral(const std::vector<double>& u, const std::vector<double>& v) {
  double acc = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    for (size_t j = 0; j < v.size(); ++j) {
      acc += u[i] * v[j] * monomial_integral(static_cast<int>(i + j));
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("gll_rule: two-point closed form") {
  const auto r = gll_rule(1);
  CHECK(r.nodes(0) == -1.0);
  CHECK(r.nodes(1) == 1.0);
  CHECK(r.weights(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.weights(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gll_rule: W=2 values cross-checked by exactness on monomials up to degree 3") {
  const auto r = gll_rule(2);
  CHECK(r.nodes(0) == -1.0);
  CHECK(r.nodes(1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.nodes(2) == 1.0);
  CHECK(r.weights(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.weights(1) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(r.weights(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int m = 0; m <= 3; ++m) {
    double q = 0.0;
    for (int i = 0; i < 3; ++i) q += r.weights(i) * std::pow(r.nodes(i), m);
    CHECK(q == doctest::Approx(monomial_integral(m)).epsilon(1e-14));
  }
}

TEST_CASE("gll_rule: weights sum to 2 and nodes are symmetric, ascending") {
  for (int w = 1; w <= 16; ++w) {
    const auto r = gll_rule(w);
    CHECK(std::abs(r.weights.sum() - 2.0) < 1e-14);
    CHECK(r.nodes(0) == -1.0);
    CHECK(r.nodes(w) == 1.0);
    for (int i = 0; i <= w; ++i) {
      CHECK(std::abs(r.nodes(i) + r.nodes(w - i)) < 1e-14);
      if (i > 0) CHECK(r.nodes(i) > r.nodes(i - 1));
      CHECK(r.weights(i) > 0.0);
    }
  }
}

TEST_CASE("gll_rule: integrates degree <= 2W-1 exactly") {
  for (int w : {3, 5, 8, 12}) {
    const auto r = gll_rule(w);
    for (int m = 0; m <= 2 * w - 1; ++m) {
      double q = 0.0;
      for (int i = 0; i <= w; ++i) q += r.weights(i) * std::pow(r.nodes(i), m);
      CHECK(std::abs(q - monomial_integral(m)) < 1e-12);
    }
  }
}

TEST_CASE("gll_rule: rejects invalid order") {
  CHECK_THROWS_AS(gll_rule(0), InvalidOrderError);
  CHECK_THROWS_AS(gll_rule(-3), InvalidOrderError);
}

TEST_CASE("gauss_rule: exactness to degree 2n-1") {
  for (int n : {1, 2, 7, 14}) {
    const auto r = gauss_rule(n);
    CHECK(std::abs(r.weights.sum() - 2.0) < 1e-14);
    for (int m = 0; m <= 2 * n - 1; ++m) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += r.weights(i) * std::pow(r.nodes(i), m);
      CHECK(std::abs(q - monomial_integral(m)) < 1e-12);
    }
  }
}

TEST_CASE("differentiation_matrix: constants and identity") {
  for (int w : {2, 4, 9}) {
    const auto r = gll_rule(w);
    const auto d = differentiation_matrix(r);
    const VectorX<double> ones = VectorX<double>::Ones(w + 1);
    CHECK((d * ones).cwiseAbs().maxCoeff() < 1e-13);
    const VectorX<double> xi = r.nodes;
    CHECK(((d * xi) - ones).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("differentiation_matrix: W=2 frozen rows") {
  const auto d = differentiation_matrix(gll_rule(2));
  const double expect[3][3] = {{-1.5, 2.0, -0.5}, {-0.5, 0.0, 0.5}, {0.5, -2.0, 1.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(d(i, j) == doctest::Approx(expect[i][j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("differentiation_matrix: applied twice matches analytic second derivative") {
  const int w = 6;
  const auto r = gll_rule(w);
  const auto d = differentiation_matrix(r);
  const auto c = random_poly(w);
  VectorX<double> vals(w + 1);
  for (int i = 0; i <= w; ++i) vals(i) = eval_poly(c, r.nodes(i));
  const VectorX<double> d2 = d * (d * vals);
  for (int i = 0; i <= w; ++i) {
    CHECK(std::abs(d2(i) - eval_poly_d2(c, r.nodes(i))) < 1e-9);
  }
}

TEST_CASE("interpolate_coefficient: constants and polynomial reproduction") {
  const auto c = interpolate_coefficient([](double) { return 3.25; }, 5);
  for (double x : {-0.9, -0.3, 0.1, 0.77}) CHECK(c(x) == doctest::Approx(3.25).epsilon(1e-15));

  const int deg = 6;
  const auto coeffs = random_poly(deg);
  const auto ip = interpolate_coefficient([&](double x) { return eval_poly(coeffs, x); }, deg);
  for (int k = 0; k < 2 * deg; ++k) {
    const double x = -1.0 + 2.0 * (k + 0.5) / (2 * deg);
    CHECK(std::abs(ip(x) - eval_poly(coeffs, x)) < 1e-12);
  }
}

TEST_CASE("interpolate_coefficient: exp at degree 3") {
  const auto ip = interpolate_coefficient([](double x) { return std::exp(x); }, 3);
  const auto nodes = gll_rule(3).nodes;
  for (int j = 0; j < 4; ++j) CHECK(ip.values()(j) == std::exp(nodes(j)));
  double max_dev = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = -1.0 + 2.0 * k / 400.0;
    max_dev = std::max(max_dev, std::abs(ip(x) - std::exp(x)));
  }
  CHECK(max_dev < 1e-2);
}

TEST_CASE("interpolate_coefficient: non-finite sample rejected") {
  CHECK_THROWS_AS(interpolate_coefficient([](double x) { return 1.0 / (x - 1.0); }, 4),
                  InvalidCoefficientError);
}

TEST_CASE("NodalPolynomial: reproduces its nodal values and derivative") {
  const auto r = gll_rule(5);
  VectorX<double> vals(6);
  for (int i = 0; i < 6; ++i) vals(i) = sturm_test::uniform(-2.0, 2.0);
  const NodalPolynomial<double> u(r.nodes, vals);
  for (int i = 0; i < 6; ++i) CHECK(u(r.nodes(i)) == vals(i));
  // derivative of xi^3 is 3 xi^2
  VectorX<double> cubed = r.nodes.array().cube();
  const NodalPolynomial<double> cube(r.nodes, cubed);
  const auto dcube = cube.derivative();
  for (double x : {-0.8, -0.1, 0.5, 0.95}) {
    CHECK(dcube(x) == doctest::Approx(3.0 * x * x).epsilon(1e-12));
  }
}

TEST_CASE("reference_gram: constant and linear closed forms") {
  const auto g = reference_gram(4);
  const auto nodes = gll_rule(4).nodes;
  const VectorX<double> ones = VectorX<double>::Ones(5);
  CHECK(ones.dot(g.l2 * ones) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(ones.dot(g.h1_semi * ones)) < 1e-12);
  CHECK(std::abs(ones.dot(g.h2_semi * ones)) < 1e-12);
  CHECK(ones.dot(g.full() * ones) == doctest::Approx(2.0).epsilon(1e-13));

  const VectorX<double> xi = nodes;
  CHECK(xi.dot(g.l2 * xi) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(xi.dot(g.h1_semi * xi) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(xi.dot(g.h2_semi * xi)) < 1e-11);
  CHECK(xi.dot(g.full() * xi) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("reference_gram: symmetry exact, full Gram positive definite") {
  for (int w : {3, 6, 10}) {
    const auto g = reference_gram(w);
    CHECK((g.l2 - g.l2.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.h1_semi - g.h1_semi.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.h2_semi - g.h2_semi.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(g.full());
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixX<double>> l2es(g.l2);
    CHECK(l2es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("quadrature exactness property: random products of degree <= W") {
  for (int w : {4, 7, 11}) {
    const auto nodal = gll_rule(w);
    const auto quad = gauss_rule(2 * w + 2);
    for (int rep = 0; rep < 5; ++rep) {
      const auto u = random_poly(w);
      const auto v = random_poly(w);
      double q = 0.0;
      for (int i = 0; i < quad.point_count(); ++i) {
        q += quad.weights(i) * eval_poly(u, quad.nodes(i)) * eval_poly(v, quad.nodes(i));
      }
      const double exact = exact_product_integral(u, v);
      CHECK(std::abs(q - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }
    (void)nodal;
  }
}

TEST_CASE("scalar template instantiates at long double") {
  const auto r = gll_rule<long double>(6);
  CHECK(std::abs(static_cast<double>(r.weights.sum()) - 2.0) < 1e-16);
}
