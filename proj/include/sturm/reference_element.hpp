// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>

#include "sturm/errors.hpp"

namespace sturm {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Exactly symmetric copy of a square matrix (floating-point addition commutes,
/// so the average has max|S - S^T| = 0).
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return MatrixX<Scalar>((m + m.transpose()) / Scalar(2));
}

/// Legendre polynomial P_n and its derivative at x via the three-term recurrences
/// P_k = ((2k-1) x P_{k-1} - (k-1) P_{k-2}) / k and P_k' = P_{k-2}' + (2k-1) P_{k-1}.
template <typename Scalar>
std::pair<Scalar, Scalar> legendre(int n, Scalar x) {
  Scalar p0 = Scalar(1), d0 = Scalar(0);
  if (n == 0) return {p0, d0};
  Scalar p1 = x, d1 = Scalar(1);
  for (int k = 2; k <= n; ++k) {
    const Scalar pk = (Scalar(2 * k - 1) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
    const Scalar dk = d0 + Scalar(2 * k - 1) * p1;
    p0 = p1;
    d0 = d1;
    p1 = pk;
    d1 = dk;
  }
  return {p1, d1};
}

/// Quadrature rule on the reference interval (-1, 1), nodes ascending.
/// `order` is the polynomial degree of the associated nodal family
/// (W for the Gauss-Lobatto-Legendre rule, n-1 for an n-point Gauss rule).
template <typename Scalar = double>
struct QuadratureRule {
  int order = 0;
  VectorX<Scalar> nodes;
  VectorX<Scalar> weights;

  int point_count() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

template <typename Scalar>
Scalar newton_tolerance() {
  return std::max(Scalar(1e-15), Scalar(4) * std::numeric_limits<Scalar>::epsilon());
}

}  // namespace detail

/// (W+1)-point Gauss-Lobatto-Legendre rule: nodes are -1, +1 and the roots of
/// P_W', weights 2 / (W (W+1) P_W(x)^2). Interior roots by Newton iteration from
/// Chebyshev-Lobatto guesses, computed on the positive half and mirrored so that
/// node symmetry is exact.
template <typename Scalar = double>
QuadratureRule<Scalar> gll_rule(int order) {
  if (order < 1) throw InvalidOrderError("gll_rule: order must be >= 1");
  const int w = order;
  QuadratureRule<Scalar> rule;
  rule.order = w;
  rule.nodes.setZero(w + 1);
  rule.weights.setZero(w + 1);
  rule.nodes(0) = Scalar(-1);
  rule.nodes(w) = Scalar(1);
  const Scalar pi = std::acos(Scalar(-1));
  const Scalar tol = detail::newton_tolerance<Scalar>();
  for (int i = w / 2 + 1; i < w; ++i) {
    Scalar x = std::cos(pi * Scalar(w - i) / Scalar(w));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(w, x);
      const Scalar d2p = (Scalar(2) * x * dp - Scalar(w) * Scalar(w + 1) * p) / (Scalar(1) - x * x);
      const Scalar dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) <= tol) break;
    }
    rule.nodes(i) = x;
    rule.nodes(w - i) = -x;
  }
  // middle node of an even-order rule is exactly 0 from setZero
  for (int i = 0; i <= w; ++i) {
    const Scalar p = legendre(w, rule.nodes(i)).first;
    rule.weights(i) = Scalar(2) / (Scalar(w) * Scalar(w + 1) * p * p);
  }
  return rule;
}

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_rule(int n_points) {
  if (n_points < 1) throw InvalidOrderError("gauss_rule: need at least one point");
  const int n = n_points;
  QuadratureRule<Scalar> rule;
  rule.order = n - 1;
  rule.nodes.setZero(n);
  rule.weights.setZero(n);
  const Scalar pi = std::acos(Scalar(-1));
  const Scalar tol = detail::newton_tolerance<Scalar>();
  for (int i = n / 2; i < n; ++i) {
    const int j = n - 1 - i;  // 0-based root index counted from +1
    Scalar x = std::cos(pi * (Scalar(j) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = Scalar(1);
    for (int it = 0; it < 100; ++it) {
      const auto pd = legendre(n, x);
      dp = pd.second;
      const Scalar dx = pd.first / dp;
      x -= dx;
      if (std::abs(dx) <= tol) break;
    }
    dp = legendre(n, x).second;
    rule.nodes(i) = x;
    rule.nodes(n - 1 - i) = -x;
    const Scalar wgt = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
    rule.weights(i) = wgt;
    rule.weights(n - 1 - i) = wgt;
  }
  return rule;
}

/// Barycentric weights 1 / prod_{k != j} (x_j - x_k), rescaled to unit max modulus.
template <typename Scalar>
VectorX<Scalar> barycentric_weights(const VectorX<Scalar>& nodes) {
  const Eigen::Index n = nodes.size();
  VectorX<Scalar> lam(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar prod = Scalar(1);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != j) prod *= nodes(j) - nodes(k);
    }
    lam(j) = Scalar(1) / prod;
  }
  lam /= lam.cwiseAbs().maxCoeff();
  return lam;
}

/// Spectral differentiation matrix for the Lagrange basis on the given nodes:
/// entry (i, j) is the derivative of the j-th basis polynomial at node i.
/// Negative-sum diagonal, so rows sum to zero up to roundoff.
template <typename Scalar>
MatrixX<Scalar> differentiation_matrix(const VectorX<Scalar>& nodes) {
  const Eigen::Index n = nodes.size();
  const VectorX<Scalar> lam = barycentric_weights(nodes);
  MatrixX<Scalar> d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar row_sum = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      d(i, j) = (lam(j) / lam(i)) / (nodes(i) - nodes(j));
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;
  }
  return d;
}

template <typename Scalar>
MatrixX<Scalar> differentiation_matrix(const QuadratureRule<Scalar>& rule) {
  return differentiation_matrix(rule.nodes);
}

/// Values of the Lagrange basis on `nodes` at the `targets`: entry (k, j) is
/// l_j(t_k). Barycentric form; rows at exact node hits are unit vectors.
template <typename Scalar>
MatrixX<Scalar> lagrange_eval_matrix(const VectorX<Scalar>& nodes, const VectorX<Scalar>& targets) {
  const Eigen::Index n = nodes.size();
  const Eigen::Index m = targets.size();
  const VectorX<Scalar> lam = barycentric_weights(nodes);
  MatrixX<Scalar> v = MatrixX<Scalar>::Zero(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (targets(k) == nodes(j)) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      v(k, hit) = Scalar(1);
      continue;
    }
    Scalar denom = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar c = lam(j) / (targets(k) - nodes(j));
      v(k, j) = c;
      denom += c;
    }
    v.row(k) /= denom;
  }
  return v;
}

/// Polynomial in nodal (Lagrange) representation: values at its own nodes.
/// The canonical representation throughout the library; monomial coefficients
/// are never stored.
template <typename Scalar = double>
class NodalPolynomial {
 public:
  NodalPolynomial() = default;
  NodalPolynomial(VectorX<Scalar> nodes, VectorX<Scalar> values)
      : nodes_(std::move(nodes)),
        values_(std::move(values)),
        bary_(barycentric_weights(nodes_)) {}

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }
  const VectorX<Scalar>& nodes() const { return nodes_; }
  const VectorX<Scalar>& values() const { return values_; }

  /// Barycentric evaluation; reproduces nodal values exactly at the nodes.
  Scalar operator()(Scalar x) const {
    Scalar num = Scalar(0), den = Scalar(0);
    for (Eigen::Index j = 0; j < nodes_.size(); ++j) {
      if (x == nodes_(j)) return values_(j);
      const Scalar c = bary_(j) / (x - nodes_(j));
      num += c * values_(j);
      den += c;
    }
    return num / den;
  }

  /// Exact derivative, represented on the same nodes.
  NodalPolynomial derivative() const {
    return NodalPolynomial(nodes_, differentiation_matrix(nodes_) * values_);
  }

  /// Values at many points.
  VectorX<Scalar> eval(const VectorX<Scalar>& targets) const {
    return lagrange_eval_matrix(nodes_, targets) * values_;
  }

 private:
  VectorX<Scalar> nodes_;
  VectorX<Scalar> values_;
  VectorX<Scalar> bary_;
};

/// Interpolate a scalar function at the GLL nodes of the requested degree.
/// Degree 0 samples at the midpoint. Non-finite samples are rejected.
template <typename Scalar = double, typename F>
NodalPolynomial<Scalar> interpolate_coefficient(F&& f, int degree) {
  if (degree < 0) throw InvalidOrderError("interpolate_coefficient: degree must be >= 0");
  VectorX<Scalar> nodes;
  if (degree == 0) {
    nodes.resize(1);
    nodes(0) = Scalar(0);
  } else {
    nodes = gll_rule<Scalar>(degree).nodes;
  }
  VectorX<Scalar> values(nodes.size());
  for (Eigen::Index j = 0; j < nodes.size(); ++j) {
    const Scalar v = f(nodes(j));
    if (!std::isfinite(v)) {
      throw InvalidCoefficientError("interpolate_coefficient: non-finite sample at node " +
                                    std::to_string(static_cast<double>(nodes(j))));
    }
    values(j) = v;
  }
  return NodalPolynomial<Scalar>(std::move(nodes), std::move(values));
}

/// Gram matrices of the degree-W nodal basis on (-1, 1) for the L2, H1-seminorm
/// and H2-seminorm inner products. Their sum represents the full H2 norm
/// ||u||^2 = ||u||^2_{L2} + ||u'||^2_{L2} + ||u''||^2_{L2}.
template <typename Scalar = double>
struct ReferenceGram {
  int order = 0;
  MatrixX<Scalar> l2;
  MatrixX<Scalar> h1_semi;
  MatrixX<Scalar> h2_semi;

  MatrixX<Scalar> full() const { return l2 + h1_semi + h2_semi; }
};

/// Entries integrated with a (2W+2)-point Gauss rule, exact for products of
/// degree-W basis functions, so they are exact up to roundoff.
template <typename Scalar = double>
ReferenceGram<Scalar> reference_gram(int order) {
  if (order < 1) throw InvalidOrderError("reference_gram: order must be >= 1");
  const auto nodal = gll_rule<Scalar>(order);
  const auto quad = gauss_rule<Scalar>(2 * order + 2);
  const MatrixX<Scalar> d = differentiation_matrix(nodal.nodes);
  const MatrixX<Scalar> v0 = lagrange_eval_matrix(nodal.nodes, quad.nodes);
  const MatrixX<Scalar> v1 = v0 * d;
  const MatrixX<Scalar> v2 = v1 * d;
  ReferenceGram<Scalar> g;
  g.order = order;
  g.l2 = symmetrized(v0.transpose() * quad.weights.asDiagonal() * v0);
  g.h1_semi = symmetrized(v1.transpose() * quad.weights.asDiagonal() * v1);
  g.h2_semi = symmetrized(v2.transpose() * quad.weights.asDiagonal() * v2);
  return g;
}

}  // namespace sturm
