// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sturm/problem.hpp"
#include "sturm/reference_element.hpp"

namespace sturm {

/// Which bilinear form backs the right-hand side of the discrete eigenproblem:
/// the least-squares form tests the r-weighted trial function against the
/// element operator image, the plain mass form against the test function
/// itself.
enum class BVariant { lsq_weighted, plain_mass };

inline std::string to_string(BVariant v) {
  return v == BVariant::lsq_weighted ? "lsq" : "mass";
}

/// Element-shared reference data: nodal GLL rule of order W, a Gauss rule with
/// 2W+2 points (exact for every assembled integrand, which reaches degree
/// 4W-2), and basis value/derivative matrices at the Gauss nodes.
template <typename Scalar = double>
struct ReferenceBasis {
  QuadratureRule<Scalar> nodal;
  QuadratureRule<Scalar> quad;
  MatrixX<Scalar> d;   // differentiation on the GLL nodes
  MatrixX<Scalar> v0;  // basis values at quad nodes
  MatrixX<Scalar> v1;  // first derivatives
  MatrixX<Scalar> v2;  // second derivatives
  VectorX<Scalar> sqrt_w;
};

template <typename Scalar = double>
ReferenceBasis<Scalar> reference_basis(int order) {
  ReferenceBasis<Scalar> basis;
  basis.nodal = gll_rule<Scalar>(order);
  basis.quad = gauss_rule<Scalar>(2 * order + 2);
  basis.d = differentiation_matrix(basis.nodal.nodes);
  basis.v0 = lagrange_eval_matrix(basis.nodal.nodes, basis.quad.nodes);
  basis.v1 = basis.v0 * basis.d;
  basis.v2 = basis.v1 * basis.d;
  basis.sqrt_w = basis.quad.weights.cwiseSqrt();
  return basis;
}

/// Discrete element residual operator. With nodal coefficients c,
/// (e c)_k = sqrt(w_k) (L^a u)(xi_k) where
/// L^a u = [-(2/h)^2 (phat u')' + qhat u] sqrt(h/2) and phat, qhat are the
/// degree-(W-1) GLL interpolants of the pulled-back coefficients.
template <typename Scalar = double>
struct ElementOperator {
  int index = 0;
  MatrixX<Scalar> e;
  /// (weighted_values c)_k = sqrt(w_k) what_k u(xi_k), with
  /// what = sqrt(h/2) * degree-(W-1) interpolant of r(M_l(.)).
  MatrixX<Scalar> weighted_values;
  VectorX<Scalar> what;
  VectorX<Scalar> r_samples;  // exact r(M_l(xi_k)), for normalization
};

template <typename Scalar>
ElementOperator<Scalar> element_operator(const Mesh<Scalar>& mesh,
                                         const CoefficientSet<Scalar>& coeffs, int l,
                                         const ReferenceBasis<Scalar>& basis) {
  const auto em = element_map(mesh, l);
  const int cdeg = mesh.order - 1;
  const int piece_p = coeffs.p.piece_for_interval(em.left, em.right);
  const int piece_q = coeffs.q.piece_for_interval(em.left, em.right);
  const int piece_r = coeffs.r.piece_for_interval(em.left, em.right);
  const auto phat = interpolate_coefficient<Scalar>(
      [&](Scalar xi) { return coeffs.p.eval_piece(piece_p, em(xi)); }, cdeg);
  const auto qhat = interpolate_coefficient<Scalar>(
      [&](Scalar xi) { return coeffs.q.eval_piece(piece_q, em(xi)); }, cdeg);
  const auto rhat = interpolate_coefficient<Scalar>(
      [&](Scalar xi) { return coeffs.r.eval_piece(piece_r, em(xi)); }, cdeg);

  // coefficient interpolants at the quadrature nodes; p' by exact
  // differentiation of the interpolant, never a second interpolation
  const MatrixX<Scalar> ceval = lagrange_eval_matrix(phat.nodes(), basis.quad.nodes);
  const VectorX<Scalar> p_q = ceval * phat.values();
  const VectorX<Scalar> dp_q = ceval * (differentiation_matrix(phat.nodes()) * phat.values());
  const VectorX<Scalar> q_q = ceval * qhat.values();
  const VectorX<Scalar> r_q = ceval * rhat.values();

  const Scalar chain = Scalar(4) / (em.h * em.h);  // (2/h)^2
  const Scalar scale = std::sqrt(em.jacobian);

  ElementOperator<Scalar> op;
  op.index = l;
  const MatrixX<Scalar> lop =
      scale * (q_q.asDiagonal() * basis.v0 -
               chain * (p_q.asDiagonal() * basis.v2 + dp_q.asDiagonal() * basis.v1));
  op.e = basis.sqrt_w.asDiagonal() * lop;
  op.what = scale * r_q;
  op.weighted_values = basis.sqrt_w.cwiseProduct(op.what).asDiagonal() * basis.v0;
  op.r_samples.resize(basis.quad.point_count());
  for (int k = 0; k < basis.quad.point_count(); ++k) {
    op.r_samples(k) = coeffs.r.eval_piece(piece_r, em(basis.quad.nodes(k)));
  }
  return op;
}

template <typename Scalar>
ElementOperator<Scalar> element_operator(const Mesh<Scalar>& mesh,
                                         const CoefficientSet<Scalar>& coeffs, int l) {
  return element_operator(mesh, coeffs, l, reference_basis<Scalar>(mesh.order));
}

/// One squared penalty term of the least-squares functional: a sparse linear
/// functional over global DOFs with a target value (0 for the homogeneous
/// conditions). Contributes row^T row to A.
template <typename Scalar = double>
struct PenaltyRow {
  enum class Kind { value_jump, derivative_jump, boundary, interface_value, interface_flux };
  Kind kind = Kind::boundary;
  std::vector<std::pair<int, Scalar>> coeffs;
  Scalar target = Scalar(0);

  Scalar eval(const VectorX<Scalar>& x) const {
    Scalar acc = Scalar(0);
    for (const auto& [i, c] : coeffs) acc += c * x(i);
    return acc;
  }
};

namespace detail {

template <typename Scalar>
void append_derivative_trace(PenaltyRow<Scalar>& row, const MatrixX<Scalar>& d, int element,
                             int node, Scalar factor, int n_per_elem) {
  for (int m = 0; m < n_per_elem; ++m) {
    row.coeffs.push_back({element * n_per_elem + m, factor * d(node, m)});
  }
}

}  // namespace detail

/// Value- and scaled-derivative-jump rows at every interior node shared by two
/// elements, except the interface node:
/// [u]_i = u_{i+1}(-1) - u_i(1),
/// [du]_i = (2/h_{i+1}) u_{i+1}'(-1) - (2/h_i) u_i'(1).
template <typename Scalar>
std::vector<PenaltyRow<Scalar>> jump_rows(const Mesh<Scalar>& mesh) {
  using Kind = typename PenaltyRow<Scalar>::Kind;
  std::vector<PenaltyRow<Scalar>> rows;
  const int L = mesh.element_count();
  if (L < 2) return rows;
  const int w = mesh.order;
  const int np = w + 1;
  const MatrixX<Scalar> d = differentiation_matrix(gll_rule<Scalar>(w).nodes);
  for (int i = 0; i + 1 < L; ++i) {
    if (mesh.interface_breakpoint == i + 1) continue;
    PenaltyRow<Scalar> val;
    val.kind = Kind::value_jump;
    val.coeffs = {{(i + 1) * np, Scalar(1)}, {i * np + w, Scalar(-1)}};
    rows.push_back(std::move(val));

    PenaltyRow<Scalar> der;
    der.kind = Kind::derivative_jump;
    detail::append_derivative_trace(der, d, i + 1, 0, Scalar(2) / mesh.h(i + 1), np);
    detail::append_derivative_trace(der, d, i, w, Scalar(-2) / mesh.h(i), np);
    rows.push_back(std::move(der));
  }
  return rows;
}

/// Boundary penalty rows for the three condition kinds.
template <typename Scalar>
std::vector<PenaltyRow<Scalar>> boundary_rows(const Mesh<Scalar>& mesh, BoundaryKind bc) {
  using Kind = typename PenaltyRow<Scalar>::Kind;
  const int w = mesh.order;
  const int np = w + 1;
  const int last = mesh.element_count() - 1;
  const MatrixX<Scalar> d = differentiation_matrix(gll_rule<Scalar>(w).nodes);
  std::vector<PenaltyRow<Scalar>> rows;
  switch (bc) {
    case BoundaryKind::dirichlet: {
      PenaltyRow<Scalar> left;
      left.kind = Kind::boundary;
      left.coeffs = {{0, Scalar(1)}};
      PenaltyRow<Scalar> right;
      right.kind = Kind::boundary;
      right.coeffs = {{last * np + w, Scalar(1)}};
      rows = {std::move(left), std::move(right)};
      break;
    }
    case BoundaryKind::neumann: {
      PenaltyRow<Scalar> left;
      left.kind = Kind::boundary;
      detail::append_derivative_trace(left, d, 0, 0, Scalar(2) / mesh.h(0), np);
      PenaltyRow<Scalar> right;
      right.kind = Kind::boundary;
      detail::append_derivative_trace(right, d, last, w, Scalar(2) / mesh.h(last), np);
      rows = {std::move(left), std::move(right)};
      break;
    }
    case BoundaryKind::periodic: {
      PenaltyRow<Scalar> val;
      val.kind = Kind::boundary;
      val.coeffs = {{0, Scalar(1)}, {last * np + w, Scalar(-1)}};
      PenaltyRow<Scalar> der;
      der.kind = Kind::boundary;
      detail::append_derivative_trace(der, d, 0, 0, Scalar(2) / mesh.h(0), np);
      detail::append_derivative_trace(der, d, last, w, Scalar(-2) / mesh.h(last), np);
      rows = {std::move(val), std::move(der)};
      break;
    }
  }
  return rows;
}

/// Interface penalty rows (left trace minus right trace):
/// value row u^1(1) - u^2(-1) with target [[u]], and the p-weighted flux row
/// (2/h1) p(z-) u^1'(1) - (2/h2) p(z+) u^2'(-1) with target [[p u']].
template <typename Scalar>
std::vector<PenaltyRow<Scalar>> interface_rows(const Mesh<Scalar>& mesh,
                                               const CoefficientSet<Scalar>& coeffs,
                                               const InterfaceSpec<Scalar>& interface) {
  using Kind = typename PenaltyRow<Scalar>::Kind;
  if (!mesh.has_interface()) {
    throw MeshError("interface_rows: mesh carries no interface breakpoint");
  }
  const int w = mesh.order;
  const int np = w + 1;
  const int li = mesh.interface_breakpoint - 1;  // last element of subdomain 1
  const MatrixX<Scalar> d = differentiation_matrix(gll_rule<Scalar>(w).nodes);
  const Scalar zeta = interface.zeta;
  const Scalar p_left = coeffs.p.eval_one_sided(zeta, -1);
  const Scalar p_right = coeffs.p.eval_one_sided(zeta, +1);

  PenaltyRow<Scalar> val;
  val.kind = Kind::interface_value;
  val.coeffs = {{li * np + w, Scalar(1)}, {(li + 1) * np, Scalar(-1)}};
  val.target = interface.jump_value;

  PenaltyRow<Scalar> flux;
  flux.kind = Kind::interface_flux;
  detail::append_derivative_trace(flux, d, li, w, p_left * Scalar(2) / mesh.h(li), np);
  detail::append_derivative_trace(flux, d, li + 1, 0, -p_right * Scalar(2) / mesh.h(li + 1), np);
  flux.target = interface.jump_flux;

  return {std::move(val), std::move(flux)};
}

/// The assembled discrete system: A from the least-squares normal equations,
/// B in the requested variant, the block-diagonal reference-H2 preconditioner
/// P, the penalty rows and the per-element operators. DOFs are element-major,
/// node-minor, elements numbered left to right; n = L (W+1) with no sharing.
template <typename Scalar = double>
struct AssembledSystem {
  Mesh<Scalar> mesh;
  BVariant variant = BVariant::lsq_weighted;
  bool symmetrized_b = false;
  MatrixX<Scalar> a;
  MatrixX<Scalar> b;
  MatrixX<Scalar> p;
  std::vector<PenaltyRow<Scalar>> rows;
  std::vector<ElementOperator<Scalar>> elements;
  QuadratureRule<Scalar> quad;
  MatrixX<Scalar> value_at_quad;  // GLL basis values at the quad nodes

  int dofs() const { return mesh.dof_count(); }
  int dof(int element, int node) const { return element * (mesh.order + 1) + node; }
};

namespace detail {

template <typename Scalar>
void scatter_row_product(MatrixX<Scalar>& a, const PenaltyRow<Scalar>& row) {
  for (const auto& [i, ci] : row.coeffs) {
    for (const auto& [j, cj] : row.coeffs) {
      a(i, j) += ci * cj;
    }
  }
}

}  // namespace detail

/// A = sum_l E_l^T E_l + sum_rows row^T row, exactly symmetric.
template <typename Scalar>
std::pair<MatrixX<Scalar>, std::vector<PenaltyRow<Scalar>>> assemble_A(
    const Mesh<Scalar>& mesh, const CoefficientSet<Scalar>& coeffs, BoundaryKind bc,
    const std::optional<InterfaceSpec<Scalar>>& interface = std::nullopt) {
  const auto basis = reference_basis<Scalar>(mesh.order);
  const int np = mesh.order + 1;
  const int n = mesh.dof_count();
  MatrixX<Scalar> a = MatrixX<Scalar>::Zero(n, n);
  for (int l = 0; l < mesh.element_count(); ++l) {
    const auto op = element_operator(mesh, coeffs, l, basis);
    a.block(l * np, l * np, np, np) += symmetrized(op.e.transpose() * op.e);
  }
  std::vector<PenaltyRow<Scalar>> rows = jump_rows(mesh);
  auto bnd = boundary_rows(mesh, bc);
  rows.insert(rows.end(), bnd.begin(), bnd.end());
  if (interface) {
    auto ifc = interface_rows(mesh, coeffs, *interface);
    rows.insert(rows.end(), ifc.begin(), ifc.end());
  }
  for (const auto& row : rows) detail::scatter_row_product(a, row);
  return {std::move(a), std::move(rows)};
}

/// B in the requested variant, block diagonal over elements.
template <typename Scalar>
MatrixX<Scalar> assemble_B(const Mesh<Scalar>& mesh, const CoefficientSet<Scalar>& coeffs,
                           BVariant variant) {
  const auto basis = reference_basis<Scalar>(mesh.order);
  const int np = mesh.order + 1;
  const int n = mesh.dof_count();
  MatrixX<Scalar> b = MatrixX<Scalar>::Zero(n, n);
  for (int l = 0; l < mesh.element_count(); ++l) {
    const auto op = element_operator(mesh, coeffs, l, basis);
    if (variant == BVariant::lsq_weighted) {
      b.block(l * np, l * np, np, np) += op.e.transpose() * op.weighted_values;
    } else {
      b.block(l * np, l * np, np, np) += symmetrized(
          basis.v0.transpose() * basis.quad.weights.cwiseProduct(op.what).asDiagonal() *
          basis.v0);
    }
  }
  return b;
}

/// Block-diagonal preconditioner realizing the broken reference-H2 norm: one
/// identical full H2 Gram block per element.
template <typename Scalar>
MatrixX<Scalar> assemble_preconditioner(const Mesh<Scalar>& mesh) {
  const MatrixX<Scalar> block = reference_gram<Scalar>(mesh.order).full();
  const int np = mesh.order + 1;
  const int n = mesh.dof_count();
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(n, n);
  for (int l = 0; l < mesh.element_count(); ++l) {
    p.block(l * np, l * np, np, np) = block;
  }
  return p;
}

template <typename Scalar>
BVariant default_b_variant(const ProblemSpec<Scalar>& spec) {
  return spec.interface ? BVariant::plain_mass : BVariant::lsq_weighted;
}

/// One-stop assembly of A, B, P, rows and element operators.
template <typename Scalar>
AssembledSystem<Scalar> assemble_system(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                                        std::optional<BVariant> variant = std::nullopt,
                                        bool symmetrize = false) {
  if (spec.interface && !mesh.has_interface()) {
    throw MeshError("assemble_system: interface problem needs an interface-aligned mesh");
  }
  AssembledSystem<Scalar> sys;
  sys.mesh = mesh;
  sys.variant = variant.value_or(default_b_variant(spec));
  const auto basis = reference_basis<Scalar>(mesh.order);
  sys.quad = basis.quad;
  sys.value_at_quad = basis.v0;
  const int np = mesh.order + 1;
  const int n = mesh.dof_count();
  sys.a = MatrixX<Scalar>::Zero(n, n);
  sys.b = MatrixX<Scalar>::Zero(n, n);
  for (int l = 0; l < mesh.element_count(); ++l) {
    auto op = element_operator(mesh, spec.coefficients, l, basis);
    sys.a.block(l * np, l * np, np, np) += symmetrized(op.e.transpose() * op.e);
    if (sys.variant == BVariant::lsq_weighted) {
      sys.b.block(l * np, l * np, np, np) += op.e.transpose() * op.weighted_values;
    } else {
      sys.b.block(l * np, l * np, np, np) += symmetrized(
          basis.v0.transpose() * basis.quad.weights.cwiseProduct(op.what).asDiagonal() *
          basis.v0);
    }
    sys.elements.push_back(std::move(op));
  }
  sys.rows = jump_rows(mesh);
  auto bnd = boundary_rows(mesh, spec.bc);
  sys.rows.insert(sys.rows.end(), bnd.begin(), bnd.end());
  if (spec.interface) {
    auto ifc = interface_rows(mesh, spec.coefficients, *spec.interface);
    sys.rows.insert(sys.rows.end(), ifc.begin(), ifc.end());
  }
  for (const auto& row : sys.rows) detail::scatter_row_product(sys.a, row);
  if (symmetrize && sys.variant == BVariant::lsq_weighted) {
    sys.b = symmetrized(sys.b);
    sys.symmetrized_b = true;
  }
  sys.p = assemble_preconditioner(mesh);
  return sys;
}

}  // namespace sturm
