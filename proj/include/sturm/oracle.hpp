// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "sturm/errors.hpp"
#include "sturm/problem.hpp"
#include "sturm/reference_element.hpp"

namespace sturm {

/// Closed-form-solvable reduction of a problem: p piecewise constant (beta
/// per subdomain), constant q and r. -(beta u')' + s u = lambda rho u reduces
/// to -(beta/rho) u'' = (lambda - s/rho) u.
template <typename Scalar = double>
struct DispersionProblem {
  Scalar a = Scalar(0);
  Scalar b = Scalar(1);
  Scalar beta1 = Scalar(1);
  Scalar beta2 = Scalar(1);
  Scalar shift = Scalar(0);  // constant q
  Scalar rho = Scalar(1);    // constant r
  BoundaryKind bc = BoundaryKind::dirichlet;
  std::optional<Scalar> zeta;
};

/// Exact eigenpair with evaluable eigenfunction and derivatives.
template <typename Scalar = double>
struct ReferenceEigenpair {
  Scalar lambda = Scalar(0);
  std::function<Scalar(Scalar)> u;
  std::function<Scalar(Scalar)> du;
  std::function<Scalar(Scalar)> d2u;
};

/// Reduce a ProblemSpec to dispersion form when its coefficient class allows
/// it; nullopt otherwise (use the finite-difference oracle then).
template <typename Scalar>
std::optional<DispersionProblem<Scalar>> dispersion_form(const ProblemSpec<Scalar>& spec) {
  const auto& c = spec.coefficients;
  if (!c.p.is_piecewise_constant() || !c.q.is_piecewise_constant() ||
      !c.r.is_piecewise_constant()) {
    return std::nullopt;
  }
  if (c.q.constant_values().size() != 1 || c.r.constant_values().size() != 1) {
    return std::nullopt;
  }
  DispersionProblem<Scalar> d;
  d.a = spec.a;
  d.b = spec.b;
  d.shift = c.q.constant_values()[0];
  d.rho = c.r.constant_values()[0];
  d.bc = spec.bc;
  const auto& pv = c.p.constant_values();
  if (spec.interface) {
    d.zeta = spec.interface->zeta;
    if (pv.size() == 1) {
      d.beta1 = d.beta2 = pv[0];
    } else if (pv.size() == 2 && c.p.breakpoints().size() == 1 &&
               c.p.breakpoints()[0] == spec.interface->zeta) {
      d.beta1 = pv[0];
      d.beta2 = pv[1];
    } else {
      return std::nullopt;
    }
  } else {
    if (pv.size() != 1) return std::nullopt;
    d.beta1 = d.beta2 = pv[0];
  }
  return d;
}

namespace detail {

template <typename Scalar>
ReferenceEigenpair<Scalar> trig_mode(Scalar lambda, Scalar k, Scalar x0, bool cosine,
                                     Scalar amplitude) {
  ReferenceEigenpair<Scalar> pair;
  pair.lambda = lambda;
  if (cosine) {
    pair.u = [=](Scalar x) { return amplitude * std::cos(k * (x - x0)); };
    pair.du = [=](Scalar x) { return -amplitude * k * std::sin(k * (x - x0)); };
    pair.d2u = [=](Scalar x) { return -amplitude * k * k * std::cos(k * (x - x0)); };
  } else {
    pair.u = [=](Scalar x) { return amplitude * std::sin(k * (x - x0)); };
    pair.du = [=](Scalar x) { return amplitude * k * std::cos(k * (x - x0)); };
    pair.d2u = [=](Scalar x) { return -amplitude * k * k * std::sin(k * (x - x0)); };
  }
  return pair;
}

/// Characteristic function of the Dirichlet interface problem in t = sqrt of
/// the reduced eigenvalue: g = b1 k1 cos(k1 L1) sin(k2 L2) + b2 k2 cos(k2 L2) sin(k1 L1).
template <typename Scalar>
Scalar interface_characteristic(Scalar t, Scalar b1, Scalar b2, Scalar l1, Scalar l2) {
  const Scalar k1 = t / std::sqrt(b1);
  const Scalar k2 = t / std::sqrt(b2);
  return b1 * k1 * std::cos(k1 * l1) * std::sin(k2 * l2) +
         b2 * k2 * std::cos(k2 * l2) * std::sin(k1 * l1);
}

}  // namespace detail

/// First k exact eigenpairs. Classical closed forms without an interface;
/// with an interface, roots of the transcendental characteristic function,
/// bracketed on a grid uniform in sqrt(lambda) and refined by bisection.
/// Eigenfunctions are normalized to unit r-weighted L2 norm.
template <typename Scalar>
std::vector<ReferenceEigenpair<Scalar>> dispersion_eigenvalues(const DispersionProblem<Scalar>& prob,
                                                               int k) {
  std::vector<ReferenceEigenpair<Scalar>> out;
  if (k <= 0) return out;
  const Scalar pi = std::acos(Scalar(-1));
  const Scalar length = prob.b - prob.a;
  const Scalar s = prob.shift / prob.rho;

  if (!prob.zeta || prob.beta1 == prob.beta2) {
    const Scalar beta = prob.beta1 / prob.rho;
    const Scalar l2norm = std::sqrt(prob.rho * length / Scalar(2));
    switch (prob.bc) {
      case BoundaryKind::dirichlet: {
        for (int n = 1; static_cast<int>(out.size()) < k; ++n) {
          const Scalar kn = Scalar(n) * pi / length;
          out.push_back(detail::trig_mode(beta * kn * kn + s, kn, prob.a, false,
                                          Scalar(1) / l2norm));
        }
        break;
      }
      case BoundaryKind::neumann: {
        // n = 0 is the constant mode
        const Scalar const_norm = std::sqrt(prob.rho * length);
        out.push_back(detail::trig_mode(s, Scalar(0), prob.a, true, Scalar(1) / const_norm));
        for (int n = 1; static_cast<int>(out.size()) < k; ++n) {
          const Scalar kn = Scalar(n) * pi / length;
          out.push_back(detail::trig_mode(beta * kn * kn + s, kn, prob.a, true,
                                          Scalar(1) / l2norm));
        }
        break;
      }
      case BoundaryKind::periodic: {
        const Scalar const_norm = std::sqrt(prob.rho * length);
        out.push_back(detail::trig_mode(s, Scalar(0), prob.a, true, Scalar(1) / const_norm));
        for (int n = 1; static_cast<int>(out.size()) < k; ++n) {
          const Scalar kn = Scalar(2 * n) * pi / length;
          const Scalar lam = beta * kn * kn + s;
          out.push_back(detail::trig_mode(lam, kn, prob.a, true, Scalar(1) / l2norm));
          if (static_cast<int>(out.size()) < k) {
            out.push_back(detail::trig_mode(lam, kn, prob.a, false, Scalar(1) / l2norm));
          }
        }
        break;
      }
    }
    out.resize(static_cast<size_t>(k));
    return out;
  }

  if (prob.bc != BoundaryKind::dirichlet) {
    throw ReferenceUnavailableError(
        "dispersion_eigenvalues: interface problems are solved for Dirichlet conditions only");
  }
  const Scalar b1 = prob.beta1 / prob.rho;
  const Scalar b2 = prob.beta2 / prob.rho;
  const Scalar zeta = *prob.zeta;
  const Scalar l1 = zeta - prob.a;
  const Scalar l2 = prob.b - zeta;

  // grid uniform in t = sqrt(lambda - s): fine against the slowest phase
  const Scalar slow = std::max(l1 / std::sqrt(b1), l2 / std::sqrt(b2));
  const auto collect_roots = [&](Scalar step) {
    std::vector<Scalar> roots;
    Scalar t_prev = step;
    Scalar g_prev = detail::interface_characteristic(t_prev, b1, b2, l1, l2);
    const int max_cells = 4000000;
    for (int cell = 1; static_cast<int>(roots.size()) < k; ++cell) {
      if (cell > max_cells) {
        throw RefinementRequestError(
            "dispersion_eigenvalues: bracketing ran away; refine the grid");
      }
      const Scalar t_next = t_prev + step;
      const Scalar g_next = detail::interface_characteristic(t_next, b1, b2, l1, l2);
      if ((g_prev < Scalar(0)) != (g_next < Scalar(0)) || g_next == Scalar(0)) {
        Scalar lo = t_prev, hi = t_next, glo = g_prev;
        while (hi - lo > Scalar(4e-14) * lo) {
          const Scalar mid = (lo + hi) / Scalar(2);
          const Scalar gm = detail::interface_characteristic(mid, b1, b2, l1, l2);
          if ((gm < Scalar(0)) == (glo < Scalar(0))) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        roots.push_back((lo + hi) / Scalar(2));
      }
      t_prev = t_next;
      g_prev = g_next;
    }
    return roots;
  };
  // asymptotic count N(t) = t (L1/sqrt(b1) + L2/sqrt(b2)) / pi + O(1) guards
  // against roots skipped inside one grid cell; one refinement retry
  const auto count_consistent = [&](const std::vector<Scalar>& roots) {
    const Scalar weyl = roots.back() * (l1 / std::sqrt(b1) + l2 / std::sqrt(b2)) / pi;
    return std::abs(weyl - Scalar(k)) <= Scalar(1.75);
  };
  std::vector<Scalar> roots = collect_roots(pi / (Scalar(20) * slow));
  if (!count_consistent(roots)) {
    roots = collect_roots(pi / (Scalar(400) * slow));
    if (!count_consistent(roots)) {
      throw RefinementRequestError(
          "dispersion_eigenvalues: root count disagrees with the asymptotic count; refine the "
          "grid");
    }
  }

  const auto gauss = gauss_rule<Scalar>(128);
  for (const Scalar t : roots) {
    const Scalar k1 = t / std::sqrt(b1);
    const Scalar k2 = t / std::sqrt(b2);
    const Scalar s1 = std::sin(k1 * l1), c1 = std::cos(k1 * l1);
    const Scalar s2 = std::sin(k2 * l2), c2 = std::cos(k2 * l2);
    // amplitude of the right piece from value continuity, or from flux
    // continuity when both traces vanish at the interface
    const Scalar cr = (std::abs(s2) > Scalar(1e-6))
                          ? s1 / s2
                          : -(b1 * k1 * c1) / (b2 * k2 * c2);
    const Scalar a = prob.a, b = prob.b;
    auto u_raw = [=](Scalar x) {
      return (x <= zeta) ? std::sin(k1 * (x - a)) : cr * std::sin(k2 * (b - x));
    };
    // r-weighted L2 normalization by per-piece Gauss quadrature
    Scalar nrm2 = Scalar(0);
    for (int i = 0; i < gauss.point_count(); ++i) {
      const Scalar x1 = a + l1 * (gauss.nodes(i) + Scalar(1)) / Scalar(2);
      const Scalar x2 = zeta + l2 * (gauss.nodes(i) + Scalar(1)) / Scalar(2);
      nrm2 += gauss.weights(i) * (l1 / Scalar(2)) * prob.rho * u_raw(x1) * u_raw(x1);
      nrm2 += gauss.weights(i) * (l2 / Scalar(2)) * prob.rho * u_raw(x2) * u_raw(x2);
    }
    const Scalar amp = Scalar(1) / std::sqrt(nrm2);
    ReferenceEigenpair<Scalar> pair;
    pair.lambda = t * t + s;
    pair.u = [=](Scalar x) {
      return amp * ((x <= zeta) ? std::sin(k1 * (x - a)) : cr * std::sin(k2 * (b - x)));
    };
    pair.du = [=](Scalar x) {
      return amp * ((x <= zeta) ? k1 * std::cos(k1 * (x - a)) : -cr * k2 * std::cos(k2 * (b - x)));
    };
    pair.d2u = [=](Scalar x) {
      return amp * ((x <= zeta) ? -k1 * k1 * std::sin(k1 * (x - a))
                                : -cr * k2 * k2 * std::sin(k2 * (b - x)));
    };
    out.push_back(std::move(pair));
  }
  return out;
}

/// Convenience: oracle eigenpairs for a ProblemSpec that reduces to
/// dispersion form.
template <typename Scalar>
std::vector<ReferenceEigenpair<Scalar>> dispersion_eigenvalues(const ProblemSpec<Scalar>& spec,
                                                               int k) {
  const auto form = dispersion_form(spec);
  if (!form) {
    throw ReferenceUnavailableError(
        "dispersion_eigenvalues: coefficients are not piecewise constant with constant q, r");
  }
  return dispersion_eigenvalues(*form, k);
}

/// Second-order conservative finite differences on a uniform grid aligned
/// with the interface: flux coefficients at cell midpoints (one-sided across
/// the interface), 3-point scheme, symmetric tridiagonal-definite generalized
/// solve. Returns the first k eigenvalues.
template <typename Scalar>
std::vector<Scalar> fd_eigenvalues(const ProblemSpec<Scalar>& spec, int n_grid, int k) {
  if (n_grid < 50) throw SizeError("fd_eigenvalues: n_grid must be >= 50");
  if (k <= 0) return {};
  const Scalar length = spec.b - spec.a;
  const Scalar step = length / Scalar(n_grid);
  if (spec.interface) {
    const Scalar pos = (spec.interface->zeta - spec.a) / step;
    if (std::abs(pos - std::round(static_cast<double>(pos))) > Scalar(1e-9)) {
      throw GridAlignmentError(
          "fd_eigenvalues: interface not on the grid; choose n_grid a multiple of the "
          "interface's rational denominator");
    }
  }
  const auto& c = spec.coefficients;
  const auto node = [&](int i) { return spec.a + step * Scalar(i); };
  const auto p_mid = [&](int i) { return c.p(node(i) + step / Scalar(2)); };  // midpoint of cell i

  if (spec.bc == BoundaryKind::periodic) {
    const int n = n_grid;
    MatrixX<Scalar> stiff = MatrixX<Scalar>::Zero(n, n);
    MatrixX<Scalar> mass = MatrixX<Scalar>::Zero(n, n);
    for (int e = 0; e < n; ++e) {  // edge e couples nodes e and (e+1) mod n
      const Scalar pm = p_mid(e) / step;
      const int i = e, j = (e + 1) % n;
      stiff(i, i) += pm;
      stiff(j, j) += pm;
      stiff(i, j) -= pm;
      stiff(j, i) -= pm;
    }
    for (int i = 0; i < n; ++i) {
      stiff(i, i) += c.q(node(i)) * step;
      mass(i, i) = c.r(node(i)) * step;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX<Scalar>> es(stiff, mass,
                                                                 Eigen::EigenvaluesOnly);
    std::vector<Scalar> lambdas;
    for (int i = 0; i < std::min<int>(k, n); ++i) lambdas.push_back(es.eigenvalues()(i));
    return lambdas;
  }

  const bool dirichlet = spec.bc == BoundaryKind::dirichlet;
  const int lo = dirichlet ? 1 : 0;
  const int hi = dirichlet ? n_grid - 1 : n_grid;
  const int n = hi - lo + 1;
  if (k > n) throw SizeError("fd_eigenvalues: fewer grid unknowns than requested eigenvalues");
  VectorX<Scalar> diag = VectorX<Scalar>::Zero(n);
  VectorX<Scalar> off = VectorX<Scalar>::Zero(std::max(0, n - 1));
  VectorX<Scalar> mass(n);
  for (int i = lo; i <= hi; ++i) {
    const int row = i - lo;
    Scalar cell = step;
    if (!dirichlet && (i == 0 || i == n_grid)) cell = step / Scalar(2);
    Scalar d = c.q(node(i)) * cell;
    if (i > 0) d += p_mid(i - 1) / step;
    if (i < n_grid) d += p_mid(i) / step;
    diag(row) = d;
    mass(row) = c.r(node(i)) * cell;
    if (i < hi) off(row) = -p_mid(i) / step;
  }
  // reduce the generalized problem to a standard symmetric tridiagonal one
  const VectorX<Scalar> scale = mass.cwiseSqrt();
  for (int row = 0; row < n; ++row) {
    diag(row) /= mass(row);
    if (row < n - 1) off(row) /= scale(row) * scale(row + 1);
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  std::vector<Scalar> lambdas;
  for (int i = 0; i < k; ++i) lambdas.push_back(es.eigenvalues()(i));
  return lambdas;
}

}  // namespace sturm
