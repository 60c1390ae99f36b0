// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "sturm/assembly.hpp"

namespace sturm {

template <typename Scalar = double>
struct EigenPair {
  Scalar lambda = Scalar(0);
  VectorX<Scalar> dofs;  // normalized: unit r-weighted L2 norm, leading sign +
  Scalar residual = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar imag_part = Scalar(0);  // pre-filter diagnostic
};

template <typename Scalar = double>
struct RawEigenPair {
  std::complex<Scalar> lambda;
  VectorX<std::complex<Scalar>> vec;
};

enum class SolverPath { automatic, general, sym_definite };

template <typename Scalar = double>
struct SolveOptions {
  int k = 6;
  Scalar im_tol = Scalar(1e-8);
  Scalar res_tol = Scalar(1e-6);
  SolverPath path = SolverPath::automatic;
  std::optional<Scalar> target_sigma;  // keep the k nearest sigma instead of the k smallest
  bool polish = true;                  // inverse-iteration refinement of near-real pairs
};

/// Least-squares residual of a candidate pair: the assembled quadratic form of
/// L^a u - lambda what u plus every penalty evaluation, normalized by the
/// P-norm of the coefficient vector.
template <typename Scalar>
Scalar eigenpair_residual(const AssembledSystem<Scalar>& sys, const VectorX<Scalar>& x,
                          Scalar lambda) {
  const int np = sys.mesh.order + 1;
  Scalar acc = Scalar(0);
  for (const auto& op : sys.elements) {
    const auto xl = x.segment(op.index * np, np);
    acc += (op.e * xl - lambda * (op.weighted_values * xl)).squaredNorm();
  }
  for (const auto& row : sys.rows) {
    const Scalar v = row.eval(x);
    acc += v * v;
  }
  const Scalar pnorm2 = x.dot(sys.p * x);
  return std::sqrt(acc / pnorm2);
}

/// Squared r-weighted L2 norm of the spectral element function with nodal
/// coefficients x, using exact coefficient samples on the assembly rule.
template <typename Scalar>
Scalar b_norm_squared(const AssembledSystem<Scalar>& sys, const VectorX<Scalar>& x) {
  const int np = sys.mesh.order + 1;
  Scalar acc = Scalar(0);
  for (const auto& op : sys.elements) {
    const VectorX<Scalar> uq = sys.value_at_quad * x.segment(op.index * np, np);
    const Scalar jac = sys.mesh.h(op.index) / Scalar(2);
    acc += jac * (sys.quad.weights.array() * op.r_samples.array() * uq.array().square()).sum();
  }
  return acc;
}

/// Flip so the first nodal value that is significant relative to the largest
/// one is positive.
template <typename Scalar>
void apply_sign_convention(VectorX<Scalar>& x) {
  const Scalar scale = x.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) throw NormalizationError("sign convention: zero vector");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > Scalar(1e-10) * scale) {
      if (x(i) < Scalar(0)) x = -x;
      return;
    }
  }
}

namespace detail {

template <typename Scalar>
Scalar pencil_backward_error(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                             const VectorX<Scalar>& x, Scalar lambda) {
  const VectorX<Scalar> ax = a * x;
  const VectorX<Scalar> bx = b * x;
  return (ax - lambda * bx).norm() / (ax.norm() + std::abs(lambda) * bx.norm());
}

/// Inverse-iteration steps with a least-squares eigenvalue update; keeps
/// whichever candidate has the smaller pencil backward error.
template <typename Scalar>
void polish_pair(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, VectorX<Scalar>& x,
                 Scalar& lambda) {
  x.normalize();
  Scalar best = pencil_backward_error(a, b, x, lambda);
  for (int it = 0; it < 2; ++it) {
    // nudge the shift off the eigenvalue so the factorization stays usable
    const Scalar shift = lambda * (Scalar(1) + Scalar(1e-13));
    Eigen::PartialPivLU<MatrixX<Scalar>> lu(a - shift * b);
    VectorX<Scalar> z = lu.solve(b * x);
    if (!z.allFinite()) break;
    const Scalar zn = z.norm();
    if (!(zn > Scalar(0))) break;
    z /= zn;
    const VectorX<Scalar> bz = b * z;
    const Scalar denom = bz.squaredNorm();
    if (!(denom > Scalar(0))) break;
    const Scalar lambda_new = bz.dot(a * z) / denom;
    const Scalar err = pencil_backward_error(a, b, z, lambda_new);
    if (err < best) {
      best = err;
      x = z;
      lambda = lambda_new;
    }
  }
}

}  // namespace detail

/// Discard non-finite and complex modes, the nonpositive ones, and pairs whose
/// least-squares residual exceeds the tolerance; normalize survivors and sort
/// ascending (or keep the k nearest the target). May return fewer than k.
template <typename Scalar>
std::vector<EigenPair<Scalar>> filter_spurious(const std::vector<RawEigenPair<Scalar>>& raw,
                                               const AssembledSystem<Scalar>& sys,
                                               const SolveOptions<Scalar>& opts) {
  std::vector<EigenPair<Scalar>> kept;
  for (const auto& rp : raw) {
    const Scalar re = rp.lambda.real();
    const Scalar im = std::abs(rp.lambda.imag());
    if (!std::isfinite(re) || !std::isfinite(im)) continue;
    if (im > opts.im_tol * (Scalar(1) + std::abs(re))) continue;
    if (!(re > Scalar(0))) continue;
    EigenPair<Scalar> pair;
    pair.lambda = re;
    pair.imag_part = im;
    pair.dofs = rp.vec.real();
    if (!pair.dofs.allFinite() || pair.dofs.cwiseAbs().maxCoeff() == Scalar(0)) continue;
    pair.residual = eigenpair_residual(sys, pair.dofs, pair.lambda);
    if (!(pair.residual <= opts.res_tol)) continue;
    const Scalar nrm2 = b_norm_squared(sys, pair.dofs);
    if (!(nrm2 > Scalar(0))) continue;
    pair.dofs /= std::sqrt(nrm2);
    apply_sign_convention(pair.dofs);
    kept.push_back(std::move(pair));
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  if (opts.target_sigma && static_cast<int>(kept.size()) > opts.k) {
    const Scalar sigma = *opts.target_sigma;
    std::sort(kept.begin(), kept.end(), [sigma](const auto& a, const auto& b) {
      return std::abs(a.lambda - sigma) < std::abs(b.lambda - sigma);
    });
    kept.resize(static_cast<size_t>(opts.k));
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  }
  if (static_cast<int>(kept.size()) > opts.k) kept.resize(static_cast<size_t>(opts.k));
  return kept;
}

/// Dense full-spectrum solve of A x = lambda B x.
///
/// The pencil is preconditioned by congruence with the Cholesky factor of the
/// block-diagonal P and assembled in that scaling directly from the element
/// factors, in 80-bit extended precision. Forming the raw normal-equation
/// matrices first and scaling after loses the eigenvalues: their entries grow
/// like W^8 and at W = 12 a double-formed pencil carries relative eigenvalue
/// noise near 1e-5, swamping the discretization error. Uses the
/// symmetric-definite reduction when the scaled B is symmetric positive
/// definite, a QZ solve otherwise.
template <typename Scalar>
std::vector<EigenPair<Scalar>> solve_gevp(const AssembledSystem<Scalar>& sys,
                                          const SolveOptions<Scalar>& opts) {
  using Work = long double;
  const int n = static_cast<int>(sys.a.rows());
  if (sys.b.rows() != n || sys.b.cols() != n || sys.a.cols() != n) {
    throw SizeError("solve_gevp: A and B must be square of equal size");
  }
  if (opts.k < 0 || opts.k > n) {
    throw SizeError("solve_gevp: k must lie in [0, n]");
  }
  if (opts.k == 0) return {};

  const int np = sys.mesh.order + 1;
  const int n_elems = sys.mesh.element_count();

  // per-block Cholesky factor of P (identical reference-H2 Gram blocks)
  const MatrixX<Work> gram_block =
      sys.p.topLeftCorner(np, np).template cast<Work>();
  Eigen::LLT<MatrixX<Work>> block_llt(gram_block);
  const MatrixX<Work> lb = block_llt.matrixL();
  const auto lower = [&]() { return lb.template triangularView<Eigen::Lower>(); };

  // scaled factors: columns of each element factor are divided by L^T on the
  // right, i.e. G_l = E_l L^{-T}
  const auto scale_factor = [&](const MatrixX<Scalar>& m) {
    const MatrixX<Work> mt = m.transpose().template cast<Work>();
    return MatrixX<Work>(lower().solve(mt).transpose());
  };

  MatrixX<Work> a_tilde = MatrixX<Work>::Zero(n, n);
  MatrixX<Work> b_tilde = MatrixX<Work>::Zero(n, n);
  for (const auto& op : sys.elements) {
    const int at = op.index * np;
    const MatrixX<Work> g = scale_factor(op.e);
    a_tilde.block(at, at, np, np) += symmetrized(g.transpose() * g);
    if (sys.variant == BVariant::lsq_weighted && !sys.symmetrized_b) {
      const MatrixX<Work> r = scale_factor(op.weighted_values);
      b_tilde.block(at, at, np, np) += g.transpose() * r;
    }
  }
  if (sys.variant != BVariant::lsq_weighted || sys.symmetrized_b) {
    // mass-type (or symmetrized) B has modestly sized entries; transform the
    // assembled blocks directly
    for (int l = 0; l < n_elems; ++l) {
      const int at = l * np;
      const MatrixX<Work> blk = sys.b.block(at, at, np, np).template cast<Work>();
      const MatrixX<Work> half = lower().solve(blk);
      const MatrixX<Work> half_t = half.transpose();
      b_tilde.block(at, at, np, np) = lower().solve(half_t).transpose();
    }
  }
  for (const auto& row : sys.rows) {
    VectorX<Work> dense = VectorX<Work>::Zero(n);
    for (const auto& [i, c] : row.coeffs) dense(i) += Work(c);
    VectorX<Work> scaled(n);
    for (int l = 0; l < n_elems; ++l) {
      scaled.segment(l * np, np) = lower().solve(dense.segment(l * np, np));
    }
    a_tilde += scaled * scaled.transpose();
  }

  const Work bscale = b_tilde.cwiseAbs().maxCoeff();
  const bool b_symmetric =
      (b_tilde - b_tilde.transpose()).cwiseAbs().maxCoeff() <= Work(1e-17) * bscale;

  bool use_sym = false;
  if (opts.path != SolverPath::general && b_symmetric) {
    Eigen::LLT<MatrixX<Work>> llt(b_tilde);
    if (llt.info() == Eigen::Success) {
      use_sym = true;
    } else if (opts.path == SolverPath::sym_definite) {
      throw SolverPathError(
          "solve_gevp: B is singular or indefinite to working precision; use the general path");
    }
  } else if (opts.path == SolverPath::sym_definite) {
    throw SolverPathError("solve_gevp: B is not symmetric; use the general path");
  }

  std::vector<RawEigenPair<Scalar>> raw;
  raw.reserve(static_cast<size_t>(n));
  const auto unscale = [&](VectorX<Work> y) {
    for (int l = 0; l < n_elems; ++l) {
      y.segment(l * np, np) = lb.transpose()
                                  .template triangularView<Eigen::Upper>()
                                  .solve(y.segment(l * np, np))
                                  .eval();
    }
    return y;
  };
  const auto emit = [&](std::complex<Work> lambda, VectorX<Work> re, VectorX<Work> im) {
    const bool near_real = std::isfinite(lambda.real()) && std::isfinite(lambda.imag()) &&
                           std::abs(lambda.imag()) <=
                               Work(opts.im_tol) * (Work(1) + std::abs(lambda.real()));
    if (opts.polish && near_real && re.allFinite() && re.norm() > Work(0)) {
      Work l = lambda.real();
      detail::polish_pair(a_tilde, b_tilde, re, l);
      lambda = std::complex<Work>(l, lambda.imag());
      im.setZero();
    }
    RawEigenPair<Scalar> rp;
    rp.lambda = std::complex<Scalar>(static_cast<Scalar>(lambda.real()),
                                     static_cast<Scalar>(lambda.imag()));
    const VectorX<Scalar> xre = unscale(re).template cast<Scalar>();
    const VectorX<Scalar> xim = unscale(im).template cast<Scalar>();
    rp.vec = xre.template cast<std::complex<Scalar>>() +
             std::complex<Scalar>(0, 1) * xim.template cast<std::complex<Scalar>>();
    raw.push_back(std::move(rp));
  };

  if (use_sym) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX<Work>> es(a_tilde, b_tilde);
    for (int j = 0; j < n; ++j) {
      emit(std::complex<Work>(es.eigenvalues()(j), Work(0)), es.eigenvectors().col(j),
           VectorX<Work>::Zero(n));
    }
  } else {
    Eigen::GeneralizedEigenSolver<MatrixX<Work>> ges;
    ges.setMaxIterations(100 * std::max(n, 40));
    ges.compute(a_tilde, b_tilde, true);
    if (ges.info() != Eigen::Success) {
      throw Error("solve_gevp: dense QZ iteration failed to converge");
    }
    for (int j = 0; j < n; ++j) {
      const std::complex<Work> lambda =
          ges.betas()(j) == Work(0)
              ? std::complex<Work>(std::numeric_limits<Work>::infinity(), Work(0))
              : ges.alphas()(j) / ges.betas()(j);
      emit(lambda, ges.eigenvectors().col(j).real(), ges.eigenvectors().col(j).imag());
    }
  }
  return filter_spurious(raw, sys, opts);
}

/// Extreme values of x^T A x / x^T P x: the empirical constants of the
/// norm-equivalence between the least-squares quadratic form and the broken
/// reference-H2 norm. Their ratio estimates the condition number of the
/// preconditioned form.
template <typename Scalar>
std::pair<Scalar, Scalar> quadratic_form_bounds(const AssembledSystem<Scalar>& sys) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX<Scalar>> es(sys.a, sys.p,
                                                               Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace sturm
