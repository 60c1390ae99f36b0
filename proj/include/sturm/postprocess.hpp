// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sturm/csv.hpp"
#include "sturm/eigensolve.hpp"
#include "sturm/oracle.hpp"

namespace sturm {

/// Spectral element function whose value traces agree at every shared
/// breakpoint (Dirichlet endpoints exactly zero, periodic endpoint values
/// equal), so its physical-space image lies in H1.
template <typename Scalar = double>
struct ConformingFunction {
  Mesh<Scalar> mesh;
  VectorX<Scalar> dofs;
};

/// Per-element linear correction moving every trace to its target: the mean
/// of the two adjacent traces at interior breakpoints (split by the value-jump
/// target across the interface), zero at Dirichlet endpoints, the shared mean
/// at periodic endpoints, unchanged at Neumann endpoints. Endpoint nodal
/// values are set to the targets directly, so matched traces are bit-equal.
template <typename Scalar>
ConformingFunction<Scalar> conforming_correction(
    const VectorX<Scalar>& dofs, const Mesh<Scalar>& mesh, BoundaryKind bc,
    const std::optional<InterfaceSpec<Scalar>>& interface = std::nullopt) {
  const int w = mesh.order;
  const int np = w + 1;
  const int n_elems = mesh.element_count();
  const auto nodes = gll_rule<Scalar>(w).nodes;

  // left/right trace targets per element
  std::vector<Scalar> target_left(n_elems), target_right(n_elems);
  for (int l = 0; l < n_elems; ++l) {
    target_left[l] = dofs(l * np);
    target_right[l] = dofs(l * np + w);
  }
  for (int i = 0; i + 1 < n_elems; ++i) {
    const Scalar left_trace = dofs(i * np + w);
    const Scalar right_trace = dofs((i + 1) * np);
    const Scalar mean = (left_trace + right_trace) / Scalar(2);
    Scalar jump = Scalar(0);
    if (interface && mesh.interface_breakpoint == i + 1) jump = interface->jump_value;
    target_right[i] = mean + jump / Scalar(2);
    target_left[i + 1] = mean - jump / Scalar(2);
  }
  switch (bc) {
    case BoundaryKind::dirichlet:
      target_left[0] = Scalar(0);
      target_right[n_elems - 1] = Scalar(0);
      break;
    case BoundaryKind::neumann:
      break;  // endpoint traces stay put
    case BoundaryKind::periodic: {
      const Scalar mean = (dofs(0) + dofs((n_elems - 1) * np + w)) / Scalar(2);
      target_left[0] = mean;
      target_right[n_elems - 1] = mean;
      break;
    }
  }

  ConformingFunction<Scalar> out;
  out.mesh = mesh;
  out.dofs = dofs;
  for (int l = 0; l < n_elems; ++l) {
    const Scalar dl = target_left[l] - dofs(l * np);
    const Scalar dr = target_right[l] - dofs(l * np + w);
    out.dofs(l * np) = target_left[l];
    out.dofs(l * np + w) = target_right[l];
    for (int j = 1; j < w; ++j) {
      out.dofs(l * np + j) +=
          dl * (Scalar(1) - nodes(j)) / Scalar(2) + dr * (Scalar(1) + nodes(j)) / Scalar(2);
    }
  }
  return out;
}

template <typename Scalar>
ConformingFunction<Scalar> conforming_correction(
    const EigenPair<Scalar>& pair, const Mesh<Scalar>& mesh, BoundaryKind bc,
    const std::optional<InterfaceSpec<Scalar>>& interface = std::nullopt) {
  return conforming_correction(pair.dofs, mesh, bc, interface);
}

/// Squared r-weighted L2 norm of a nodal DOF vector, by a rule exact for the
/// polynomial part.
template <typename Scalar>
Scalar b_norm_squared(const VectorX<Scalar>& dofs, const Mesh<Scalar>& mesh,
                      const PiecewiseCoefficient<Scalar>& r) {
  const int w = mesh.order;
  const int np = w + 1;
  const auto nodal = gll_rule<Scalar>(w);
  const auto quad = gauss_rule<Scalar>(2 * w + 2);
  const MatrixX<Scalar> v = lagrange_eval_matrix(nodal.nodes, quad.nodes);
  Scalar acc = Scalar(0);
  for (int l = 0; l < mesh.element_count(); ++l) {
    const auto em = element_map(mesh, l);
    const int piece = r.piece_for_interval(em.left, em.right);
    const VectorX<Scalar> uq = v * dofs.segment(l * np, np);
    Scalar elem = Scalar(0);
    for (int k = 0; k < quad.point_count(); ++k) {
      elem += quad.weights(k) * r.eval_piece(piece, em(quad.nodes(k))) * uq(k) * uq(k);
    }
    acc += em.jacobian * elem;
  }
  return acc;
}

/// Scale to unit r-weighted L2 norm, then flip so the first significant nodal
/// value scanning left to right is positive. Idempotent.
template <typename Scalar>
void normalize_dofs(VectorX<Scalar>& dofs, const Mesh<Scalar>& mesh,
                    const PiecewiseCoefficient<Scalar>& r) {
  const Scalar nrm2 = b_norm_squared(dofs, mesh, r);
  if (!(nrm2 > Scalar(0))) throw NormalizationError("normalize: zero function");
  dofs /= std::sqrt(nrm2);
  apply_sign_convention(dofs);
}

template <typename Scalar>
ConformingFunction<Scalar> normalize(ConformingFunction<Scalar> u,
                                     const CoefficientSet<Scalar>& coeffs) {
  normalize_dofs(u.dofs, u.mesh, coeffs.r);
  return u;
}

template <typename Scalar>
EigenPair<Scalar> normalize(EigenPair<Scalar> pair, const Mesh<Scalar>& mesh,
                            const CoefficientSet<Scalar>& coeffs) {
  normalize_dofs(pair.dofs, mesh, coeffs.r);
  return pair;
}

/// Broken H1 distance between the numerical function and an evaluable
/// reference with derivative, by per-element Gauss quadrature with W+8
/// points; the reference sign is aligned to minimize the error over +-u_ref.
template <typename Scalar>
Scalar h1_error(const ConformingFunction<Scalar>& u_num,
                const std::function<Scalar(Scalar)>& u_ref,
                const std::function<Scalar(Scalar)>& du_ref) {
  const Mesh<Scalar>& mesh = u_num.mesh;
  const int w = mesh.order;
  const int np = w + 1;
  const auto nodal = gll_rule<Scalar>(w);
  const auto quad = gauss_rule<Scalar>(w + 8);
  const MatrixX<Scalar> v = lagrange_eval_matrix(nodal.nodes, quad.nodes);
  const MatrixX<Scalar> vd = v * differentiation_matrix(nodal.nodes);
  Scalar same = Scalar(0), flipped = Scalar(0);
  for (int l = 0; l < mesh.element_count(); ++l) {
    const auto em = element_map(mesh, l);
    const VectorX<Scalar> uq = v * u_num.dofs.segment(l * np, np);
    const VectorX<Scalar> duq =
        (Scalar(2) / em.h) * (vd * u_num.dofs.segment(l * np, np));
    for (int k = 0; k < quad.point_count(); ++k) {
      const Scalar x = em(quad.nodes(k));
      const Scalar ur = u_ref(x);
      const Scalar dur = du_ref(x);
      const Scalar wj = quad.weights(k) * em.jacobian;
      same += wj * ((uq(k) - ur) * (uq(k) - ur) + (duq(k) - dur) * (duq(k) - dur));
      flipped += wj * ((uq(k) + ur) * (uq(k) + ur) + (duq(k) + dur) * (duq(k) + dur));
    }
  }
  return std::sqrt(std::min(same, flipped));
}

/// Reference solution for the study driver: an eigenvalue, optionally with an
/// evaluable eigenfunction (absent when the reference came from a file).
template <typename Scalar = double>
struct ReferenceSolution {
  Scalar lambda = Scalar(0);
  std::function<Scalar(Scalar)> u;   // may be empty
  std::function<Scalar(Scalar)> du;  // may be empty
};

template <typename Scalar>
std::vector<ReferenceSolution<Scalar>> to_reference(
    const std::vector<ReferenceEigenpair<Scalar>>& pairs) {
  std::vector<ReferenceSolution<Scalar>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.lambda, p.u, p.du});
  return out;
}

/// One-to-one greedy matching: ascending over the reference values, each picks
/// the nearest unmatched computed value. Returns the computed index per
/// reference slot, -1 when the computed list ran out.
template <typename Scalar>
std::vector<int> match_by_eigenvalue(const std::vector<Scalar>& computed,
                                     const std::vector<Scalar>& reference) {
  std::vector<int> assignment(reference.size(), -1);
  std::vector<bool> used(computed.size(), false);
  for (size_t i = 0; i < reference.size(); ++i) {
    int best = -1;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (size_t j = 0; j < computed.size(); ++j) {
      if (used[j]) continue;
      const Scalar dist = std::abs(computed[j] - reference[i]);
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      used[static_cast<size_t>(best)] = true;
      assignment[i] = best;
    }
  }
  return assignment;
}

template <typename Scalar = double>
struct StudyRow {
  int order = 0;  // W
  int dof = 0;
  int mode = 0;  // 1-based
  Scalar lambda_num = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar lambda_ref = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar lambda_abs_err = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar h1_err = std::numeric_limits<Scalar>::quiet_NaN();
  bool matched = false;
  bool has_h1 = false;
};

template <typename Scalar = double>
struct SlopeFit {
  int mode = 0;  // 1-based
  Scalar slope = std::numeric_limits<Scalar>::quiet_NaN();
  int window_lo = 0;
  int window_hi = 0;
  bool defined = false;
};

template <typename Scalar = double>
struct ConvergenceReport {
  std::vector<int> orders;
  std::vector<StudyRow<Scalar>> rows;
  std::vector<SlopeFit<Scalar>> slopes;
};

template <typename Scalar = double>
struct StudyOptions {
  int k = 6;
  std::optional<BVariant> variant;
  SolveOptions<Scalar> solve;
  /// Points with H1 error below this floor are treated as saturated and
  /// excluded from the slope fit.
  Scalar saturation_floor = Scalar(1e-11);
};

/// Least-squares fit of log10(err) against W over the pre-saturation window.
template <typename Scalar>
SlopeFit<Scalar> fit_slope(int mode, const std::vector<int>& orders,
                           const std::vector<Scalar>& errors, Scalar floor) {
  SlopeFit<Scalar> fit;
  fit.mode = mode;
  std::vector<Scalar> xs, ys;
  for (size_t i = 0; i < orders.size(); ++i) {
    if (std::isfinite(errors[i]) && errors[i] > floor) {
      xs.push_back(Scalar(orders[i]));
      ys.push_back(std::log10(errors[i]));
    }
  }
  if (xs.size() < 2) return fit;
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const Scalar nn = Scalar(xs.size());
  fit.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  fit.window_lo = static_cast<int>(xs.front());
  fit.window_hi = static_cast<int>(xs.back());
  fit.defined = true;
  return fit;
}

/// For each order in w_list: assemble, solve, filter, correct, normalize,
/// match against the reference by nearest eigenvalue, and record eigenvalue
/// and H1 errors; then fit per-mode slopes over the pre-saturation window.
/// Fewer surviving pairs than k is reported as missing rows, not an error.
template <typename Scalar>
ConvergenceReport<Scalar> convergence_study(const ProblemSpec<Scalar>& problem,
                                            const std::vector<Scalar>& breakpoints,
                                            const std::vector<int>& w_list,
                                            const std::vector<ReferenceSolution<Scalar>>& reference,
                                            const StudyOptions<Scalar>& options) {
  if (w_list.size() < 2) {
    throw SizeError("convergence_study: need at least two polynomial orders");
  }
  for (size_t i = 0; i < w_list.size(); ++i) {
    if (w_list[i] < 3 || (i > 0 && w_list[i] <= w_list[i - 1])) {
      throw SizeError("convergence_study: orders must be ascending and >= 3");
    }
  }
  if (static_cast<int>(reference.size()) < options.k) {
    throw SizeError("convergence_study: reference provides fewer modes than requested");
  }

  ConvergenceReport<Scalar> report;
  report.orders = w_list;
  for (const int w : w_list) {
    const auto mesh = build_mesh(problem, breakpoints, w);
    const auto sys = assemble_system(mesh, problem, options.variant);
    SolveOptions<Scalar> sopts = options.solve;
    sopts.k = std::max(options.k, sopts.k);
    const auto pairs = solve_gevp(sys, sopts);

    std::vector<Scalar> computed;
    computed.reserve(pairs.size());
    for (const auto& p : pairs) computed.push_back(p.lambda);
    std::vector<Scalar> wanted;
    for (int i = 0; i < options.k; ++i) wanted.push_back(reference[i].lambda);
    const auto assignment = match_by_eigenvalue(computed, wanted);

    for (int i = 0; i < options.k; ++i) {
      StudyRow<Scalar> row;
      row.order = w;
      row.dof = mesh.dof_count();
      row.mode = i + 1;
      row.lambda_ref = reference[i].lambda;
      if (assignment[i] >= 0) {
        const auto& pair = pairs[assignment[i]];
        row.matched = true;
        row.lambda_num = pair.lambda;
        row.lambda_abs_err = std::abs(pair.lambda - row.lambda_ref);
        if (reference[i].u && reference[i].du) {
          auto corrected =
              conforming_correction(pair, mesh, problem.bc, problem.interface);
          corrected = normalize(std::move(corrected), problem.coefficients);
          row.h1_err = h1_error(corrected, reference[i].u, reference[i].du);
          row.has_h1 = true;
        }
      }
      report.rows.push_back(row);
    }
  }

  for (int i = 0; i < options.k; ++i) {
    std::vector<Scalar> errors;
    for (const int w : w_list) {
      Scalar err = std::numeric_limits<Scalar>::quiet_NaN();
      for (const auto& row : report.rows) {
        if (row.order == w && row.mode == i + 1 && row.has_h1) err = row.h1_err;
      }
      errors.push_back(err);
    }
    report.slopes.push_back(fit_slope(i + 1, w_list, errors, options.saturation_floor));
  }
  return report;
}

/// Errors CSV: W, dof, i, lambda_num, lambda_ref, lambda_abs_err, h1_err.
/// Unmatched or unavailable entries are empty cells.
template <typename Scalar>
void write_errors_csv(const ConvergenceReport<Scalar>& report, const std::string& path) {
  CsvWriter out(path, "W,dof,i,lambda_num,lambda_ref,lambda_abs_err,h1_err");
  for (const auto& row : report.rows) {
    std::string line = std::to_string(row.order) + "," + std::to_string(row.dof) + "," +
                       std::to_string(row.mode) + ",";
    if (row.matched) line += format_significant(static_cast<double>(row.lambda_num));
    line += "," + std::string(format_significant(static_cast<double>(row.lambda_ref))) + ",";
    if (row.matched) line += format_significant(static_cast<double>(row.lambda_abs_err));
    line += ",";
    if (row.has_h1) line += format_significant(static_cast<double>(row.h1_err));
    out.row(line);
  }
}

/// Slopes CSV: i, slope, window_lo, window_hi; cells empty when undefined.
template <typename Scalar>
void write_slopes_csv(const ConvergenceReport<Scalar>& report, const std::string& path) {
  CsvWriter out(path, "i,slope,window_lo,window_hi");
  for (const auto& fit : report.slopes) {
    std::string line = std::to_string(fit.mode) + ",";
    if (fit.defined) {
      line += std::string(format_significant(static_cast<double>(fit.slope))) + "," +
              std::to_string(fit.window_lo) + "," + std::to_string(fit.window_hi);
    } else {
      line += ",,";
    }
    out.row(line);
  }
}

}  // namespace sturm
