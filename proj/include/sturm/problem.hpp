// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sturm/errors.hpp"

namespace sturm {

/// Piecewise scalar coefficient: smooth pieces separated by interior
/// breakpoints. Piece j covers (z_{j-1}, z_j); evaluation at a breakpoint uses
/// the right piece unless a one-sided limit is requested. Piecewise-constant
/// coefficients keep their values so closed-form oracles can use them.
template <typename Scalar = double>
class PiecewiseCoefficient {
 public:
  using Fn = std::function<Scalar(Scalar)>;

  /// Defaults to the constant 1.
  PiecewiseCoefficient()
      : pieces_{[](Scalar) { return Scalar(1); }}, constants_(std::vector<Scalar>{Scalar(1)}) {}

  static PiecewiseCoefficient constant(Scalar c) {
    PiecewiseCoefficient out;
    out.pieces_ = {[c](Scalar) { return c; }};
    out.breakpoints_.clear();
    out.constants_ = std::vector<Scalar>{c};
    return out;
  }

  static PiecewiseCoefficient piecewise_constant(std::vector<Scalar> breakpoints,
                                                 std::vector<Scalar> values) {
    if (values.size() != breakpoints.size() + 1) {
      throw InvalidCoefficientError("piecewise_constant: need one more value than breakpoints");
    }
    for (size_t i = 1; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i] > breakpoints[i - 1])) {
        throw InvalidCoefficientError(
            "piecewise_constant: breakpoints must be strictly increasing");
      }
    }
    PiecewiseCoefficient out;
    out.breakpoints_ = std::move(breakpoints);
    out.pieces_.clear();
    for (const Scalar v : values) out.pieces_.push_back([v](Scalar) { return v; });
    out.constants_ = std::move(values);
    return out;
  }

  static PiecewiseCoefficient from_function(Fn f) {
    PiecewiseCoefficient out;
    out.pieces_ = {std::move(f)};
    out.breakpoints_.clear();
    out.constants_.reset();
    return out;
  }

  static PiecewiseCoefficient piecewise(std::vector<Scalar> breakpoints, std::vector<Fn> pieces) {
    if (pieces.size() != breakpoints.size() + 1) {
      throw InvalidCoefficientError("piecewise: need one more piece than breakpoints");
    }
    PiecewiseCoefficient out;
    out.breakpoints_ = std::move(breakpoints);
    out.pieces_ = std::move(pieces);
    out.constants_.reset();
    return out;
  }

  int piece_count() const { return static_cast<int>(pieces_.size()); }
  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }

  bool is_piecewise_constant() const { return constants_.has_value(); }
  const std::vector<Scalar>& constant_values() const {
    if (!constants_) throw InvalidCoefficientError("coefficient is not piecewise constant");
    return *constants_;
  }

  /// Piece containing x; at a breakpoint, the right piece.
  int piece_at(Scalar x) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<int>(it - breakpoints_.begin());
  }

  /// Piece containing the open interval (lo, hi); selected by midpoint.
  int piece_for_interval(Scalar lo, Scalar hi) const { return piece_at((lo + hi) / Scalar(2)); }

  Scalar eval_piece(int piece, Scalar x) const { return pieces_[piece](x); }

  Scalar operator()(Scalar x) const { return pieces_[piece_at(x)](x); }

  /// One-sided limit at x: side < 0 from the left, side > 0 from the right.
  Scalar eval_one_sided(Scalar x, int side) const {
    if (side < 0) {
      const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
      return pieces_[it - breakpoints_.begin()](x);
    }
    return (*this)(x);
  }

 private:
  std::vector<Scalar> breakpoints_;
  std::vector<Fn> pieces_;
  std::optional<std::vector<Scalar>> constants_;
};

template <typename Scalar = double>
struct CoefficientSet {
  PiecewiseCoefficient<Scalar> p;
  PiecewiseCoefficient<Scalar> q;
  PiecewiseCoefficient<Scalar> r;
};

enum class BoundaryKind { dirichlet, neumann, periodic };

inline std::string to_string(BoundaryKind bc) {
  switch (bc) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::neumann: return "neumann";
    case BoundaryKind::periodic: return "periodic";
  }
  return "?";
}

/// Interface at zeta with jump targets for the value and the p-weighted flux
/// (left trace minus right trace). The homogeneous case is the standard one;
/// nonzero targets are an extension and default to 0.
template <typename Scalar = double>
struct InterfaceSpec {
  Scalar zeta = Scalar(0);
  Scalar jump_value = Scalar(0);
  Scalar jump_flux = Scalar(0);
};

/// The continuous problem -(p u')' + q u = lambda r u on (a, b).
template <typename Scalar = double>
struct ProblemSpec {
  Scalar a = Scalar(0);
  Scalar b = Scalar(1);
  CoefficientSet<Scalar> coefficients;
  BoundaryKind bc = BoundaryKind::dirichlet;
  std::optional<InterfaceSpec<Scalar>> interface;
};

/// Affine map from the reference interval (-1, 1) onto one element.
template <typename Scalar = double>
struct ElementMap {
  int index = 0;
  Scalar left = Scalar(-1);
  Scalar right = Scalar(1);
  Scalar h = Scalar(2);
  Scalar jacobian = Scalar(1);  // h / 2, constant

  Scalar operator()(Scalar xi) const {
    return left * ((Scalar(1) - xi) / Scalar(2)) + right * ((Scalar(1) + xi) / Scalar(2));
  }
  Scalar inverse(Scalar x) const { return (Scalar(2) * x - left - right) / h; }
};

/// Partition of [a, b] into spectral elements of uniform polynomial order.
/// When an interface exists, zeta is one of the breakpoints bit-exactly and
/// elements left/right of it carry subdomain ids 1/2.
template <typename Scalar = double>
struct Mesh {
  std::vector<Scalar> breakpoints;  // size L+1, strictly increasing
  int order = 3;                    // W, uniform over elements
  int interface_breakpoint = -1;    // index i with breakpoints[i] == zeta, or -1

  int element_count() const { return static_cast<int>(breakpoints.size()) - 1; }
  Scalar left(int l) const { return breakpoints[l]; }
  Scalar right(int l) const { return breakpoints[l + 1]; }
  Scalar h(int l) const { return breakpoints[l + 1] - breakpoints[l]; }
  Scalar global_h() const {
    Scalar m = Scalar(0);
    for (int l = 0; l < element_count(); ++l) m = std::max(m, h(l));
    return m;
  }
  bool has_interface() const { return interface_breakpoint >= 0; }
  /// 1 left of the interface, 2 right of it (1 everywhere without interface).
  int subdomain(int l) const {
    return (interface_breakpoint < 0 || l < interface_breakpoint) ? 1 : 2;
  }
  int dof_count() const { return element_count() * (order + 1); }
};

template <typename Scalar>
ElementMap<Scalar> element_map(const Mesh<Scalar>& mesh, int l) {
  if (l < 0 || l >= mesh.element_count()) {
    throw MeshError("element_map: element index " + std::to_string(l) + " out of range");
  }
  ElementMap<Scalar> em;
  em.index = l;
  em.left = mesh.left(l);
  em.right = mesh.right(l);
  em.h = mesh.h(l);
  em.jacobian = em.h / Scalar(2);
  return em;
}

namespace detail {

template <typename Scalar>
void check_order(int order) {
  if (order < 3) throw MeshError("build_mesh: polynomial order must be >= 3");
}

template <typename Scalar>
void check_interface_location(const ProblemSpec<Scalar>& spec) {
  if (!spec.interface) return;
  const Scalar z = spec.interface->zeta;
  if (!(spec.a < z && z < spec.b)) {
    throw MeshError("build_mesh: interface location must lie strictly inside (a, b)");
  }
}

template <typename Scalar>
std::vector<Scalar> uniform_points(Scalar lo, Scalar hi, int n) {
  std::vector<Scalar> pts(n + 1);
  pts[0] = lo;
  pts[n] = hi;
  for (int i = 1; i < n; ++i) pts[i] = lo + (hi - lo) * Scalar(i) / Scalar(n);
  return pts;
}

}  // namespace detail

/// Mesh with per-subdomain element counts (interface problems).
template <typename Scalar>
Mesh<Scalar> build_mesh(const ProblemSpec<Scalar>& spec, int n1, int n2, int order) {
  detail::check_order<Scalar>(order);
  detail::check_interface_location(spec);
  if (!spec.interface) throw MeshError("build_mesh: per-subdomain counts need an interface");
  if (n1 < 1 || n2 < 1) throw MeshError("build_mesh: need at least one element per subdomain");
  const Scalar z = spec.interface->zeta;
  Mesh<Scalar> mesh;
  mesh.order = order;
  mesh.breakpoints = detail::uniform_points(spec.a, z, n1);
  const auto rightpts = detail::uniform_points(z, spec.b, n2);
  mesh.breakpoints.insert(mesh.breakpoints.end(), rightpts.begin() + 1, rightpts.end());
  mesh.interface_breakpoint = n1;
  return mesh;
}

/// Uniform mesh with n elements. For interface problems n must split the
/// subdomains so that zeta lands on a breakpoint.
template <typename Scalar>
Mesh<Scalar> build_mesh(const ProblemSpec<Scalar>& spec, int n_elements, int order) {
  detail::check_order<Scalar>(order);
  detail::check_interface_location(spec);
  if (n_elements < 1) throw MeshError("build_mesh: need at least one element");
  if (spec.interface) {
    const Scalar z = spec.interface->zeta;
    const Scalar ratio = (z - spec.a) / (spec.b - spec.a) * Scalar(n_elements);
    const int n1 = static_cast<int>(std::lround(static_cast<double>(ratio)));
    if (n1 < 1 || n1 >= n_elements ||
        std::abs(ratio - Scalar(n1)) > Scalar(1e-9) * Scalar(n_elements)) {
      throw MeshError(
          "build_mesh: uniform element count does not place the interface on a breakpoint; "
          "use per-subdomain counts (N1, N2)");
    }
    return build_mesh(spec, n1, n_elements - n1, order);
  }
  Mesh<Scalar> mesh;
  mesh.order = order;
  mesh.breakpoints = detail::uniform_points(spec.a, spec.b, n_elements);
  return mesh;
}

/// Mesh from explicit breakpoints; zeta is inserted when missing.
template <typename Scalar>
Mesh<Scalar> build_mesh(const ProblemSpec<Scalar>& spec, std::vector<Scalar> breakpoints,
                        int order) {
  detail::check_order<Scalar>(order);
  detail::check_interface_location(spec);
  if (breakpoints.size() < 2) throw MeshError("build_mesh: need at least two breakpoints");
  for (size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw MeshError("build_mesh: breakpoints must be strictly increasing");
    }
  }
  if (breakpoints.front() != spec.a || breakpoints.back() != spec.b) {
    throw MeshError("build_mesh: breakpoints must start at a and end at b");
  }
  Mesh<Scalar> mesh;
  mesh.order = order;
  mesh.breakpoints = std::move(breakpoints);
  if (spec.interface) {
    const Scalar z = spec.interface->zeta;
    auto it = std::lower_bound(mesh.breakpoints.begin(), mesh.breakpoints.end(), z);
    if (it == mesh.breakpoints.end() || *it != z) {
      it = mesh.breakpoints.insert(it, z);
    }
    mesh.interface_breakpoint = static_cast<int>(it - mesh.breakpoints.begin());
  }
  return mesh;
}

template <typename Scalar = double>
struct Violation {
  std::string coefficient;
  Scalar location = Scalar(0);
  Scalar value = Scalar(0);
  std::string what;
};

template <typename Scalar = double>
struct ValidationReport {
  std::vector<Violation<Scalar>> violations;
  int samples_per_piece = 0;
  bool ok() const { return violations.empty(); }
};

/// Sample-based validation of the coefficient assumptions: p > 0, r > 0,
/// q >= 0, and p(a) = p(b) for periodic problems. The paper's experiments use
/// q = 0, so exactly zero q is accepted and only strictly negative q is
/// flagged.
template <typename Scalar>
ValidationReport<Scalar> validate_report(const ProblemSpec<Scalar>& spec, int n_samples = 1000) {
  ValidationReport<Scalar> report;
  report.samples_per_piece = n_samples;
  if (spec.interface) {
    if (spec.bc != BoundaryKind::dirichlet) {
      report.violations.push_back({"bc", spec.interface->zeta, Scalar(0),
                                   "interface problems require Dirichlet boundary conditions"});
    }
    if (!(spec.a < spec.interface->zeta && spec.interface->zeta < spec.b)) {
      report.violations.push_back({"interface", spec.interface->zeta, Scalar(0),
                                   "interface location must lie strictly inside (a, b)"});
    }
  }
  if (!(spec.a < spec.b)) {
    report.violations.push_back({"interval", spec.a, Scalar(0), "interval must satisfy a < b"});
    return report;
  }

  const auto scan = [&](const PiecewiseCoefficient<Scalar>& c, const std::string& name,
                        bool allow_zero) {
    std::vector<Scalar> cuts{spec.a};
    for (const Scalar z : c.breakpoints()) {
      if (z > spec.a && z < spec.b) cuts.push_back(z);
    }
    cuts.push_back(spec.b);
    for (size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      const Scalar lo = cuts[piece], hi = cuts[piece + 1];
      const int idx = c.piece_for_interval(lo, hi);
      for (int j = 0; j < n_samples; ++j) {
        const Scalar x = lo + (hi - lo) * (Scalar(j) + Scalar(0.5)) / Scalar(n_samples);
        const Scalar v = c.eval_piece(idx, x);
        const bool bad = allow_zero ? (v < Scalar(0)) : !(v > Scalar(0));
        if (bad || !std::isfinite(v)) {
          report.violations.push_back({name, x, v, "positivity violated"});
          return;  // one finding per coefficient is enough for a report
        }
      }
    }
  };
  scan(spec.coefficients.p, "p", false);
  scan(spec.coefficients.q, "q", true);
  scan(spec.coefficients.r, "r", false);

  if (spec.bc == BoundaryKind::periodic) {
    const Scalar pa = spec.coefficients.p.eval_one_sided(spec.a, +1);
    const Scalar pb = spec.coefficients.p.eval_one_sided(spec.b, -1);
    if (std::abs(pa - pb) > Scalar(1e-12) * std::max(std::abs(pa), Scalar(1))) {
      report.violations.push_back({"p", spec.b, pb - pa, "periodic problems require p(a) = p(b)"});
    }
  }
  return report;
}

/// Throwing wrapper: raises InvalidProblemError naming the first offending
/// coefficient and location.
template <typename Scalar>
ValidationReport<Scalar> validate(const ProblemSpec<Scalar>& spec, int n_samples = 1000) {
  auto report = validate_report(spec, n_samples);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "invalid problem:";
    for (const auto& v : report.violations) {
      msg << " [" << v.coefficient << " at x=" << static_cast<double>(v.location) << ": " << v.what
          << " (value " << static_cast<double>(v.value) << ")]";
    }
    throw InvalidProblemError(msg.str());
  }
  return report;
}

}  // namespace sturm
