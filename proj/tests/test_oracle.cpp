// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sturm/oracle.hpp"
#include "test_support.hpp"

using namespace sturm;

namespace {

constexpr double kPi = 3.14159265358979323846;

ProblemSpec<double> interface_problem(double beta_left, double beta_right) {
  ProblemSpec<double> spec;
  spec.a = 0.0;
  spec.b = 1.0;
  const double zeta = 1.0 / 3.0;
  spec.coefficients.p =
      PiecewiseCoefficient<double>::piecewise_constant({zeta}, {beta_left, beta_right});
  spec.coefficients.q = PiecewiseCoefficient<double>::constant(0.0);
  spec.coefficients.r = PiecewiseCoefficient<double>::constant(1.0);
  spec.bc = BoundaryKind::dirichlet;
  spec.interface = InterfaceSpec<double>{zeta, 0.0, 0.0};
  return spec;
}

ProblemSpec<double> laplace_dirichlet() {
  ProblemSpec<double> spec;
  spec.a = 0.0;
  spec.b = 1.0;
  spec.coefficients.q = PiecewiseCoefficient<double>::constant(0.0);
  spec.bc = BoundaryKind::dirichlet;
  return spec;
}

// first six eigenvalues reported for the beta = (1, 4), zeta = 1/3 benchmark
const std::vector<double> kBenchmarkSpectrum = {22.2066099024,  88.8264396098, 199.8594891221,
                                                355.3057584392, 555.1652475613, 799.4379564882};

}  // namespace

TEST_CASE("dispersion: classical Dirichlet spectrum without interface") {
  const auto pairs = dispersion_eigenvalues(laplace_dirichlet(), 3);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].lambda == doctest::Approx(kPi * kPi).epsilon(1e-13));
  CHECK(pairs[1].lambda == doctest::Approx(4 * kPi * kPi).epsilon(1e-13));
  CHECK(pairs[2].lambda == doctest::Approx(9 * kPi * kPi).epsilon(1e-13));
  // eigenfunctions satisfy the boundary conditions and are L2-normalized
  for (const auto& p : pairs) {
    CHECK(std::abs(p.u(0.0)) < 1e-14);
    CHECK(std::abs(p.u(1.0)) < 1e-13);
  }
}

TEST_CASE("dispersion: interface benchmark reproduces the reference spectrum") {
  const auto pairs = dispersion_eigenvalues(interface_problem(1.0, 4.0), 6);
  REQUIRE(pairs.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(pairs[i].lambda - kBenchmarkSpectrum[i]) <=
          1e-10 * kBenchmarkSpectrum[i]);
  }
}

TEST_CASE("dispersion: beta_right = 1/4 does not reproduce the reference spectrum") {
  // resolves the benchmark's ambiguous coefficient statement empirically:
  // only beta = (1, 4) matches, (1, 1/4) does not
  const auto pairs = dispersion_eigenvalues(interface_problem(1.0, 0.25), 6);
  REQUIRE(pairs.size() == 6);
  CHECK(std::abs(pairs[0].lambda - kBenchmarkSpectrum[0]) > 1e-3 * kBenchmarkSpectrum[0]);
}

TEST_CASE("dispersion: high-contrast interface problem") {
  const auto pairs = dispersion_eigenvalues(interface_problem(1.0, 1000.0), 6);
  REQUIRE(pairs.size() == 6);
  CHECK(std::abs(pairs[0].lambda - 88.4675122041) <= 1e-6 * 88.4675122041);
  CHECK(std::abs(pairs[1].lambda - 353.8098303336) <= 1e-5 * 353.8098303336);
}

TEST_CASE("dispersion: eigenfunctions satisfy ODE, interface and boundary conditions") {
  const auto spec = interface_problem(1.0, 4.0);
  const double zeta = spec.interface->zeta;
  const auto pairs = dispersion_eigenvalues(spec, 6);
  for (const auto& pair : pairs) {
    CHECK(std::abs(pair.u(0.0)) < 1e-12);
    CHECK(std::abs(pair.u(1.0)) < 1e-12);
    // value and flux jumps across the interface; tiny offset selects the
    // right piece without perturbing the trace beyond roundoff
    const double eps = 1e-15;
    const double u_left = pair.u(zeta), u_right = pair.u(zeta + eps);
    CHECK(std::abs(u_left - u_right) < 1e-10);
    const double flux_left = 1.0 * pair.du(zeta);
    const double flux_right = 4.0 * pair.du(zeta + eps);
    CHECK(std::abs(flux_left - flux_right) < 1e-10 * (1.0 + std::abs(flux_left)));
    // ODE residual -beta u'' = lambda u on 100 points per piece
    for (int j = 0; j < 100; ++j) {
      const double x1 = zeta * (j + 0.5) / 100.0;
      const double x2 = zeta + (1.0 - zeta) * (j + 0.5) / 100.0;
      CHECK(std::abs(-1.0 * pair.d2u(x1) - pair.lambda * pair.u(x1)) <
            1e-10 * (1.0 + pair.lambda));
      CHECK(std::abs(-4.0 * pair.d2u(x2) - pair.lambda * pair.u(x2)) <
            1e-10 * (1.0 + pair.lambda));
    }
    // normalized: integral of u^2 = 1 by midpoint-rule estimate
    double nrm = 0.0;
    const int m = 4000;
    for (int j = 0; j < m; ++j) {
      const double x = (j + 0.5) / m;
      nrm += pair.u(x) * pair.u(x) / m;
    }
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("dispersion: Neumann and periodic closed forms with constant shift") {
  ProblemSpec<double> spec = laplace_dirichlet();
  spec.coefficients.q = PiecewiseCoefficient<double>::constant(1.0);
  spec.bc = BoundaryKind::neumann;
  const auto nm = dispersion_eigenvalues(spec, 3);
  CHECK(nm[0].lambda == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(nm[1].lambda == doctest::Approx(kPi * kPi + 1.0).epsilon(1e-13));
  CHECK(nm[2].lambda == doctest::Approx(4 * kPi * kPi + 1.0).epsilon(1e-13));
  CHECK(std::abs(nm[1].du(0.0)) < 1e-13);
  CHECK(std::abs(nm[1].du(1.0)) < 1e-12);

  spec.bc = BoundaryKind::periodic;
  const auto pd = dispersion_eigenvalues(spec, 5);
  CHECK(pd[0].lambda == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pd[1].lambda == doctest::Approx(4 * kPi * kPi + 1.0).epsilon(1e-13));
  CHECK(pd[2].lambda == doctest::Approx(4 * kPi * kPi + 1.0).epsilon(1e-13));
  CHECK(pd[3].lambda == doctest::Approx(16 * kPi * kPi + 1.0).epsilon(1e-13));
  CHECK(pd[4].lambda == doctest::Approx(16 * kPi * kPi + 1.0).epsilon(1e-13));
}

TEST_CASE("fd: Dirichlet Laplacian converges at second order") {
  const auto spec = laplace_dirichlet();
  const auto l2000 = fd_eigenvalues(spec, 2000, 1);
  CHECK(std::abs(l2000[0] - kPi * kPi) <= 1e-5 * kPi * kPi);
  // observed order on n in {500, 1000, 2000}
  const auto l500 = fd_eigenvalues(spec, 500, 4);
  const auto l1000 = fd_eigenvalues(spec, 1000, 4);
  const auto l2000b = fd_eigenvalues(spec, 2000, 4);
  for (int i = 0; i < 4; ++i) {
    const double exact = (i + 1) * (i + 1) * kPi * kPi;
    const double e1 = std::abs(l500[i] - exact);
    const double e2 = std::abs(l1000[i] - exact);
    const double e3 = std::abs(l2000b[i] - exact);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    CHECK(order12 > 1.8);
    CHECK(order12 < 2.2);
    CHECK(order23 > 1.8);
    CHECK(order23 < 2.2);
  }
}

TEST_CASE("fd agrees with dispersion on the interface benchmark") {
  const auto spec = interface_problem(1.0, 4.0);
  const auto disp = dispersion_eigenvalues(spec, 4);
  const auto fd = fd_eigenvalues(spec, 3000, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(fd[i] - disp[i].lambda) <= 1e-5 * disp[i].lambda);
  }
  // observed order on an aligned doubling sequence
  const auto f750 = fd_eigenvalues(spec, 750, 4);
  const auto f1500 = fd_eigenvalues(spec, 1500, 4);
  const auto f3000 = fd_eigenvalues(spec, 3000, 4);
  for (int i = 0; i < 4; ++i) {
    const double exact = disp[i].lambda;
    const double order12 = std::log2(std::abs(f750[i] - exact) / std::abs(f1500[i] - exact));
    const double order23 = std::log2(std::abs(f1500[i] - exact) / std::abs(f3000[i] - exact));
    CHECK(order12 > 1.8);
    CHECK(order12 < 2.2);
    CHECK(order23 > 1.8);
    CHECK(order23 < 2.2);
  }
}

TEST_CASE("root count below a threshold matches the fd oracle") {
  const auto spec = interface_problem(1.0, 4.0);
  const auto disp = dispersion_eigenvalues(spec, 11);
  const double threshold = 0.5 * (disp[9].lambda + disp[10].lambda);
  int disp_count = 0;
  for (const auto& p : disp) {
    if (p.lambda < threshold) ++disp_count;
  }
  const auto fd = fd_eigenvalues(spec, 2400, 12);
  int fd_count = 0;
  for (const double l : fd) {
    if (l < threshold) ++fd_count;
  }
  CHECK(disp_count == 10);
  CHECK(fd_count == disp_count);
}

TEST_CASE("fd: constant q shift moves every eigenvalue by the shift") {
  auto spec = laplace_dirichlet();
  const auto base = fd_eigenvalues(spec, 600, 5);
  spec.coefficients.q = PiecewiseCoefficient<double>::constant(1.0);
  const auto shifted = fd_eigenvalues(spec, 600, 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(shifted[i] - base[i] - 1.0) < 1e-9);
  }
}

TEST_CASE("fd error paths") {
  CHECK_THROWS_AS(fd_eigenvalues(laplace_dirichlet(), 30, 2), SizeError);
  CHECK_THROWS_AS(fd_eigenvalues(interface_problem(1.0, 4.0), 1000, 2), GridAlignmentError);
}

TEST_CASE("dispersion_form recognizes reducible problems") {
  CHECK(dispersion_form(interface_problem(1.0, 4.0)).has_value());
  auto spec = laplace_dirichlet();
  spec.coefficients.p =
      PiecewiseCoefficient<double>::from_function([](double x) { return 1.0 + x; });
  CHECK_FALSE(dispersion_form(spec).has_value());
  CHECK_THROWS_AS(dispersion_eigenvalues(spec, 2), ReferenceUnavailableError);
}
