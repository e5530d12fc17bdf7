#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "nlvc/fields.hpp"
#include "nlvc/helmholtz.hpp"
#include "nlvc/operators.hpp"
#include "nlvc/specfun.hpp"

namespace hh = nlvc::helmholtz;
namespace fd = nlvc::fields;
namespace op = nlvc::operators;
namespace sf = nlvc::specfun;
namespace qd = nlvc::quad;

namespace {
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}
}  // namespace

TEST_CASE("riesz_constant: formula and domain") {
  // Gamma(d/2 - s) / (4^s pi^{d/2} Gamma(s))
  for (int d : {1, 2, 3}) {
    for (double s : {0.1, 0.25, 0.4}) {
      if (!(2.0 * s < d)) continue;
      const double want = sf::gamma(0.5 * d - s) /
                          (std::pow(4.0, s) * std::pow(M_PI, 0.5 * d) *
                           sf::gamma(s));
      CHECK(rel_err(hh::riesz_constant(d, s), want) < 1e-14);
    }
  }
  CHECK_THROWS_AS(hh::riesz_constant(1, 0.5), std::domain_error);
  CHECK_THROWS_AS(hh::riesz_constant(3, 1.5), std::domain_error);
  CHECK_THROWS_AS(hh::riesz_constant(3, 0.0), std::domain_error);
}

TEST_CASE("riesz_potential: zero field and support validation") {
  qd::QuadratureSpec sp;
  auto z = fd::axpby(0.0, fd::make_bump(3, 1, 1.0), 0.0,
                     fd::make_bump(3, 1, 1.0));
  double x[3] = {0.3, -0.2, 0.1};
  auto r = hh::riesz_potential(0.4, z, x, sp);
  CHECK(r.value[0] == 0.0);

  auto g = fd::make_gaussian(3, 1, {0.0, 0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(hh::riesz_potential(0.4, g, x, sp), std::invalid_argument);
}

TEST_CASE("riesz_potential: far field follows kappa m0 |x|^{2s-3}") {
  qd::QuadratureSpec sp;
  sp.radial_order = 8;
  sp.angular_order = 12;
  const double s = 0.5;
  auto u = fd::make_bump(3, 1, 1.0);
  double xa[3] = {8.0, 0.0, 0.0};
  double xb[3] = {0.0, 16.0, 0.0};
  const double va = hh::riesz_potential(s, u, xa, sp).value[0];
  const double vb = hh::riesz_potential(s, u, xb, sp).value[0];
  CHECK(va > 0.0);
  // |x|^{2s-3} = |x|^{-2}: doubling the radius quarters the value
  CHECK(rel_err(va / vb, 4.0) < 5e-3);

  // absolute far-field value against the monopole model
  double m0 = 0.0;
  {
    auto pd = qd::panel_integrate(
        [&u](const double* zz, double* out) { u.eval(zz, out); }, 3, 1, 10,
        12, 1e-4, 1.0);
    m0 = pd.cumulative_from(0)[0];
  }
  const double model = hh::riesz_constant(3, s) * m0 / (8.0 * 8.0);
  CHECK(rel_err(va, model) < 2e-2);
}

TEST_CASE("riesz_potential: inverted by the fractional Laplacian") {
  qd::QuadratureSpec fine;
  fine.radial_order = 6;
  fine.angular_order = 10;
  fine.eps_levels = 5;
  const double s = 0.4;
  auto u = fd::make_bump(3, 1, 1.0);

  fd::Field v;
  v.d = 3;
  v.rows = 1;
  v.cols = 1;
  v.support_radius = INFINITY;
  v.smoothness = fd::Smoothness::C2Bounded;
  v.sup_norm = 1.0;
  qd::QuadratureSpec rsp;
  rsp.radial_order = 6;
  rsp.angular_order = 8;
  v.eval = [s, u, rsp](const double* x, double* out) {
    out[0] = hh::riesz_potential(s, u, x, rsp).value[0];
  };

  double pts[2][3] = {{0.2, 0.1, -0.1}, {0.5, -0.3, 0.2}};
  for (auto& p : pts) {
    double want[1];
    u.eval(p, want);
    // v decays like |x|^{-2.2}; cap the outer radius so the quadrature
    // samples a finite window of the slowly decaying tail
    qd::QuadratureSpec fsp = fine;
    fsp.tail_radius = 40.0;
    const double got = op::frac_laplacian(s, v, p, fsp).value[0];
    CHECK(std::abs(got - want[0]) < 2e-2);
  }
}

TEST_CASE("decompose: configuration validation") {
  qd::QuadratureSpec sp;
  hh::DecomposeOptions opt;
  auto u3 = fd::make_bump(3, 3, 1.0);
  CHECK_THROWS_AS(hh::decompose(0.0, u3, 1.0, opt, sp), std::domain_error);
  CHECK_THROWS_AS(hh::decompose(1.0, u3, 1.0, opt, sp), std::domain_error);
  CHECK_THROWS_AS(hh::decompose(0.4, u3, 0.0, opt, sp),
                  std::invalid_argument);
  CHECK_THROWS_AS(hh::decompose(0.4, fd::make_bump(1, 1, 1.0), 1.0, opt, sp),
                  std::invalid_argument);
  CHECK_THROWS_AS(hh::decompose(0.4, fd::make_bump(3, 1, 1.0), 1.0, opt, sp),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      hh::decompose(0.4, fd::make_gaussian(3, 3, {0, 0, 0}, 1.0), 1.0, opt,
                    sp),
      std::invalid_argument);
  hh::DecomposeOptions tiny = opt;
  tiny.n = 6;
  CHECK_THROWS_AS(hh::decompose(0.4, u3, 1.0, tiny, sp),
                  std::invalid_argument);
}

TEST_CASE("decompose: coarse lattice raises ResolutionError with a hint") {
  qd::QuadratureSpec sp;
  sp.radial_order = 4;
  sp.angular_order = 6;
  auto u = fd::make_bump(3, 3, 1.0);
  hh::DecomposeOptions opt;
  opt.n = 8;
  opt.resolution_budget = 1e-4;
  opt.grid_potentials = false;
  try {
    hh::decompose(0.4, u, 1.0, opt, sp);
    FAIL("expected ResolutionError");
  } catch (const hh::ResolutionError& e) {
    CHECK(e.suggested_n > 8);
  }
}

TEST_CASE("decompose: small run reconstructs the field and is deterministic") {
  qd::QuadratureSpec sp;
  sp.radial_order = 4;
  sp.angular_order = 6;
  sp.eps_levels = 4;
  auto u = fd::make_bump(3, 3, 1.0);
  hh::DecomposeOptions opt;
  opt.n = 14;
  opt.check_points = 2;
  opt.grid_potentials = false;
  opt.resolution_budget = 0.1;

  auto r1 = hh::decompose(0.4, u, 1.0, opt, sp);
  CHECK(r1.grid.n == 14);
  CHECK(r1.v.size() == (size_t)14 * 14 * 14 * 3);
  CHECK(r1.u_max > 0.5);
  CHECK(r1.check_points.size() == 2);
  CHECK(r1.point_residuals.size() == 2);
  // coarse lattice: the residual tracks the sampled interpolation error
  CHECK(r1.reconstruction_residual < 0.15 * r1.u_max);
  CHECK(r1.reconstruction_residual > 0.0);
  for (const auto& p : r1.check_points) {
    const double rr = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    CHECK(rr <= 1.2 * std::sqrt(3.0));
  }

  auto r2 = hh::decompose(0.4, u, 1.0, opt, sp);
  CHECK(r2.reconstruction_residual == r1.reconstruction_residual);
  CHECK(r2.v == r1.v);
  CHECK(r2.check_points == r1.check_points);

  // refinement shrinks the residual
  hh::DecomposeOptions fine = opt;
  fine.n = 20;
  auto r3 = hh::decompose(0.4, u, 1.0, fine, sp);
  CHECK(r3.reconstruction_residual < r1.reconstruction_residual);
}

TEST_CASE("decompose: potential lattices are filled on request") {
  qd::QuadratureSpec sp;
  sp.radial_order = 4;
  sp.angular_order = 6;
  sp.eps_levels = 4;
  auto u = fd::make_bump(3, 3, 1.0);
  hh::DecomposeOptions opt;
  opt.n = 8;
  opt.check_points = 1;
  opt.grid_potentials = true;
  opt.resolution_budget = 1.0;  // accept the coarse lattice for this test

  auto r = hh::decompose(0.4, u, 1.0, opt, sp);
  CHECK(r.psi.size() == (size_t)8 * 8 * 8);
  CHECK(r.w.size() == (size_t)8 * 8 * 8 * 3);
  CHECK(r.psi_max > 0.0);
  CHECK(r.w_max > 0.0);
  CHECK(r.psi_max < 10.0);
  CHECK(r.w_max < 10.0);
}
