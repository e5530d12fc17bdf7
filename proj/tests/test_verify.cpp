#include <doctest.h>

#include <cmath>
#include <vector>

#include "nlvc/fields.hpp"
#include "nlvc/kernels.hpp"
#include "nlvc/verify.hpp"

namespace vf = nlvc::verify;
namespace kn = nlvc::kernels;
namespace fd = nlvc::fields;
namespace qd = nlvc::quad;

namespace {

qd::QuadratureSpec spec_3d() {
  qd::QuadratureSpec sp;
  sp.radial_order = 5;
  sp.angular_order = 8;
  sp.eps_levels = 6;
  return sp;
}

qd::QuadratureSpec spec_1d() {
  qd::QuadratureSpec sp;
  sp.eps_levels = 8;
  sp.radial_order = 16;
  return sp;
}

}  // namespace

TEST_CASE("identity names round-trip; unknown names rejected") {
  for (auto id : {vf::Identity::CurlGradZero, vf::Identity::DivCurlZero,
                  vf::Identity::CurlCurl, vf::Identity::DivGradEqLaplacian,
                  vf::Identity::FracLaplacianMatch})
    CHECK(vf::parse_identity(vf::to_string(id)) == id);
  CHECK_THROWS_AS((void)vf::parse_identity("grad_grad"), std::invalid_argument);
  CHECK(vf::default_tolerance(vf::Identity::CurlCurl) == 5e-4);
  CHECK(vf::default_tolerance(vf::Identity::CurlGradZero) == 1e-4);
}

TEST_CASE("run_identity: configuration mismatches throw") {
  auto sp = spec_3d();
  auto k1 = kn::make_fractional(1, 0.5);
  auto k3 = kn::make_fractional(3, 0.5);
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  auto s3 = fd::make_bump(3, 1, 1.0);
  auto v3 = fd::make_bump(3, 3, 1.0);
  std::vector<std::vector<double>> p3 = {{0.1, 0.0, 0.0}};
  // kernel/field dimension clash
  CHECK_THROWS_AS((void)vf::run_identity(vf::Identity::DivGradEqLaplacian, k3,
                                         g1, p3, sp),
                  std::invalid_argument);
  // curl identities require d = 3
  CHECK_THROWS_AS((void)vf::run_identity(vf::Identity::CurlGradZero, k1, g1,
                                         {{0.1}}, sp),
                  std::invalid_argument);
  // curl o grad needs a scalar operand, div o curl a 3-vector
  CHECK_THROWS_AS(
      (void)vf::run_identity(vf::Identity::CurlGradZero, k3, v3, p3, sp),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)vf::run_identity(vf::Identity::DivCurlZero, k3, s3, p3, sp),
      std::invalid_argument);
  // the fractional-Laplacian match is specific to the fractional family
  CHECK_THROWS_AS(
      (void)vf::run_identity(vf::Identity::FracLaplacianMatch,
                             kn::make_truncated(1, 0.5, 1.0), g1, {{0.1}}, sp),
      std::invalid_argument);
  // point of the wrong dimension
  CHECK_THROWS_AS((void)vf::run_identity(vf::Identity::DivGradEqLaplacian, k1,
                                         g1, {{0.1, 0.2}}, sp),
                  std::invalid_argument);
}

TEST_CASE("run_identity: vanishing vector identities pass relative to the "
          "non-cancelling composition") {
  auto sp = spec_3d();
  auto k3 = kn::make_fractional(3, 0.5);
  auto us = fd::make_bump(3, 1, 1.0);
  auto uv = fd::make_bump(3, 3, 1.0);
  std::vector<std::vector<double>> pts = {{0.2, 0.1, -0.1}, {0.5, -0.3, 0.2}};

  auto cg = vf::run_identity(vf::Identity::CurlGradZero, k3, us, pts, sp);
  CHECK(cg.pass);
  CHECK(cg.scale > 0.1);  // the scale is a genuine operator magnitude
  CHECK(cg.residual_norm < 1e-7);
  CHECK(cg.points.size() == pts.size());
  CHECK(cg.points[0].x == pts[0]);

  auto dc = vf::run_identity(vf::Identity::DivCurlZero, k3, uv, pts, sp);
  CHECK(dc.pass);
  CHECK(dc.scale > 0.1);
  CHECK(dc.residual_norm < 1e-7);
}

TEST_CASE("run_identity: curl-curl identity holds on a 3-vector bump") {
  auto sp = spec_3d();
  auto k3 = kn::make_fractional(3, 0.5);
  auto uv = fd::make_bump(3, 3, 1.0);
  std::vector<std::vector<double>> pts = {{0.2, 0.1, -0.1}, {0.5, -0.3, 0.2}};
  auto r = vf::run_identity(vf::Identity::CurlCurl, k3, uv, pts, sp);
  CHECK(r.pass);
  CHECK(r.tolerance_used == 5e-4);
  CHECK(r.scale > 1.0);
  CHECK(r.residual_norm < 1e-6);
}

TEST_CASE("run_identity: div o grad matches the equivalence-kernel Laplacian") {
  auto sp = spec_1d();
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  std::vector<std::vector<double>> pts = {{0.3}, {-0.8}};

  // characteristic kernel: the integrability-only case, tight tolerance
  auto rc = vf::run_identity(vf::Identity::DivGradEqLaplacian,
                             kn::make_characteristic(1, 1.0), g1, pts, sp,
                             1e-5);
  CHECK(rc.pass);
  CHECK(rc.tolerance_used == 1e-5);

  auto rt = vf::run_identity(vf::Identity::DivGradEqLaplacian,
                             kn::make_truncated(1, 0.5, 1.0), g1, pts, sp);
  CHECK(rt.pass);

  auto rf = vf::run_identity(vf::Identity::DivGradEqLaplacian,
                             kn::make_fractional(1, 0.5), g1, pts, sp);
  CHECK(rf.pass);

  // tempered: no closed equivalence kernel, exercises the numeric closure
  auto rm = vf::run_identity(vf::Identity::DivGradEqLaplacian,
                             kn::make_tempered(1, 0.5, 1.0), g1, pts, sp);
  CHECK(rm.pass);
}

TEST_CASE("run_identity: fractional composition matches the fractional "
          "Laplacian") {
  auto sp = spec_1d();
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  auto r = vf::run_identity(vf::Identity::FracLaplacianMatch,
                            kn::make_fractional(1, 0.5), g1, {{0.3}, {-0.8}},
                            sp);
  CHECK(r.pass);
  CHECK(r.residual_norm < 1e-4 * r.scale);
}

TEST_CASE("default_points: deterministic, inside the support plus two out") {
  auto f = fd::make_bump(3, 1, 1.0);
  auto a = vf::default_points(f, 5);
  auto b = vf::default_points(f, 5);
  REQUIRE(a.size() == 7);
  CHECK(a == b);
  for (size_t i = 0; i < 5; ++i) {
    double r2 = 0;
    for (double c : a[i]) r2 += c * c;
    CHECK(r2 < 1.0);  // strictly inside the bump support
  }
  for (size_t i = 5; i < 7; ++i) {
    double r2 = 0;
    for (double c : a[i]) r2 += c * c;
    CHECK(r2 > 1.0);
  }
  CHECK(vf::default_points(f, 5, 2) != a);  // seed changes the interior set
}

TEST_CASE("decay_fit: fractional far field decays like r^{-(d+s)}") {
  qd::QuadratureSpec sp;
  sp.eps_levels = 5;
  sp.radial_order = 16;
  sp.angular_order = 64;
  std::vector<double> radii;
  for (double r = 5; r <= 50; r *= 1.3) radii.push_back(r);

  auto f1 = vf::decay_fit(kn::make_fractional(1, 0.5),
                          fd::make_gaussian(1, 1, {0.0}, 1.0), {1.0}, radii,
                          sp);
  CHECK(!f1.underflow);
  CHECK(f1.slope == doctest::Approx(-1.5).epsilon(0.14));
  CHECK(f1.loglog_dev < 0.1);

  auto f3 = vf::decay_fit(kn::make_fractional(3, 0.5),
                          fd::make_gaussian(3, 1, {0.0, 0.0, 0.0}, 1.0),
                          {1.0, 1.0, 0.0}, radii, sp);
  CHECK(!f3.underflow);
  CHECK(f3.slope == doctest::Approx(-3.5).epsilon(0.06));
  CHECK(f3.loglog_dev < 0.2);
}

TEST_CASE("decay_fit: compact kernels leave only the field's own decay") {
  qd::QuadratureSpec sp;
  sp.eps_levels = 5;
  sp.radial_order = 16;
  std::vector<double> radii;
  for (double r = 5; r <= 50; r *= 1.3) radii.push_back(r);
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);

  auto fc = vf::decay_fit(kn::make_characteristic(1, 1.0), g1, {1.0}, radii,
                          sp);
  CHECK(!fc.underflow);
  CHECK(fc.slope < -6.0);  // far steeper than any power-law tail

  // compactly supported field and kernel: no reach at all past the horizon
  auto fb = vf::decay_fit(kn::make_truncated(1, 0.5, 1.0),
                          fd::make_bump(1, 1, 1.0), {1.0}, radii, sp);
  CHECK(fb.underflow);
  CHECK(fb.radii.empty());
}

TEST_CASE("decay_fit: tempered tail is log-linear, not a power law") {
  qd::QuadratureSpec sp;
  sp.eps_levels = 5;
  sp.radial_order = 16;
  std::vector<double> radii;
  for (double r = 5; r <= 50; r *= 1.3) radii.push_back(r);
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  auto ft = vf::decay_fit(kn::make_tempered(1, 0.5, 1.0), g1, {1.0}, radii,
                          sp);
  CHECK(!ft.underflow);
  // exponential model fits far better than the power-law model, and the
  // rate tracks the tempering parameter alpha = 1 (the residual power-law
  // prefactor steepens the fitted rate slightly)
  CHECK(ft.semilog_dev < 0.5 * ft.loglog_dev);
  CHECK(ft.semilog_slope < -0.95);
  CHECK(ft.semilog_slope > -1.5);
}

TEST_CASE("decay_fit: rejects bad directions") {
  qd::QuadratureSpec sp;
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  auto k = kn::make_fractional(1, 0.5);
  CHECK_THROWS_AS((void)vf::decay_fit(k, g1, {0.0}, {5.0, 6.0, 7.0}, sp),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)vf::decay_fit(k, g1, {1.0, 0.0}, {5.0, 6.0, 7.0}, sp),
                  std::invalid_argument);
}

TEST_CASE("holder_mapping_check: ratio is finite and stable") {
  qd::QuadratureSpec sp;
  sp.eps_levels = 5;
  sp.radial_order = 8;

  // constant field: zero gradient, zero ratio, trivially stable
  auto hc = vf::holder_mapping_check(0.25, fd::make_constant(1, 1, 1.0), 0.6,
                                     40, sp);
  CHECK(hc.pass);
  CHECK(hc.ratio == 0.0);

  auto hg = vf::holder_mapping_check(0.25, fd::make_gaussian(1, 1, {0.0}, 1.0),
                                     0.75, 40, sp);
  CHECK(hg.pass);
  CHECK(hg.ratio > 0.0);
  CHECK(std::isfinite(hg.seminorm));

  // Holder-only regularity: the kink field with beta = 0.6 and s = 0.25
  auto hk = vf::holder_mapping_check(0.25, fd::make_kink(0.6, 2.0), 0.6, 40,
                                     sp);
  CHECK(hk.pass);
  CHECK(hk.ratio > 0.0);
}

TEST_CASE("holder_mapping_check: excluded exponent ranges throw") {
  qd::QuadratureSpec sp;
  auto g1 = fd::make_gaussian(1, 1, {0.0}, 1.0);
  CHECK_THROWS_AS((void)vf::holder_mapping_check(0.5, g1, 0.5, 10, sp),
                  std::domain_error);
  CHECK_THROWS_AS((void)vf::holder_mapping_check(0.5, g1, 1.0, 10, sp),
                  std::domain_error);
  CHECK_THROWS_AS((void)vf::holder_mapping_check(1.5, g1, 0.7, 10, sp),
                  std::domain_error);
}
