#include "nlvc/helmholtz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <array>
#include <memory>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlvc/kernels.hpp"
#include "nlvc/operators.hpp"

namespace nlvc::helmholtz {

namespace {

constexpr double kPi = 3.14159265358979323846;

double norm2(const double* x, int d) {
  double s = 0;
  for (int c = 0; c < d; ++c) s += x[c] * x[c];
  return std::sqrt(s);
}

// C^3 polynomial smoothstep rising 0 -> 1 over t in [0, 1].
double rise(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double t4 = t * t * t * t;
  return t4 * (35.0 - 84.0 * t + t * t * (70.0 - 20.0 * t));
}

double halton(long i, int base) {
  double f = 1.0, r = 0.0;
  for (long n = i; n > 0; n /= base) {
    f /= base;
    r += f * (n % base);
  }
  return r;
}

// Panel boundaries for the convolution radius |z| in [lo, hi]: geometric
// doubling away from the singularity at 0 until the panel width reaches
// reach / 6, uniform afterwards (the integrand varies on the scale of u).
std::vector<double> conv_radii(double lo, double hi, double reach) {
  std::vector<double> radii{lo};
  const double wc = reach / 6.0;
  double r = lo;
  while (r < hi) {
    const double step = std::min(std::max(r, 1e-300), wc);
    r = std::min(r + step, hi);
    radii.push_back(r);
  }
  return radii;
}

struct RieszCore {
  std::vector<double> value;
  double err = 0.0;
  long evals = 0;
};

RieszCore riesz_core(double s, const fields::Field& u, const double* x,
                     const quad::QuadratureSpec& spec, bool parallel,
                     bool want_err) {
  const int d = u.d;
  const int nf = u.ncomp();
  const double kappa = riesz_constant(d, s);
  const double reach = u.support_radius;
  const double xn = norm2(x, d);
  const double hi = xn + reach;

  RieszCore out;
  out.value.assign(nf, 0.0);

  // Far from the support the x-centered shells meet supp u only in a small
  // angular cap (half-angle ~ asin(reach / xn)) that the angular rule cannot
  // resolve. The weight |x - y|^{2s-d} is smooth over the support there, so
  // integrate in y over supp u instead.
  if (xn >= 2.0 * reach) {
    quad::Integrand g2 = [&](const double* y, double* o) {
      double ub[16];
      u.eval(y, ub);
      bool any = false;
      for (int c = 0; c < nf; ++c) any = any || ub[c] != 0.0;
      if (!any) {
        std::memset(o, 0, sizeof(double) * nf);
        return;
      }
      double d2 = 0.0;
      for (int c = 0; c < d; ++c) d2 += (x[c] - y[c]) * (x[c] - y[c]);
      const double w = kappa * std::pow(d2, 0.5 * (2.0 * s - d));
      for (int c = 0; c < nf; ++c) o[c] = w * ub[c];
    };
    auto radii2 = conv_radii(1e-4 * reach, reach, reach);
    auto pd2 = quad::panel_integrate_radii(g2, d, nf, spec.radial_order,
                                           spec.angular_order, radii2,
                                           parallel);
    out.value = pd2.cumulative_from(0);
    out.evals = pd2.evals;
    if (want_err) {
      auto ph2 = quad::panel_integrate_radii(
          g2, d, nf, std::max(spec.radial_order / 2, 2),
          std::max(spec.angular_order / 2, 2), radii2, parallel);
      auto vh2 = ph2.cumulative_from(0);
      for (int c = 0; c < nf; ++c)
        out.err = std::max(out.err, std::abs(out.value[c] - vh2[c]));
      out.evals += ph2.evals;
    }
    return out;
  }

  // Domain of |z|: u(x - z) vanishes for |z| outside [xn - reach, xn + reach].
  // The floor keeps the radial weight finite; u vanishes continuously at
  // its support boundary, so the skipped sliver carries no mass.
  const double lo = std::max(xn - reach, 1e-4 * reach);
  const bool head = xn < reach;  // analytic head below lo: u smooth at z = 0
  auto radii = conv_radii(lo, hi, reach);

  quad::Integrand g = [&](const double* z, double* o) {
    const double r = norm2(z, d);
    double y[3], ub[16];
    for (int c = 0; c < d; ++c) y[c] = x[c] - z[c];
    u.eval(y, ub);
    bool any = false;
    for (int c = 0; c < nf; ++c) any = any || ub[c] != 0.0;
    if (!any) {
      std::memset(o, 0, sizeof(double) * nf);
      return;
    }
    const double w = kappa * std::pow(r, 2.0 * s - d);
    for (int c = 0; c < nf; ++c) o[c] = w * ub[c];
  };

  auto pd = quad::panel_integrate_radii(g, d, nf, spec.radial_order,
                                        spec.angular_order, radii, parallel);
  out.value = pd.cumulative_from(0);
  out.evals = pd.evals;

  if (head) {
    // |z| < lo: u(x - z) = u(x) + O(lo^2); the radial factor integrates to
    // lo^{2s} / (2s)
    const double om = kernels::omega_dm1(d);
    double ux[16];
    u.eval(x, ux);
    const double c0 = kappa * om * std::pow(lo, 2.0 * s) / (2.0 * s);
    for (int c = 0; c < nf; ++c) out.value[c] += c0 * ux[c];
    out.err += c0 * lo * lo * std::max(u.sup_norm, 1.0);
  }

  if (want_err) {
    auto ph =
        quad::panel_integrate_radii(g, d, nf, std::max(spec.radial_order / 2, 2),
                                    std::max(spec.angular_order / 2, 2), radii,
                                    parallel);
    auto vh = ph.cumulative_from(0);
    for (int c = 0; c < nf; ++c)
      out.err = std::max(out.err, std::abs(out.value[c] - vh[c]));
    out.evals += ph.evals;
  }
  return out;
}

// Catmull-Rom weights for local coordinate t in [0, 1].
inline void cr_weights(double t, double* w) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t + t2 - 0.5 * t3;
  w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
  w[2] = 0.5 * t + 2.0 * t2 - 1.5 * t3;
  w[3] = -0.5 * t2 + 0.5 * t3;
}

fields::Field make_v_field(const Lattice& grid,
                           std::shared_ptr<std::vector<double>> data,
                           double s, double R, std::array<double, 3> km0,
                           double sup) {
  fields::Field f;
  f.d = 3;
  f.rows = 3;
  f.cols = 1;
  f.support_radius = 10.0 * R;
  f.smoothness = fields::Smoothness::C2Bounded;
  f.sup_norm = sup;
  const double p = 2.0 * s - 3.0;
  f.eval = [grid, data, s, R, km0, p](const double* x, double* out) {
    const double r = norm2(x, 3);
    double far[3] = {0, 0, 0};
    if (r >= 1.5 * R) {
      double wnd = 1.0 - rise((r - 8.0 * R) / (2.0 * R));
      const double amp = std::pow(r, p) * wnd;
      for (int c = 0; c < 3; ++c) far[c] = km0[c] * amp;
      if (r >= 2.0 * R) {
        for (int c = 0; c < 3; ++c) out[c] = far[c];
        return;
      }
    }
    // tricubic (Catmull-Rom) on the lattice
    const int n = grid.n;
    double wx[3][4];
    int i0[3];
    for (int a = 0; a < 3; ++a) {
      double fi = (x[a] - grid.lo) / grid.h;
      int ia = (int)std::floor(fi) - 1;
      ia = std::max(0, std::min(ia, n - 4));
      cr_weights(fi - (ia + 1), wx[a]);
      i0[a] = ia;
    }
    double t[3] = {0, 0, 0};
    const auto& v = *data;
    for (int a = 0; a < 4; ++a) {
      double ty[3] = {0, 0, 0};
      for (int b = 0; b < 4; ++b) {
        const size_t base = grid.idx(i0[0] + a, i0[1] + b, i0[2]) * 3;
        double tz[3] = {0, 0, 0};
        for (int c = 0; c < 4; ++c)
          for (int q = 0; q < 3; ++q)
            tz[q] += wx[2][c] * v[base + (size_t)c * 3 + q];
        for (int q = 0; q < 3; ++q) ty[q] += wx[1][b] * tz[q];
      }
      for (int q = 0; q < 3; ++q) t[q] += wx[0][a] * ty[q];
    }
    if (r < 1.5 * R) {
      for (int c = 0; c < 3; ++c) out[c] = t[c];
    } else {
      const double hh = rise((r - 1.5 * R) / (0.5 * R));
      for (int c = 0; c < 3; ++c) out[c] = (1.0 - hh) * t[c] + hh * far[c];
    }
  };
  return f;
}

}  // namespace

double riesz_constant(int d, double s) {
  if (!(s > 0.0 && 2.0 * s < d))
    throw std::domain_error("riesz_constant: requires 0 < 2s < d");
  return std::tgamma(0.5 * d - s) /
         (std::pow(4.0, s) * std::pow(kPi, 0.5 * d) * std::tgamma(s));
}

quad::EvalResult riesz_potential(double s, const fields::Field& u,
                                 const double* x,
                                 const quad::QuadratureSpec& spec) {
  if (!(s > 0.0 && 2.0 * s < u.d))
    throw std::domain_error("riesz_potential: requires 0 < 2s < d");
  if (!std::isfinite(u.support_radius) || u.support_radius <= 0.0)
    throw std::invalid_argument(
        "riesz_potential: u must be compactly supported");
  auto core = riesz_core(s, u, x, spec, true, true);
  quad::EvalResult res;
  res.value = std::move(core.value);
  res.rows = u.rows;
  res.cols = u.cols;
  res.err_estimate = core.err;
  res.diag.integrand_evals = core.evals;
  return res;
}

HelmholtzResult decompose(double s, const fields::Field& u, double R,
                          const DecomposeOptions& opt,
                          const quad::QuadratureSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  if (u.d != 3 || u.rows != 3 || u.cols != 1)
    throw std::invalid_argument("decompose: u must be a 3-vector field");
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("decompose: s must lie in (0, 1)");
  if (!(R > 0.0)) throw std::invalid_argument("decompose: R must be positive");
  if (!std::isfinite(u.support_radius) || u.support_radius <= 0.0)
    throw std::invalid_argument("decompose: u must be compactly supported");
  if (opt.n < 8) throw std::invalid_argument("decompose: lattice too small");

  HelmholtzResult res;
  res.s = s;
  res.R = R;
  res.grid.n = opt.n;
  res.grid.lo = -3.0 * R;
  res.grid.h = 6.0 * R / (opt.n - 1);
  const int n = opt.n;
  const Lattice grid = res.grid;

  // --- Riesz potential on the lattice (independent nodes) ---------------
  auto vdata = std::make_shared<std::vector<double>>((size_t)n * n * n * 3);
  long evals = 0;
  const int nthreads = quad::max_threads();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads) \
    reduction(+ : evals)
#endif
  for (int i = 0; i < n; ++i) {
    double x[3];
    x[0] = grid.coord(i);
    for (int j = 0; j < n; ++j) {
      x[1] = grid.coord(j);
      for (int k = 0; k < n; ++k) {
        x[2] = grid.coord(k);
        auto core = riesz_core(s, u, x, spec, false, false);
        double* dst = vdata->data() + grid.idx(i, j, k) * 3;
        for (int c = 0; c < 3; ++c) dst[c] = core.value[c];
        evals += core.evals;
      }
    }
  }
  (void)nthreads;
  res.v = *vdata;

  // --- zeroth moment of u for the far-field model -----------------------
  const double kappa = riesz_constant(3, s);
  std::array<double, 3> km0 = {0, 0, 0};
  {
    quad::Integrand gu = [&](const double* z, double* o) { u.eval(z, o); };
    auto pd = quad::panel_integrate(gu, 3, 3, std::max(spec.radial_order, 8),
                                    std::max(spec.angular_order, 12),
                                    1e-8 * u.support_radius, u.support_radius);
    auto m0 = pd.cumulative_from(0);
    for (int c = 0; c < 3; ++c) km0[c] = kappa * m0[c];
    evals += pd.evals;
  }

  double vmax = 0.0;
  for (double c : *vdata) vmax = std::max(vmax, std::abs(c));
  res.v_field = make_v_field(grid, vdata, s, R, km0,
                             std::max(vmax, 1e-300));

  // --- interpolation-error sample ---------------------------------------
  {
    double worst = 0.0;
    for (int i = 0; i < 12; ++i) {
      double x[3];
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        x[c] = 1.4 * R * (2.0 * halton(7 * i + c + 1, c == 0 ? 2 : (c == 1 ? 3 : 5)) - 1.0);
        r2 += x[c] * x[c];
      }
      if (r2 > 1.96 * R * R) continue;  // keep the pure-tricubic region
      auto direct = riesz_core(s, u, x, spec, false, false);
      double vi[3];
      res.v_field.eval(x, vi);
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(direct.value[c] - vi[c]));
      evals += direct.evals;
    }
    res.interp_err = worst;
    const double budget = opt.resolution_budget * std::max(vmax, 1e-300);
    if (worst > budget) {
      const int sugg =
          (int)std::ceil((n - 1) * std::pow(worst / budget, 0.25)) + 1;
      throw ResolutionError(
          "decompose: lattice too coarse for the interpolation budget "
          "(sampled error " +
              std::to_string(worst) + ", budget " + std::to_string(budget) +
              "); suggested n = " + std::to_string(sugg),
          sugg);
    }
  }

  // --- residual scale: sampled max |u| ----------------------------------
  {
    double um = 0.0;
    double ub[3];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double x[3] = {grid.coord(i), grid.coord(j), grid.coord(k)};
          if (norm2(x, 3) > 1.2 * R) continue;
          u.eval(x, ub);
          for (double c : ub) um = std::max(um, std::abs(c));
        }
    res.u_max = um;
  }

  // --- check points and reconstruction ----------------------------------
  {
    static const int bases[3] = {2, 3, 5};
    long idx = 1 + (long)opt.seed * 1000;
    while ((int)res.check_points.size() < opt.check_points) {
      std::vector<double> x(3);
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        x[c] = 1.2 * R * (2.0 * halton(idx, bases[c]) - 1.0);
        r2 += x[c] * x[c];
      }
      ++idx;
      if (r2 > 1.44 * R * R) continue;
      res.check_points.push_back(std::move(x));
    }
    auto k = kernels::make_fractional(3, s);
    for (const auto& x : res.check_points) {
      double ub[3];
      u.eval(x.data(), ub);
      auto parts = operators::compose_batch(
          {{operators::Op::Grad, operators::Op::Div},
           {operators::Op::Curl, operators::Op::Curl}},
          k, res.v_field, x.data(), spec);
      evals += parts[0].diag.integrand_evals;
      double rmax = 0.0;
      for (int c = 0; c < 3; ++c) {
        // u = G_s psi - C_s w with psi = -D_s v, w = -C_s v:
        // reconstruction = -(G_s o D_s) v + (C_s o C_s) v
        const double rec = -parts[0].value[c] + parts[1].value[c];
        rmax = std::max(rmax, std::abs(ub[c] - rec));
      }
      res.point_residuals.push_back(rmax);
      res.reconstruction_residual =
          std::max(res.reconstruction_residual, rmax);
    }
  }

  // --- gridded potentials ------------------------------------------------
  if (opt.grid_potentials) {
    res.psi.assign((size_t)n * n * n, 0.0);
    res.w.assign((size_t)n * n * n * 3, 0.0);
    auto k = kernels::make_fractional(3, s);
    long pevals = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads) \
    reduction(+ : pevals)
#endif
    for (int i = 0; i < n; ++i) {
      double x[3];
      x[0] = grid.coord(i);
      for (int j = 0; j < n; ++j) {
        x[1] = grid.coord(j);
        for (int kk = 0; kk < n; ++kk) {
          x[2] = grid.coord(kk);
          auto dv = operators::nl_divergence(k, res.v_field, x, spec);
          auto cv = operators::nl_curl(k, res.v_field, x, spec);
          const size_t id = grid.idx(i, j, kk);
          res.psi[id] = -dv.value[0];
          for (int c = 0; c < 3; ++c) res.w[id * 3 + c] = -cv.value[c];
          pevals += dv.diag.integrand_evals + cv.diag.integrand_evals;
        }
      }
    }
    evals += pevals;
    for (double c : res.psi) res.psi_max = std::max(res.psi_max, std::abs(c));
    for (double c : res.w) res.w_max = std::max(res.w_max, std::abs(c));
  }

  res.integrand_evals = evals;
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace nlvc::helmholtz
