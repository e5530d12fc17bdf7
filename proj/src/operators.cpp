#include "nlvc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlvc/detail/gauss.hpp"
#include "nlvc/specfun.hpp"

namespace nlvc::operators {

namespace {

constexpr int kMaxComp = 32;  // stack buffers; all shapes here are tiny

double norm2(const double* x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

bool compact_kernel(const kernels::KernelSpec& k) {
  return k.family == kernels::Family::TruncatedFractional ||
         k.family == kernels::Family::Characteristic;
}

// Radius beyond which the field is (numerically) zero. Exact for compact
// supports; Schwartz-type fields are probed on growing spheres. decays is
// false when no such radius was found (e.g. constants).
double field_reach(const fields::Field& f, bool* decays = nullptr) {
  if (decays) *decays = true;
  if (std::isfinite(f.support_radius)) return f.support_radius;
  const auto& sr = quad::sphere_rule(f.d, 4);
  std::vector<double> buf(f.ncomp());
  double R = 1.0;
  while (R < 1.1e3) {
    double m = 0.0;
    double y[3];
    for (int i = 0; i < sr.n; ++i) {
      for (int c = 0; c < f.d; ++c) y[c] = R * sr.dirs[i * f.d + c];
      f.eval(y, buf.data());
      for (double v : buf) m = std::max(m, std::abs(v));
    }
    if (m < 1e-16 * std::max(f.sup_norm, 1e-300)) return R;
    R *= 2.0;
  }
  if (decays) *decays = false;
  return R;
}

// out += coef * T(e, dv) for the requested operator; dv holds the (fr x fc)
// operand difference, e the unit direction.
inline void accumulate_op(Op op, int d, int fr, int fc, const double* e,
                          double coef, const double* dv, double* out) {
  switch (op) {
    case Op::Grad:
      for (int i = 0; i < fr; ++i)
        for (int j = 0; j < d; ++j) out[i * d + j] += coef * dv[i] * e[j];
      return;
    case Op::Div:
      if (d == 1) {
        for (int i = 0; i < fr; ++i) out[i] += coef * dv[i] * e[0];
      } else if (fc == d) {
        for (int i = 0; i < fr; ++i) {
          double s = 0.0;
          for (int j = 0; j < d; ++j) s += dv[i * d + j] * e[j];
          out[i] += coef * s;
        }
      } else {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += dv[j] * e[j];
        out[0] += coef * s;
      }
      return;
    case Op::Curl:
      out[0] += coef * (e[1] * dv[2] - e[2] * dv[1]);
      out[1] += coef * (e[2] * dv[0] - e[0] * dv[2]);
      out[2] += coef * (e[0] * dv[1] - e[1] * dv[0]);
      return;
  }
}

}  // namespace

std::pair<int, int> op_shape(Op op, int rows, int cols, int d) {
  switch (op) {
    case Op::Grad:
      if (cols != 1)
        throw std::invalid_argument("grad: operand must be scalar or vector");
      if (rows == 1) return {d, 1};  // scalar -> column vector
      return {rows, d};
    case Op::Div:
      if (d == 1) {
        if (cols != 1) throw std::invalid_argument("div: bad shape for d=1");
        return {rows, 1};
      }
      if (cols == d) return {rows, 1};
      if (cols == 1 && rows == d) return {1, 1};
      throw std::invalid_argument("div: operand must carry a d index");
    case Op::Curl:
      if (d != 3 || rows != 3 || cols != 1)
        throw std::invalid_argument("curl: needs a 3-vector field in d=3");
      return {3, 1};
  }
  throw std::invalid_argument("op_shape: unknown operator");
}

quad::EvalResult nl_apply(Op op, const kernels::KernelSpec& k,
                          const fields::Field& f, const double* x,
                          const quad::QuadratureSpec& spec, double fixed_eps) {
  const int d = k.d;
  if (f.d != d) throw std::invalid_argument("nl_apply: dimension mismatch");
  auto shape = op_shape(op, f.rows, f.cols, d);
  const int nc = shape.first * shape.second;
  const int nf = f.ncomp();
  if (nf > kMaxComp / 2 || nc > kMaxComp)
    throw std::invalid_argument("nl_apply: field shape too large");

  std::vector<double> ux(nf);
  f.eval(x, ux.data());
  const double reach = field_reach(f);
  const double xn = norm2(x, d);

  double R, tail_err = 0.0;
  if (compact_kernel(k)) {
    R = k.delta;  // integrand is exactly zero beyond the horizon
  } else if (spec.tail_radius > 0.0) {
    R = spec.tail_radius;
    tail_err = quad::tail_bound(k, f, std::max(R, 1.0000001));
  } else {
    R = std::max(2.0 * spec.eps0, xn + reach);
    if (!std::isfinite(f.support_radius)) {
      // only the probed residue of u survives past R; the u(x) part of the
      // integrand cancels by antipodal symmetry
      tail_err = 1e-15 * f.sup_norm *
                 kernels::tail_integral(k, std::max(R, 1.0000001));
    }
  }

  quad::Integrand g = [&](const double* z, double* out) {
    const double r = norm2(z, d);
    std::memset(out, 0, sizeof(double) * nc);
    const double rho = kernels::eval(k, r);
    if (rho == 0.0) return;
    double y[3], ub[kMaxComp], dv[kMaxComp];
    for (int c = 0; c < d; ++c) y[c] = x[c] + z[c];
    f.eval(y, ub);
    for (int c = 0; c < nf; ++c) dv[c] = ub[c] - ux[c];
    double e[3];
    for (int c = 0; c < d; ++c) e[c] = z[c] / r;
    accumulate_op(op, d, f.rows, f.cols, e, rho / r, dv, out);
  };

  quad::EvalResult res;
  if (fixed_eps > 0.0) {
    res = quad::integrate_shell(g, d, nc, fixed_eps, R, spec);
  } else {
    res = quad::pv_integrate(g, d, nc, spec, R, tail_err);
  }
  res.rows = shape.first;
  res.cols = shape.second;
  return res;
}

quad::EvalResult nl_gradient(const kernels::KernelSpec& k,
                             const fields::Field& f, const double* x,
                             const quad::QuadratureSpec& spec,
                             double fixed_eps) {
  return nl_apply(Op::Grad, k, f, x, spec, fixed_eps);
}

quad::EvalResult nl_divergence(const kernels::KernelSpec& k,
                               const fields::Field& f, const double* x,
                               const quad::QuadratureSpec& spec,
                               double fixed_eps) {
  return nl_apply(Op::Div, k, f, x, spec, fixed_eps);
}

quad::EvalResult nl_curl(const kernels::KernelSpec& k, const fields::Field& f,
                         const double* x, const quad::QuadratureSpec& spec,
                         double fixed_eps) {
  return nl_apply(Op::Curl, k, f, x, spec, fixed_eps);
}

quad::EvalResult frac_laplacian(double s, const fields::Field& f,
                                const double* x,
                                const quad::QuadratureSpec& spec) {
  const int d = f.d;
  const int nf = f.ncomp();
  if (nf > kMaxComp / 2)
    throw std::invalid_argument("frac_laplacian: field shape too large");
  const double C = specfun::C_ds(d, s);
  const double om = kernels::omega_dm1(d);

  std::vector<double> ux(nf);
  f.eval(x, ux.data());
  bool decays = true;
  const double reach = field_reach(f, &decays);
  const double R = std::max(4.0 * spec.eps0, norm2(x, d) + reach);

  quad::Integrand gsym = [&](const double* z, double* out) {
    const double r = norm2(z, d);
    const double w = 0.5 * C * std::pow(r, -(d + 2.0 * s));
    double yp[3], ym[3], up[kMaxComp], um[kMaxComp];
    for (int c = 0; c < d; ++c) {
      yp[c] = x[c] + z[c];
      ym[c] = x[c] - z[c];
    }
    f.eval(yp, up);
    f.eval(ym, um);
    for (int c = 0; c < nf; ++c) out[c] = w * (2.0 * ux[c] - up[c] - um[c]);
  };

  const bool has_c2 =
      f.classical_laplacian && (f.smoothness == fields::Smoothness::C2Bounded ||
                                f.smoothness == fields::Smoothness::Schwartz);
  quad::EvalResult res;
  if (has_c2) {
    // ball |y| < eps: second difference ~ -y^T Hess y, whose angular average
    // leaves -(omega/d) lap(u) r^2; integrate the radial factor exactly
    std::vector<double> lap(nf);
    f.classical_laplacian(x, lap.data());
    auto inner = [&](double e) {
      return -0.5 * C * (om / d) * std::pow(e, 2.0 - 2.0 * s) /
             (2.0 - 2.0 * s);
    };
    const double e0 = spec.eps0;
    auto shellA = quad::integrate_shell(gsym, d, nf, e0, R, spec);
    auto shellB = quad::integrate_shell(gsym, d, nf, 0.5 * e0, e0, spec);
    res.value.resize(nf);
    res.rows = f.rows;
    res.cols = f.cols;
    double taylor_err = 0.0;
    for (int c = 0; c < nf; ++c) {
      double va = inner(e0) * lap[c] + shellA.value[c];
      double vb = inner(0.5 * e0) * lap[c] + shellB.value[c] + shellA.value[c];
      res.value[c] = vb;
      taylor_err = std::max(taylor_err, std::abs(va - vb));
    }
    res.err_estimate = shellA.err_estimate + shellB.err_estimate + taylor_err;
    res.diag = shellA.diag;
    res.diag.integrand_evals += shellB.diag.integrand_evals;
  } else {
    // Holder-only field: no Taylor panel; extrapolate the shrinking inner
    // radius instead
    res = quad::pv_integrate(gsym, d, nf, spec, R);
    res.rows = f.rows;
    res.cols = f.cols;
  }
  if (decays) {
    // beyond R the field is gone and the second difference is 2 u(x)
    for (int c = 0; c < nf; ++c)
      res.value[c] += C * ux[c] * om * std::pow(R, -2.0 * s) / (2.0 * s);
    if (!std::isfinite(f.support_radius))
      res.err_estimate += 1e-15 * f.sup_norm * C * om / (2.0 * s);
  } else {
    // bounded non-decaying field: the tail is unknown but bounded
    res.err_estimate +=
        2.0 * f.sup_norm * C * om * std::pow(R, -2.0 * s) / (2.0 * s);
  }
  return res;
}

quad::EvalResult eq_laplacian(const std::function<double(double)>& rho_eq,
                              double support, const fields::Field& f,
                              const double* x,
                              const quad::QuadratureSpec& spec,
                              const std::vector<double>& singular) {
  const int d = f.d;
  const int nf = f.ncomp();
  if (nf > kMaxComp / 2)
    throw std::invalid_argument("eq_laplacian: field shape too large");
  const double om = kernels::omega_dm1(d);
  std::vector<double> ux(nf);
  f.eval(x, ux.data());
  bool decays = true;
  const double reach = field_reach(f, &decays);
  double R = support > 0.0 ? support
                           : std::max(4.0 * spec.eps0, norm2(x, d) + reach);

  quad::Integrand g = [&](const double* z, double* out) {
    const double r = norm2(z, d);
    std::memset(out, 0, sizeof(double) * nf);
    const double rq = rho_eq(r);
    if (rq == 0.0) return;
    const double w = 0.5 * rq / (r * r);
    double yp[3], ym[3], up[kMaxComp], um[kMaxComp];
    for (int c = 0; c < d; ++c) {
      yp[c] = x[c] + z[c];
      ym[c] = x[c] - z[c];
    }
    f.eval(yp, up);
    f.eval(ym, um);
    for (int c = 0; c < nf; ++c) out[c] = w * (2.0 * ux[c] - up[c] - um[c]);
  };

  const auto sched = spec.eps_schedule();
  const int L = (int)sched.size();
  const double eps_min = sched.back();
  const double Rg =
      quad::round_up_pow2(eps_min, std::max(R, 2.0 * spec.eps0));
  auto radii = quad::graded_radii(eps_min, Rg, singular);
  auto pd = quad::panel_integrate_radii(g, d, nf, spec.radial_order,
                                        spec.angular_order, radii);
  // cumulative panel sums from each schedule radius (all are boundaries)
  std::vector<std::pair<double, std::vector<double>>> seq;
  for (int k = 0; k < L; ++k) {
    const double e = sched[k];
    int idx = -1;
    for (size_t i = 0; i < radii.size(); ++i)
      if (std::abs(radii[i] - e) < 1e-9 * e) idx = (int)i;
    if (idx < 0) throw std::logic_error("eq_laplacian: schedule off the grid");
    seq.emplace_back(e, pd.cumulative_from(idx));
  }
  quad::EvalResult res = quad::pv_limit(seq);
  res.rows = f.rows;
  res.cols = f.cols;
  res.diag.panels = (int)pd.sums.size();
  res.diag.integrand_evals = pd.evals;

  if (support <= 0.0 && decays) {
    // numeric radial tail: u is gone past Rg, second difference -> 2 u(x)
    const auto& gl = detail::gauss_legendre(16);
    double tail = 0.0, last = 0.0;
    double a = Rg;
    for (int p = 0; p < 40; ++p) {
      double b = 2.0 * a;
      double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
      last = 0.0;
      for (size_t i = 0; i < gl.x.size(); ++i) {
        double r = cm + hm * gl.x[i];
        last += hm * gl.w[i] * rho_eq(r) * std::pow(r, d - 3.0);
      }
      tail += last;
      a = b;
      if (std::abs(last) < 1e-16 * (std::abs(tail) + 1e-300)) break;
    }
    for (int c = 0; c < nf; ++c) res.value[c] += ux[c] * om * tail;
    res.err_estimate += std::abs(last) * om * std::max(std::abs(ux[0]), 1.0);
  }
  return res;
}

namespace {

struct InnerPlan {
  Op op;
  int rows, cols, off, nc;
};

struct ComposeSums {
  int P_out = 0;
  double eps_min = 0.0;
  double R_out = 0.0;
  std::vector<double> sched;
  std::vector<std::pair<int, int>> shapes;       // outer shape per pair
  std::vector<std::vector<std::vector<double>>> S;  // [variant][pair][P*nc]
  long evals = 0;
};

// Zeroth moment int f dx, used by the far-field tail model.
std::vector<double> field_moment(const fields::Field& f) {
  const double reach = field_reach(f);
  const int nf = f.ncomp();
  quad::Integrand g = [&](const double* z, double* out) { f.eval(z, out); };
  auto pd = quad::panel_integrate(g, f.d, nf, 12, 24, reach * 1e-10, reach);
  return pd.cumulative_from(0);
}

// Outer tail r > R of a composition: beyond the sampled region the inner
// operator is dominated by its monopole far field
//   I(y) ~ -(rho(|y|)/|y|) T_inner(yhat, m),   m = int f,
// and the constant I(x) part integrates to zero by antipodal symmetry. The
// remaining integral involves only the kernel and geometry, so it is summed
// here without any field evaluations.
void far_tail_correction(const std::vector<std::pair<Op, Op>>& pairs,
                         const std::vector<std::pair<int, int>>& shapes,
                         const kernels::KernelSpec& k, const fields::Field& f,
                         const double* x, const quad::QuadratureSpec& spec,
                         double R, std::vector<quad::EvalResult>& out) {
  const int d = k.d;
  auto m = field_moment(f);
  const auto& gl = detail::gauss_legendre(std::max(spec.radial_order, 8));
  const auto& ang = quad::sphere_rule(d, std::max(spec.angular_order, 8));
  std::vector<std::vector<double>> tail(pairs.size());
  for (size_t pr = 0; pr < pairs.size(); ++pr)
    tail[pr].assign((size_t)shapes[pr].first * shapes[pr].second, 0.0);
  double last_mag = 0.0;
  double a = R;
  for (int p = 0; p < 40; ++p) {
    const double b = 2.0 * a;
    const double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
    double panel_mag = 0.0;
    double z[3], y[3], e[3], yh[3], iff[kMaxComp];
    for (size_t i = 0; i < gl.x.size(); ++i) {
      const double r = cm + hm * gl.x[i];
      const double rho_o = kernels::eval(k, r);
      if (rho_o == 0.0) continue;
      const double w1 = hm * gl.w[i] * std::pow(r, d - 1) * rho_o / r;
      for (int j = 0; j < ang.n; ++j) {
        for (int c = 0; c < d; ++c) {
          e[c] = ang.dirs[j * d + c];
          z[c] = r * e[c];
          y[c] = x[c] + z[c];
        }
        const double ry = norm2(y, d);
        const double rho_i = kernels::eval(k, ry);
        if (rho_i == 0.0) continue;
        for (int c = 0; c < d; ++c) yh[c] = y[c] / ry;
        const double w = w1 * ang.wts[j];
        for (size_t pr = 0; pr < pairs.size(); ++pr) {
          auto ish = op_shape(pairs[pr].second, f.rows, f.cols, d);
          std::memset(iff, 0, sizeof(double) * (size_t)ish.first * ish.second);
          accumulate_op(pairs[pr].second, d, f.rows, f.cols, yh, -rho_i / ry,
                        m.data(), iff);
          accumulate_op(pairs[pr].first, d, ish.first, ish.second, e, w, iff,
                        tail[pr].data());
          for (int c = 0; c < ish.first * ish.second; ++c)
            panel_mag = std::max(panel_mag, std::abs(w * iff[c]));
        }
      }
    }
    last_mag = panel_mag;
    a = b;
    if (panel_mag < 1e-18) break;
  }
  const double reach = field_reach(f);
  const double xn = norm2(x, d);
  for (size_t pr = 0; pr < pairs.size(); ++pr) {
    double tmag = 0.0;
    for (size_t c = 0; c < tail[pr].size(); ++c) {
      out[pr].value[c] += tail[pr][c];
      tmag = std::max(tmag, std::abs(tail[pr][c]));
    }
    // the monopole model is accurate to O((reach + |x|) / R)
    out[pr].err_estimate += tmag * (reach + xn) / R + last_mag;
  }
}

// Shared nested sweep. inner_starts lists the requested inner truncation
// panel indices (radius eps_min * 2^j); every outer node's field samples feed
// all inner operators and all variants at once.
ComposeSums compose_core(const std::vector<std::pair<Op, Op>>& pairs,
                         const kernels::KernelSpec& k, const fields::Field& f,
                         const double* x, const quad::QuadratureSpec& spec,
                         const std::vector<int>& inner_starts) {
  const int d = k.d;
  if (f.d != d) throw std::invalid_argument("compose: dimension mismatch");
  const int nf = f.ncomp();
  if (nf > kMaxComp / 2)
    throw std::invalid_argument("compose: field shape too large");

  std::vector<InnerPlan> plans;
  std::vector<int> pair_plan(pairs.size());
  int NC_in = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    int found = -1;
    for (size_t j = 0; j < plans.size(); ++j)
      if (plans[j].op == pairs[i].second) found = (int)j;
    if (found < 0) {
      auto sh = op_shape(pairs[i].second, f.rows, f.cols, d);
      plans.push_back({pairs[i].second, sh.first, sh.second, NC_in,
                       sh.first * sh.second});
      NC_in += plans.back().nc;
      found = (int)plans.size() - 1;
    }
    pair_plan[i] = found;
  }
  if (NC_in > kMaxComp) throw std::invalid_argument("compose: too many comps");

  ComposeSums cs;
  cs.sched = spec.eps_schedule();
  cs.eps_min = cs.sched.back();
  const double eps_min = cs.eps_min;

  const double reach = field_reach(f);
  const double xn = norm2(x, d);
  const bool compact = compact_kernel(k);
  double R_out_t;
  if (compact)
    R_out_t = k.delta;
  else if (spec.tail_radius > 0.0)
    R_out_t = spec.tail_radius;
  else
    // the far-tail model absorbs what is left beyond R_out; its multipole
    // error shrinks like 1/R_out, so go wider where panels are cheap
    R_out_t = std::max(4.0 * spec.eps0,
                       (d == 1 ? 16.0 : 4.0) * (xn + reach));
  const double R_out =
      quad::round_up_pow2(eps_min, std::max(R_out_t, 2.0 * spec.eps0));
  const int P_out = (int)std::llround(std::log2(R_out / eps_min));
  cs.P_out = P_out;
  cs.R_out = R_out;

  const int V = (int)inner_starts.size();
  cs.shapes.resize(pairs.size());
  cs.S.assign(V, std::vector<std::vector<double>>(pairs.size()));
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& pl = plans[pair_plan[i]];
    cs.shapes[i] = op_shape(pairs[i].first, pl.rows, pl.cols, d);
    for (int v = 0; v < V; ++v)
      cs.S[v][i].assign((size_t)P_out * cs.shapes[i].first * cs.shapes[i].second,
                        0.0);
  }

  const auto& gl = detail::gauss_legendre(std::max(spec.radial_order, 2));
  const auto& ang = quad::sphere_rule(d, spec.angular_order);
  const int nr = (int)gl.x.size();
  const double R_in_cap =
      compact ? k.delta : std::numeric_limits<double>::infinity();

  // Compact kernels are discontinuous at r = delta; a Gauss panel straddling
  // the jump converges slowly, so the dyadic panel containing delta is split
  // there. The break radius is the same for every center, which keeps the
  // node set absolute and preserves the pairwise cancellation.
  const double brk = compact ? k.delta : 0.0;
  auto panel_segments = [brk](double a0, double b0, double* segs) {
    segs[0] = a0;
    if (brk > a0 * (1.0 + 1e-12) && brk < b0 * (1.0 - 1e-12)) {
      segs[1] = brk;
      segs[2] = b0;
      return 2;
    }
    segs[1] = b0;
    return 1;
  };

  long evals = 0;

  // All inner-operator values at position y, truncated at each requested
  // start radius: fills out_lv[v * NC_in + c].
  auto inner_values = [&](const double* y, double* out_lv, long& ev) {
    const double yn = norm2(y, d);
    const double r_need = std::min(R_in_cap, yn + reach);
    int P_in = 0;
    if (r_need > eps_min)
      P_in = (int)std::ceil(std::log2(r_need / eps_min) - 1e-12);
    std::vector<double> sums((size_t)std::max(P_in, 1) * NC_in, 0.0);
    double uy[kMaxComp], ub[kMaxComp], dv[kMaxComp], z[3], e[3];
    f.eval(y, uy);
    for (int p = 0; p < P_in; ++p) {
      const double a0 = eps_min * std::pow(2.0, p), b0 = 2.0 * a0;
      double segs[3];
      const int nseg = panel_segments(a0, b0, segs);
      double* srow = &sums[(size_t)p * NC_in];
      for (int sg = 0; sg < nseg; ++sg) {
      const double a = segs[sg], b = segs[sg + 1];
      const double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
      for (int i = 0; i < nr; ++i) {
        const double r = cm + hm * gl.x[i];
        const double rho = kernels::eval(k, r);
        if (rho == 0.0) continue;
        const double w1 = hm * gl.w[i] * std::pow(r, d - 1) * rho / r;
        for (int j = 0; j < ang.n; ++j) {
          for (int c = 0; c < d; ++c) {
            e[c] = ang.dirs[j * d + c];
            z[c] = y[c] + r * e[c];
          }
          f.eval(z, ub);
          ++ev;
          for (int c = 0; c < nf; ++c) dv[c] = ub[c] - uy[c];
          const double w = w1 * ang.wts[j];
          for (const auto& pl : plans)
            accumulate_op(pl.op, d, f.rows, f.cols, e, w, dv, srow + pl.off);
        }
      }
      }
    }
    for (int v = 0; v < V; ++v) {
      double* out = out_lv + (size_t)v * NC_in;
      std::memset(out, 0, sizeof(double) * NC_in);
      for (int p = inner_starts[v]; p < P_in; ++p)
        for (int c = 0; c < NC_in; ++c) out[c] += sums[(size_t)p * NC_in + c];
    }
  };

  std::vector<double> Ix((size_t)V * NC_in, 0.0);
  inner_values(x, Ix.data(), evals);

  const int nthreads = quad::max_threads();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads) \
    reduction(+ : evals)
#endif
  for (int p = 0; p < P_out; ++p) {
    const double a0 = eps_min * std::pow(2.0, p), b0 = 2.0 * a0;
    double segs[3];
    const int nseg = panel_segments(a0, b0, segs);
    std::vector<double> Iy((size_t)V * NC_in);
    double y[3], e[3], dv[kMaxComp];
    long ev = 0;
    for (int sg = 0; sg < nseg; ++sg) {
    const double a = segs[sg], b = segs[sg + 1];
    const double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
    for (int i = 0; i < nr; ++i) {
      const double r = cm + hm * gl.x[i];
      const double rho = kernels::eval(k, r);
      if (rho == 0.0) continue;
      const double w1 = hm * gl.w[i] * std::pow(r, d - 1) * rho / r;
      for (int j = 0; j < ang.n; ++j) {
        for (int c = 0; c < d; ++c) {
          e[c] = ang.dirs[j * d + c];
          y[c] = x[c] + r * e[c];
        }
        inner_values(y, Iy.data(), ev);
        const double w = w1 * ang.wts[j];
        for (int v = 0; v < V; ++v) {
          for (size_t pr = 0; pr < pairs.size(); ++pr) {
            const auto& pl = plans[pair_plan[pr]];
            const size_t base = (size_t)v * NC_in + pl.off;
            for (int c = 0; c < pl.nc; ++c)
              dv[c] = Iy[base + c] - Ix[base + c];
            const int nc_out = cs.shapes[pr].first * cs.shapes[pr].second;
            accumulate_op(pairs[pr].first, d, pl.rows, pl.cols, e, w, dv,
                          &cs.S[v][pr][(size_t)p * nc_out]);
          }
        }
      }
    }
    }
    evals += ev;
  }
  (void)nthreads;
  cs.evals = evals;
  return cs;
}

}  // namespace

std::vector<quad::EvalResult> compose_batch(
    const std::vector<std::pair<Op, Op>>& pairs, const kernels::KernelSpec& k,
    const fields::Field& f, const double* x, const quad::QuadratureSpec& spec) {
  const int L = spec.eps_levels;
  std::vector<int> starts(L);
  for (int kk = 0; kk < L; ++kk) starts[kk] = L - 1 - kk;
  auto cs = compose_core(pairs, k, f, x, spec, starts);

  // known eps-expansion exponents of the diagonal truncation for the
  // s-bearing families; the characteristic kernel converges fast enough for
  // the generic transform
  std::vector<double> powers;
  if (k.family != kernels::Family::Characteristic) {
    const double s = k.s;
    for (double p : {1.0 - s, 2.0 - 2.0 * s, 2.0, 3.0 - s, 4.0 - 2.0 * s})
      powers.push_back(p);
    std::sort(powers.begin(), powers.end());
    if ((int)powers.size() > L - 2) powers.resize(L - 2);
  }

  std::vector<quad::EvalResult> out(pairs.size());
  for (size_t pr = 0; pr < pairs.size(); ++pr) {
    const int nc = cs.shapes[pr].first * cs.shapes[pr].second;
    std::vector<std::pair<double, std::vector<double>>> seq;
    for (int kk = 0; kk < L; ++kk) {
      std::vector<double> val(nc, 0.0);
      for (int p = L - 1 - kk; p < cs.P_out; ++p)
        for (int c = 0; c < nc; ++c)
          val[c] += cs.S[kk][pr][(size_t)p * nc + c];
      seq.emplace_back(cs.sched[kk], std::move(val));
    }
    out[pr] = powers.empty() ? quad::pv_limit(seq)
                             : quad::pv_limit_powers(seq, powers);
    out[pr].rows = cs.shapes[pr].first;
    out[pr].cols = cs.shapes[pr].second;
    out[pr].diag.panels = cs.P_out;
    out[pr].diag.integrand_evals = cs.evals;
    // outermost shell of the finest level indicates the neglected outer tail;
    // a compact kernel ends exactly at delta, so it has none
    if (!compact_kernel(k)) {
      double tl = 0.0;
      for (int c = 0; c < nc; ++c)
        tl = std::max(
            tl, std::abs(cs.S[L - 1][pr][(size_t)(cs.P_out - 1) * nc + c]));
      out[pr].err_estimate += tl;
    }
  }
  if (!compact_kernel(k))
    far_tail_correction(pairs, cs.shapes, k, f, x, spec, cs.R_out, out);
  return out;
}

quad::EvalResult compose(Op outer, Op inner, const kernels::KernelSpec& k,
                         const fields::Field& f, const double* x,
                         const quad::QuadratureSpec& spec) {
  return compose_batch({{outer, inner}}, k, f, x, spec)[0];
}

quad::EvalResult compose_fixed(Op outer, Op inner, const kernels::KernelSpec& k,
                               const fields::Field& f, const double* x,
                               const quad::QuadratureSpec& spec,
                               double eps_outer, double eps_inner) {
  const double eps_min = spec.eps_schedule().back();
  auto grid_index = [&](double e) {
    const double j = std::log2(e / eps_min);
    const int ji = (int)std::llround(j);
    if (ji < 0 || std::abs(j - ji) > 1e-9)
      throw std::invalid_argument("compose_fixed: eps off the panel grid");
    return ji;
  };
  const int j_in = grid_index(eps_inner);
  const int j_out = grid_index(eps_outer);
  auto cs = compose_core({{outer, inner}}, k, f, x, spec, {j_in});
  if (j_out >= cs.P_out)
    throw std::invalid_argument("compose_fixed: eps_outer beyond range");
  const int nc = cs.shapes[0].first * cs.shapes[0].second;
  quad::EvalResult res;
  res.value.assign(nc, 0.0);
  res.rows = cs.shapes[0].first;
  res.cols = cs.shapes[0].second;
  for (int p = j_out; p < cs.P_out; ++p)
    for (int c = 0; c < nc; ++c) res.value[c] += cs.S[0][0][(size_t)p * nc + c];
  res.diag.panels = cs.P_out;
  res.diag.integrand_evals = cs.evals;
  double tl = 0.0;
  for (int c = 0; c < nc; ++c)
    tl = std::max(tl,
                  std::abs(cs.S[0][0][(size_t)(cs.P_out - 1) * nc + c]));
  res.err_estimate = tl;
  return res;
}

}  // namespace nlvc::operators
