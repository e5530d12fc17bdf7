#include "nlvc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>

#include "nlvc/equivalence.hpp"
#include "nlvc/operators.hpp"

namespace nlvc::verify {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Radical-inverse (Halton) sequence for deterministic quasi-random points.
double halton(long i, int base) {
  double f = 1.0, r = 0.0;
  for (long n = i; n > 0; n /= base) {
    f /= base;
    r += f * (n % base);
  }
  return r;
}

double effective_radius(const fields::Field& f) {
  if (std::isfinite(f.support_radius) && f.support_radius > 0)
    return f.support_radius;
  return 3.0;  // Schwartz-class desk fields are concentrated near the origin
}

struct LhsRhs {
  std::vector<double> lhs, rhs;
  // For identities whose exact value is zero, the magnitude of a nonzero
  // composition of the same operators at the same point; the residual is
  // judged relative to this instead of the (vanishing) |lhs| + |rhs|.
  double ref_scale = 0.0;
};

LhsRhs eval_identity(Identity id, const kernels::KernelSpec& k,
                     const fields::Field& f, const double* x,
                     const quad::QuadratureSpec& spec,
                     const std::function<double(double)>& rho_eq,
                     double rho_support,
                     const std::vector<double>& rho_singular) {
  namespace op = nlvc::operators;
  LhsRhs out;
  switch (id) {
    case Identity::CurlGradZero: {
      // D o G rides along for free in the shared sweep and supplies the
      // magnitude a non-cancelling composition of the same operand has here.
      auto r = op::compose_batch(
          {{op::Op::Curl, op::Op::Grad}, {op::Op::Div, op::Op::Grad}}, k, f, x,
          spec);
      out.lhs = r[0].value;
      out.rhs.assign(r[0].value.size(), 0.0);
      out.ref_scale = max_abs(r[1].value);
      break;
    }
    case Identity::DivCurlZero: {
      auto r = op::compose_batch(
          {{op::Op::Div, op::Op::Curl}, {op::Op::Curl, op::Op::Curl}}, k, f, x,
          spec);
      out.lhs = r[0].value;
      out.rhs.assign(r[0].value.size(), 0.0);
      out.ref_scale = max_abs(r[1].value);
      break;
    }
    case Identity::CurlCurl: {
      auto r = op::compose_batch({{op::Op::Curl, op::Op::Curl},
                                  {op::Op::Grad, op::Op::Div},
                                  {op::Op::Div, op::Op::Grad}},
                                 k, f, x, spec);
      out.lhs = r[0].value;
      out.rhs = r[1].value;
      for (size_t i = 0; i < out.rhs.size(); ++i)
        out.rhs[i] -= r[2].value[i];
      break;
    }
    case Identity::DivGradEqLaplacian: {
      auto dg = op::compose(op::Op::Div, op::Op::Grad, k, f, x, spec);
      out.lhs.resize(dg.value.size());
      for (size_t i = 0; i < dg.value.size(); ++i) out.lhs[i] = -dg.value[i];
      out.rhs = op::eq_laplacian(rho_eq, rho_support, f, x, spec,
                                 rho_singular)
                    .value;
      break;
    }
    case Identity::FracLaplacianMatch: {
      auto dg = op::compose(op::Op::Div, op::Op::Grad, k, f, x, spec);
      out.lhs.resize(dg.value.size());
      for (size_t i = 0; i < dg.value.size(); ++i) out.lhs[i] = -dg.value[i];
      out.rhs = op::frac_laplacian(k.s, f, x, spec).value;
      break;
    }
  }
  return out;
}

}  // namespace

std::string to_string(Identity id) {
  switch (id) {
    case Identity::CurlGradZero: return "curl_grad_zero";
    case Identity::DivCurlZero: return "div_curl_zero";
    case Identity::CurlCurl: return "curl_curl";
    case Identity::DivGradEqLaplacian: return "div_grad_eq_laplacian";
    case Identity::FracLaplacianMatch: return "frac_laplacian_match";
  }
  return "?";
}

Identity parse_identity(const std::string& name) {
  for (Identity id : {Identity::CurlGradZero, Identity::DivCurlZero,
                      Identity::CurlCurl, Identity::DivGradEqLaplacian,
                      Identity::FracLaplacianMatch})
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown identity: " + name);
}

double default_tolerance(Identity id) {
  return id == Identity::CurlCurl ? 5e-4 : 1e-4;
}

ResidualReport run_identity(Identity id, const kernels::KernelSpec& k,
                            const fields::Field& f,
                            const std::vector<std::vector<double>>& points,
                            const quad::QuadratureSpec& spec,
                            double tolerance) {
  const int d = k.d;
  if (d != f.d)
    throw std::invalid_argument("run_identity: kernel/field dimension clash");
  const bool is_curl = id == Identity::CurlGradZero ||
                       id == Identity::DivCurlZero || id == Identity::CurlCurl;
  if (is_curl && d != 3)
    throw std::invalid_argument("run_identity: curl identities need d = 3");
  if (id == Identity::CurlGradZero && f.ncomp() != 1)
    throw std::invalid_argument("run_identity: curl_grad_zero needs a scalar");
  if ((id == Identity::DivCurlZero || id == Identity::CurlCurl) &&
      !(f.rows == 3 && f.cols == 1))
    throw std::invalid_argument("run_identity: identity needs a 3-vector");
  if (id == Identity::FracLaplacianMatch &&
      k.family != kernels::Family::Fractional)
    throw std::invalid_argument(
        "run_identity: frac_laplacian_match needs the fractional kernel");

  // Equivalence-kernel closure for div_grad_eq_laplacian: closed form where
  // available, otherwise the PV-extrapolated numeric kernel with a per-radius
  // cache (the generic-kernel limit is surfaced as a runtime diagnostic by
  // the numeric evaluator if it fails to converge).
  std::function<double(double)> rho_eq;
  double rho_support = 0.0;
  std::vector<double> rho_singular;
  if (id == Identity::DivGradEqLaplacian) {
    const bool compact = k.family == kernels::Family::TruncatedFractional ||
                         k.family == kernels::Family::Characteristic;
    if (compact) {
      rho_support = 2.0 * k.delta;
      rho_singular = {k.delta};
    }
    if (equivalence::has_closed_form(k)) {
      rho_eq = [k](double r) { return equivalence::rho_eq_closed(k, r); };
    } else {
      auto cache = std::make_shared<std::map<double, double>>();
      quad::QuadratureSpec espec;
      espec.eps_levels = 8;
      espec.radial_order = 12;
      espec.angular_order = spec.angular_order;
      rho_eq = [k, espec, cache](double r) {
        auto it = cache->find(r);
        if (it != cache->end()) return it->second;
        const double v = equivalence::rho_eq_numeric(k, r, espec).value[0];
        (*cache)[r] = v;
        return v;
      };
    }
  }

  ResidualReport rep;
  rep.identity = id;
  rep.kernel = kernels::to_string(k);
  rep.tolerance_used = tolerance > 0 ? tolerance : default_tolerance(id);
  for (const auto& x : points) {
    if ((int)x.size() != d)
      throw std::invalid_argument("run_identity: point dimension clash");
    LhsRhs v = eval_identity(id, k, f, x.data(), spec, rho_eq, rho_support,
                             rho_singular);
    PointResidual pr;
    pr.x = x;
    pr.scale = v.ref_scale;
    for (size_t i = 0; i < v.lhs.size(); ++i) {
      pr.residual = std::max(pr.residual, std::abs(v.lhs[i] - v.rhs[i]));
      pr.scale =
          std::max(pr.scale, std::abs(v.lhs[i]) + std::abs(v.rhs[i]));
    }
    rep.residual_norm = std::max(rep.residual_norm, pr.residual);
    rep.scale = std::max(rep.scale, pr.scale);
    rep.points.push_back(std::move(pr));
  }
  rep.pass = rep.residual_norm <=
             rep.tolerance_used * std::max(rep.scale, 1e-8);
  return rep;
}

std::vector<std::vector<double>> default_points(const fields::Field& f, int n,
                                                unsigned seed) {
  const int d = f.d;
  const double R = effective_radius(f);
  static const int bases[3] = {2, 3, 5};
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j)
      x[j] = 0.8 * R * (2.0 * halton(i + 1 + (long)seed * 1000, bases[j]) -
                        1.0);
    pts.push_back(std::move(x));
  }
  // two points outside the effective support
  std::vector<double> a(d, 0.0), b(d, 0.0);
  a[0] = 1.2 * R;
  b[d - 1] = -1.5 * R;
  pts.push_back(a);
  pts.push_back(b);
  return pts;
}

DecayFit decay_fit(const kernels::KernelSpec& k, const fields::Field& f,
                   const std::vector<double>& direction,
                   const std::vector<double>& radii,
                   const quad::QuadratureSpec& spec) {
  namespace op = nlvc::operators;
  const int d = k.d;
  if ((int)direction.size() != d)
    throw std::invalid_argument("decay_fit: direction dimension clash");
  double dn = 0;
  for (double c : direction) dn += c * c;
  dn = std::sqrt(dn);
  if (dn == 0) throw std::invalid_argument("decay_fit: zero direction");

  const op::Op which =
      (f.rows == d && f.cols == 1 && d > 1) ? op::Op::Div : op::Op::Grad;
  DecayFit fit;
  for (double r : radii) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = r * direction[j] / dn;
    auto v = op::nl_apply(which, k, f, x.data(), spec);
    const double m = max_abs(v.value);
    if (m <= 1e-14) continue;  // beneath the floor: exact/underflowed zeros
    fit.radii.push_back(r);
    fit.values.push_back(m);
  }
  if (fit.radii.size() < 3) {
    fit.underflow = true;
    return fit;
  }
  auto lsq = [&](bool logx, double& slope, double& icept, double& dev) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = (int)fit.radii.size();
    for (int i = 0; i < n; ++i) {
      const double lx = logx ? std::log(fit.radii[i]) : fit.radii[i];
      const double ly = std::log(fit.values[i]);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    icept = (sy - slope * sx) / n;
    dev = 0;
    for (int i = 0; i < n; ++i) {
      const double lx = logx ? std::log(fit.radii[i]) : fit.radii[i];
      dev = std::max(dev, std::abs(std::log(fit.values[i]) -
                                   (icept + slope * lx)));
    }
  };
  double ic = 0;
  lsq(true, fit.slope, fit.intercept, fit.loglog_dev);
  lsq(false, fit.semilog_slope, ic, fit.semilog_dev);
  return fit;
}

HolderReport holder_mapping_check(double s, const fields::Field& f,
                                  double beta, long budget,
                                  const quad::QuadratureSpec& spec) {
  namespace op = nlvc::operators;
  if (!(s > 0 && s < 1))
    throw std::domain_error("holder_mapping_check: s outside (0,1)");
  if (!(beta > s && beta < 1))
    throw std::domain_error(
        "holder_mapping_check: beta must lie strictly in (s, 1)");
  const int d = f.d;
  const long n_full = std::max<long>(
      8, (long)std::ceil(0.5 * (1.0 + std::sqrt(1.0 + 8.0 * (double)budget))));

  std::mt19937 rng(20240811u);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::vector<std::vector<double>> xs(n_full, std::vector<double>(d));
  for (auto& x : xs)
    for (double& c : x) c = uni(rng);

  auto k = kernels::make_fractional(d, s);
  std::vector<std::vector<double>> g(n_full);
  std::vector<double> fv(n_full);
  for (long i = 0; i < n_full; ++i) {
    g[i] = op::nl_gradient(k, f, xs[i].data(), spec).value;
    std::vector<double> buf(f.ncomp());
    f.eval(xs[i].data(), buf.data());
    fv[i] = max_abs(buf);
  }

  auto ratio_at = [&](long n) {
    double semi = 0, fsemi = 0, fsup = 0;
    for (long i = 0; i < n; ++i) {
      fsup = std::max(fsup, std::abs(fv[i]));
      for (long j = 0; j < i; ++j) {
        double dist2 = 0;
        for (int c = 0; c < d; ++c) {
          const double t = xs[i][c] - xs[j][c];
          dist2 += t * t;
        }
        const double dist = std::sqrt(dist2);
        if (dist < 1e-12) continue;
        double gd = 0;
        for (size_t c = 0; c < g[i].size(); ++c)
          gd = std::max(gd, std::abs(g[i][c] - g[j][c]));
        semi = std::max(semi, gd / std::pow(dist, beta - s));
        fsemi = std::max(fsemi, std::abs(fv[i] - fv[j]) / std::pow(dist, beta));
      }
    }
    const double den = fsup + fsemi;
    return std::pair<double, double>(semi, den);
  };

  HolderReport rep;
  auto [semi, den] = ratio_at(n_full);
  rep.seminorm = semi;
  rep.field_norm = den;
  rep.ratio = den > 0 ? semi / den : 0.0;
  const long n_half = std::max<long>(8, (long)(n_full / std::sqrt(2.0)));
  auto [semi_h, den_h] = ratio_at(n_half);
  rep.ratio_half = den_h > 0 ? semi_h / den_h : 0.0;
  rep.pass = std::isfinite(rep.ratio) &&
             std::abs(rep.ratio - rep.ratio_half) <=
                 0.2 * rep.ratio + 1e-12;
  return rep;
}

}  // namespace nlvc::verify
