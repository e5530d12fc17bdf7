#include "nlvc/quad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlvc/detail/gauss.hpp"
#include "nlvc/specfun.hpp"

namespace nlvc::quad {

std::vector<double> QuadratureSpec::eps_schedule() const {
  std::vector<double> e(eps_levels);
  for (int k = 0; k < eps_levels; ++k) e[k] = eps0 * std::pow(0.5, k);
  return e;
}

double EvalResult::norm_max() const {
  double m = 0.0;
  for (double v : value) m = std::max(m, std::abs(v));
  return m;
}

int max_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("NLVC_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

const SphereRule& sphere_rule(int d, int angular_order) {
  static std::map<std::pair<int, int>, SphereRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(d, angular_order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  SphereRule r;
  r.d = d;
  if (d == 1) {
    r.n = 2;
    r.dirs = {1.0, -1.0};
    r.wts = {1.0, 1.0};
  } else if (d == 2) {
    int n = 2 * std::max(angular_order, 2);
    r.n = n;
    r.dirs.resize(2 * n);
    r.wts.assign(n, 2.0 * M_PI / n);
    for (int j = 0; j < n; ++j) {
      double th = 2.0 * M_PI * j / n;
      r.dirs[2 * j] = std::cos(th);
      r.dirs[2 * j + 1] = std::sin(th);
    }
  } else if (d == 3) {
    int nc = std::max(angular_order, 2);
    int np = 2 * nc;
    const auto& gl = detail::gauss_legendre(nc);
    r.n = nc * np;
    r.dirs.resize(3 * r.n);
    r.wts.resize(r.n);
    int idx = 0;
    for (int i = 0; i < nc; ++i) {
      double c = gl.x[i];
      double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int j = 0; j < np; ++j) {
        double ph = 2.0 * M_PI * j / np;
        r.dirs[3 * idx] = sn * std::cos(ph);
        r.dirs[3 * idx + 1] = sn * std::sin(ph);
        r.dirs[3 * idx + 2] = c;
        r.wts[idx] = gl.w[i] * (2.0 * M_PI / np);
        ++idx;
      }
    }
  } else {
    throw std::invalid_argument("sphere_rule: d must be 1, 2, or 3");
  }
  return cache.emplace(key, std::move(r)).first->second;
}

double round_up_pow2(double rmin, double rmax) {
  int m = (int)std::ceil(std::log2(rmax / rmin) - 1e-12);
  return rmin * std::pow(2.0, std::max(m, 0));
}

std::vector<double> PanelDecomposition::cumulative_from(int i0) const {
  std::vector<double> total(sums.empty() ? 0 : sums[0].size(), 0.0);
  for (size_t p = (size_t)std::max(i0, 0); p < sums.size(); ++p)
    for (size_t c = 0; c < total.size(); ++c) total[c] += sums[p][c];
  return total;
}

PanelDecomposition panel_integrate(const Integrand& g, int d, int ncomp,
                                   int radial_order, int angular_order,
                                   double rmin, double rmax, bool parallel) {
  if (!(rmin > 0.0 && rmax > rmin))
    throw std::invalid_argument("panel_integrate: need 0 < rmin < rmax");
  std::vector<double> radii{rmin};
  while (radii.back() < rmax * (1.0 - 1e-12)) {
    radii.push_back(std::min(2.0 * radii.back(), rmax));
  }
  return panel_integrate_radii(g, d, ncomp, radial_order, angular_order, radii,
                               parallel);
}

std::vector<double> graded_radii(double a, double b,
                                 const std::vector<double>& singular,
                                 int levels) {
  if (!(a > 0.0 && b > a))
    throw std::invalid_argument("graded_radii: need 0 < a < b");
  std::vector<double> r{a, b};
  double cur = a;
  while (cur * 2.0 < b) {
    cur *= 2.0;
    r.push_back(cur);
  }
  for (double sp : singular) {
    if (!(sp > a && sp < b)) continue;
    double h = std::min(sp - a, b - sp);
    for (int j = 0; j <= levels; ++j) {
      double off = h * std::pow(0.5, j);
      if (sp - off > a) r.push_back(sp - off);
      if (sp + off < b) r.push_back(sp + off);
    }
  }
  std::sort(r.begin(), r.end());
  std::vector<double> out;
  for (double v : r) {
    if (out.empty() || v > out.back() * (1.0 + 1e-13)) out.push_back(v);
  }
  out.back() = b;
  return out;
}

PanelDecomposition panel_integrate_radii(const Integrand& g, int d, int ncomp,
                                         int radial_order, int angular_order,
                                         const std::vector<double>& radii,
                                         bool parallel) {
  if (radii.size() < 2 || radii.front() <= 0.0)
    throw std::invalid_argument("panel_integrate_radii: bad radii");
  PanelDecomposition pd;
  pd.radii = radii;
  const int P = (int)pd.radii.size() - 1;
  pd.sums.assign(P, std::vector<double>(ncomp, 0.0));

  const auto& gl = detail::gauss_legendre(std::max(radial_order, 2));
  const auto& ang = sphere_rule(d, angular_order);
  pd.evals = (long)P * gl.x.size() * ang.n;

  bool bad = false;
  double bad_pt[3] = {0, 0, 0};

  int nthreads = parallel ? max_threads() : 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads)
#endif
  for (int p = 0; p < P; ++p) {
    const double a = pd.radii[p], b = pd.radii[p + 1];
    const double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
    std::vector<double> acc(ncomp, 0.0), tmp(ncomp);
    double z[3];
    for (size_t i = 0; i < gl.x.size(); ++i) {
      const double r = cm + hm * gl.x[i];
      const double wr = hm * gl.w[i] * std::pow(r, d - 1);
      for (int jn = 0; jn < ang.n; ++jn) {
        for (int c = 0; c < d; ++c) z[c] = r * ang.dirs[jn * d + c];
        g(z, tmp.data());
        const double w = wr * ang.wts[jn];
        for (int c = 0; c < ncomp; ++c) {
          if (!std::isfinite(tmp[c])) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
              bad = true;
              for (int q = 0; q < d; ++q) bad_pt[q] = z[q];
            }
          }
          acc[c] += w * tmp[c];
        }
      }
    }
    pd.sums[p] = std::move(acc);
  }
  (void)nthreads;
  if (bad) {
    std::ostringstream msg;
    msg << "integrand returned non-finite value at (";
    for (int q = 0; q < d; ++q) msg << (q ? ", " : "") << bad_pt[q];
    msg << ")";
    throw std::runtime_error(msg.str());
  }
  return pd;
}

namespace {

EvalResult shell_impl(const Integrand& g, int d, int ncomp, double eps,
                      double R, const QuadratureSpec& spec, bool parallel) {
  auto pd = panel_integrate(g, d, ncomp, spec.radial_order, spec.angular_order,
                            eps, R, parallel);
  auto coarse =
      panel_integrate(g, d, ncomp, std::max(spec.radial_order / 2, 2),
                      std::max(spec.angular_order / 2, 2), eps, R, parallel);
  EvalResult res;
  res.value = pd.cumulative_from(0);
  res.rows = ncomp;
  res.cols = 1;
  auto cv = coarse.cumulative_from(0);
  double err = 0.0;
  for (int c = 0; c < ncomp; ++c)
    err = std::max(err, std::abs(res.value[c] - cv[c]));
  res.err_estimate = err;
  res.diag.panels = (int)pd.sums.size();
  res.diag.integrand_evals = pd.evals + coarse.evals;
  return res;
}

}  // namespace

EvalResult integrate_shell(const Integrand& g, int d, int ncomp, double eps,
                           double R, const QuadratureSpec& spec) {
  return shell_impl(g, d, ncomp, eps, R, spec, true);
}

EvalResult integrate_shell_serial(const Integrand& g, int d, int ncomp,
                                  double eps, double R,
                                  const QuadratureSpec& spec) {
  return shell_impl(g, d, ncomp, eps, R, spec, false);
}

EvalResult pv_limit(
    const std::vector<std::pair<double, std::vector<double>>>& values_at_eps) {
  const int L = (int)values_at_eps.size();
  if (L < 3) throw std::invalid_argument("pv_limit: need >= 3 schedule points");
  const int ncomp = (int)values_at_eps[0].second.size();
  std::vector<double> eps(L);
  for (int k = 0; k < L; ++k) eps[k] = values_at_eps[k].first;

  EvalResult res;
  res.value.assign(ncomp, 0.0);
  res.rows = ncomp;
  res.cols = 1;
  std::vector<double> vals(L);
  for (int c = 0; c < ncomp; ++c) {
    for (int k = 0; k < L; ++k) vals[k] = values_at_eps[k].second[c];
    double err = 0.0;
    try {
      res.value[c] =
          specfun::extrapolate_to_zero(eps.data(), vals.data(), L, &err);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "pv_limit: eps-sequence not converging (increments growing)");
    }
    res.err_estimate = std::max(res.err_estimate, err);
  }
  for (int k = 0; k < L; ++k) {
    double m = 0.0;
    for (double v : values_at_eps[k].second) m = std::max(m, std::abs(v));
    res.diag.extrapolation.emplace_back(eps[k], m);
  }
  return res;
}

namespace {

// Solve the (m+1)x(m+1) system [1, eps^{p_1}, ..., eps^{p_m}] c = v for the
// constant term, using the window of samples starting at i0. Columns are
// scaled by their largest entry before Gaussian elimination.
double fit_const_term(const std::vector<double>& eps,
                      const std::vector<double>& v, int i0,
                      const std::vector<double>& powers) {
  const int m = (int)powers.size();
  const int n = m + 1;
  std::vector<double> A((size_t)n * n), b(v.begin() + i0, v.begin() + i0 + n);
  std::vector<double> scale(n, 1.0);
  for (int j = 1; j < n; ++j) {
    double mx = 0.0;
    for (int i = 0; i < n; ++i)
      mx = std::max(mx, std::pow(eps[i0 + i], powers[j - 1]));
    scale[j] = mx;
  }
  for (int i = 0; i < n; ++i) {
    A[(size_t)i * n] = 1.0;
    for (int j = 1; j < n; ++j)
      A[(size_t)i * n + j] = std::pow(eps[i0 + i], powers[j - 1]) / scale[j];
  }
  // partial-pivot elimination
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[(size_t)r * n + col]) >
          std::abs(A[(size_t)piv * n + col]))
        piv = r;
    if (piv != col) {
      for (int j = 0; j < n; ++j)
        std::swap(A[(size_t)col * n + j], A[(size_t)piv * n + j]);
      std::swap(b[col], b[piv]);
    }
    double p = A[(size_t)col * n + col];
    if (std::abs(p) < 1e-300)
      throw std::runtime_error("pv_limit_powers: singular exponent system");
    for (int r = col + 1; r < n; ++r) {
      double f = A[(size_t)r * n + col] / p;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) A[(size_t)r * n + j] -= f * A[(size_t)col * n + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> c(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= A[(size_t)r * n + j] * c[j];
    c[r] = s / A[(size_t)r * n + r];
  }
  return c[0];
}

}  // namespace

EvalResult pv_limit_powers(
    const std::vector<std::pair<double, std::vector<double>>>& values_at_eps,
    const std::vector<double>& powers) {
  const int L = (int)values_at_eps.size();
  const int m = (int)powers.size();
  if (L < m + 2)
    throw std::invalid_argument("pv_limit_powers: need >= powers+2 samples");
  const int ncomp = (int)values_at_eps[0].second.size();
  std::vector<double> eps(L), vals(L);
  for (int k = 0; k < L; ++k) eps[k] = values_at_eps[k].first;

  EvalResult res;
  res.value.assign(ncomp, 0.0);
  res.rows = ncomp;
  res.cols = 1;
  for (int c = 0; c < ncomp; ++c) {
    for (int k = 0; k < L; ++k) vals[k] = values_at_eps[k].second[c];
    const double v1 = fit_const_term(eps, vals, L - m - 1, powers);
    const double v0 = fit_const_term(eps, vals, L - m - 2, powers);
    res.value[c] = v1;
    res.err_estimate = std::max(res.err_estimate, std::abs(v1 - v0));
  }
  for (int k = 0; k < L; ++k) {
    double mx = 0.0;
    for (double v : values_at_eps[k].second) mx = std::max(mx, std::abs(v));
    res.diag.extrapolation.emplace_back(eps[k], mx);
  }
  return res;
}

EvalResult pv_integrate(const Integrand& g, int d, int ncomp,
                        const QuadratureSpec& spec, double outer_R,
                        double tail_err, bool estimate_quad_err) {
  const auto sched = spec.eps_schedule();
  const double eps_min = sched.back();
  const double R = round_up_pow2(eps_min, std::max(outer_R, 2.0 * spec.eps0));
  auto pd = panel_integrate(g, d, ncomp, spec.radial_order, spec.angular_order,
                            eps_min, R);
  const int L = (int)sched.size();
  // schedule point k has eps = eps_min * 2^{L-1-k} = pd.radii[L-1-k]
  std::vector<std::pair<double, std::vector<double>>> seq;
  seq.reserve(L);
  for (int k = 0; k < L; ++k)
    seq.emplace_back(sched[k], pd.cumulative_from(L - 1 - k));
  EvalResult res = pv_limit(seq);
  res.diag.panels = (int)pd.sums.size();
  res.diag.integrand_evals = pd.evals;
  double qerr = 0.0;
  if (estimate_quad_err) {
    auto coarse =
        panel_integrate(g, d, ncomp, std::max(spec.radial_order / 2, 2),
                        std::max(spec.angular_order / 2, 2), eps_min, R);
    auto t1 = pd.cumulative_from(0);
    auto t2 = coarse.cumulative_from(0);
    for (int c = 0; c < ncomp; ++c)
      qerr = std::max(qerr, std::abs(t1[c] - t2[c]));
    res.diag.integrand_evals += coarse.evals;
  }
  res.err_estimate += qerr + tail_err;
  return res;
}

double tail_bound(const kernels::KernelSpec& k, const fields::Field& f,
                  double R) {
  if (!(R > 1.0)) throw std::invalid_argument("tail_bound: requires R > 1");
  return 2.0 * f.sup_norm * kernels::tail_integral(k, R);
}

}  // namespace nlvc::quad
