#include "nlvc/kernels.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nlvc/detail/gauss.hpp"
#include "nlvc/specfun.hpp"

namespace nlvc::kernels {

namespace {

// int_a^inf exp(-alpha t) t^{-p} dt for a > 0, p >= 0; geometric panels out
// to where the exponential has died.
double exp_power_tail(double alpha, double p, double a) {
  double total = 0.0;
  double lo = a;
  const double end = a + 60.0 / alpha;
  while (lo < end) {
    double hi = std::min(lo * 1.5 + 1e-30, end);
    if (hi - lo < 1e-14 * lo) break;
    total += detail::gl_integrate(
        [&](double t) { return std::exp(-alpha * t) * std::pow(t, -p); }, lo,
        hi, 32);
    lo = hi;
  }
  return total;
}

// int_0^r exp(-alpha t) t^{-s} dt, s in (0,1): substitute u = t^{1-s} to
// remove the endpoint singularity.
double exp_power_ball(double alpha, double s, double r) {
  const double q = 1.0 - s;
  return detail::gl_integrate(
             [&](double u) { return std::exp(-alpha * std::pow(u, 1.0 / q)); },
             0.0, std::pow(r, q), 64) /
         q;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

KernelSpec make_fractional(int d, double s) {
  require(d >= 1 && s > 0.0 && s < 1.0, "fractional kernel: need d>=1, s in (0,1)");
  return {Family::Fractional, d, s, 0.0, 0.0};
}

KernelSpec make_truncated(int d, double s, double delta) {
  require(d >= 1 && s > 0.0 && s < 1.0 && delta > 0.0,
          "truncated kernel: need d>=1, s in (0,1), delta>0");
  return {Family::TruncatedFractional, d, s, delta, 0.0};
}

KernelSpec make_tempered(int d, double s, double alpha) {
  require(d >= 1 && s > 0.0 && s < 1.0 && alpha > 0.0,
          "tempered kernel: need d>=1, s in (0,1), alpha>0");
  return {Family::TemperedFractional, d, s, 0.0, alpha};
}

KernelSpec make_characteristic(int d, double delta) {
  require(d >= 1 && delta > 0.0, "characteristic kernel: need d>=1, delta>0");
  return {Family::Characteristic, d, 0.0, delta, 0.0};
}

double omega_dm1(int d) {
  return 2.0 * std::pow(M_PI, d / 2.0) / specfun::gamma(d / 2.0);
}

double eval(const KernelSpec& k, double r) {
  if (r <= 0.0) throw std::domain_error("kernel eval: requires r > 0");
  switch (k.family) {
    case Family::Fractional:
      return specfun::c_ds(k.d, k.s) * std::pow(r, -(k.d + k.s - 1.0));
    case Family::TruncatedFractional:
      if (r > k.delta) return 0.0;
      return specfun::c_ds(k.d, k.s) * std::pow(r, -(k.d + k.s - 1.0));
    case Family::TemperedFractional:
      return std::exp(-k.alpha * r) * std::pow(r, -(k.d + k.s - 1.0));
    case Family::Characteristic:
      if (r > k.delta) return 0.0;
      return k.d / (omega_dm1(k.d) * std::pow(k.delta, k.d));
  }
  throw std::logic_error("unreachable");
}

double psi(const KernelSpec& k, double r) {
  if (r <= 0.0) throw std::domain_error("psi: requires r > 0");
  const double p = k.d + k.s - 1.0;  // power-law exponent of the families
  switch (k.family) {
    case Family::Fractional:
      return specfun::c_ds(k.d, k.s) * std::pow(r, -p) / p;
    case Family::TruncatedFractional:
      if (r >= k.delta) return 0.0;
      return specfun::c_ds(k.d, k.s) *
             (std::pow(r, -p) - std::pow(k.delta, -p)) / p;
    case Family::TemperedFractional:
      return exp_power_tail(k.alpha, k.d + k.s, r);
    case Family::Characteristic:
      if (r >= k.delta) return 0.0;
      return k.d / (omega_dm1(k.d) * std::pow(k.delta, k.d)) *
             std::log(k.delta / r);
  }
  throw std::logic_error("unreachable");
}

double tail_integral(const KernelSpec& k, double R) {
  if (R <= 0.0) throw std::domain_error("tail_integral: requires R > 0");
  const double om = omega_dm1(k.d);
  switch (k.family) {
    case Family::Fractional:
      // omega * c_{d,s} * int_R^inf r^{-s-1} dr
      return om * specfun::c_ds(k.d, k.s) * std::pow(R, -k.s) / k.s;
    case Family::TruncatedFractional:
      if (R >= k.delta) return 0.0;
      return om * specfun::c_ds(k.d, k.s) *
             (std::pow(R, -k.s) - std::pow(k.delta, -k.s)) / k.s;
    case Family::TemperedFractional:
      return om * exp_power_tail(k.alpha, k.s + 1.0, R);
    case Family::Characteristic: {
      if (R >= k.delta) return 0.0;
      const double rho0 = k.d / (om * std::pow(k.delta, k.d));
      if (k.d == 1) return om * rho0 * std::log(k.delta / R);
      return om * rho0 *
             (std::pow(k.delta, k.d - 1.0) - std::pow(R, k.d - 1.0)) /
             (k.d - 1.0);
    }
  }
  throw std::logic_error("unreachable");
}

double ball_integral(const KernelSpec& k, double r) {
  if (r <= 0.0) return 0.0;
  const double om = omega_dm1(k.d);
  switch (k.family) {
    case Family::Fractional:
      return om * specfun::c_ds(k.d, k.s) * std::pow(r, 1.0 - k.s) /
             (1.0 - k.s);
    case Family::TruncatedFractional: {
      const double m = std::min(r, k.delta);
      return om * specfun::c_ds(k.d, k.s) * std::pow(m, 1.0 - k.s) /
             (1.0 - k.s);
    }
    case Family::TemperedFractional:
      return om * exp_power_ball(k.alpha, k.s, r);
    case Family::Characteristic:
      return std::pow(std::min(r, k.delta) / k.delta, (double)k.d);
  }
  throw std::logic_error("unreachable");
}

AssumptionFlags assumption_flags(const KernelSpec& k) {
  switch (k.family) {
    case Family::Fractional:
      return {true, false, true};
    case Family::TruncatedFractional:
      return {true, false, false};
    case Family::TemperedFractional:
      return {true, false, true};
    case Family::Characteristic:
      return {true, true, true};
  }
  throw std::logic_error("unreachable");
}

KernelSpec parse_kernel(const std::string& tokens) {
  std::istringstream in(tokens);
  std::map<std::string, std::string> kv;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    require(eq != std::string::npos, "kernel spec: expected key=value, got '" + tok + "'");
    std::string key = tok.substr(0, eq);
    require(!kv.count(key), "kernel spec: duplicate key '" + key + "'");
    kv[key] = tok.substr(eq + 1);
  }
  require(kv.count("family"), "kernel spec: missing family=");
  const std::string fam = kv["family"];
  kv.erase("family");

  auto take = [&](const char* key) {
    require(kv.count(key) > 0, std::string("kernel spec: missing ") + key + "=");
    double v = std::stod(kv[key]);
    kv.erase(key);
    return v;
  };
  auto done = [&] {
    require(kv.empty(), "kernel spec: unknown key '" +
                            (kv.empty() ? "" : kv.begin()->first) + "'");
  };

  KernelSpec k;
  if (fam == "fractional") {
    double s = take("s");
    int d = (int)take("d");
    done();
    k = make_fractional(d, s);
  } else if (fam == "truncated") {
    double s = take("s");
    double delta = take("delta");
    int d = (int)take("d");
    done();
    k = make_truncated(d, s, delta);
  } else if (fam == "tempered") {
    double s = take("s");
    double alpha = take("alpha");
    int d = (int)take("d");
    done();
    k = make_tempered(d, s, alpha);
  } else if (fam == "characteristic") {
    double delta = take("delta");
    int d = (int)take("d");
    done();
    k = make_characteristic(d, delta);
  } else {
    throw std::invalid_argument("kernel spec: unknown family '" + fam + "'");
  }
  return k;
}

std::string to_string(const KernelSpec& k) {
  std::ostringstream out;
  switch (k.family) {
    case Family::Fractional:
      out << "family=fractional s=" << k.s << " d=" << k.d;
      break;
    case Family::TruncatedFractional:
      out << "family=truncated s=" << k.s << " delta=" << k.delta
          << " d=" << k.d;
      break;
    case Family::TemperedFractional:
      out << "family=tempered s=" << k.s << " alpha=" << k.alpha
          << " d=" << k.d;
      break;
    case Family::Characteristic:
      out << "family=characteristic delta=" << k.delta << " d=" << k.d;
      break;
  }
  return out.str();
}

}  // namespace nlvc::kernels
