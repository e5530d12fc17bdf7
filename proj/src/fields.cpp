#include "nlvc/fields.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nlvc::fields {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double sqnorm(const double* x, int d) {
  double q = 0.0;
  for (int i = 0; i < d; ++i) q += x[i] * x[i];
  return q;
}

}  // namespace

Field make_gaussian(int d, int rows, const std::vector<double>& center,
                    double width) {
  require(width > 0.0, "make_gaussian: width must be positive");
  require((int)center.size() == d, "make_gaussian: center size != d");
  Field f;
  f.d = d;
  f.rows = rows;
  f.cols = 1;
  f.support_radius = INFINITY;
  f.smoothness = Smoothness::Schwartz;
  f.sup_norm = 1.0;
  const double w2 = width * width;
  auto val = [d, center, w2](const double* x) {
    double q = 0.0;
    for (int i = 0; i < d; ++i) {
      double t = x[i] - center[i];
      q += t * t;
    }
    return std::exp(-q / (2.0 * w2));
  };
  f.eval = [rows, val](const double* x, double* out) {
    double g = val(x);
    for (int r = 0; r < rows; ++r) out[r] = g;
  };
  f.classical_grad = [d, rows, center, w2, val](const double* x, double* out) {
    double g = val(x);
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < d; ++i)
        out[r * d + i] = -(x[i] - center[i]) / w2 * g;
  };
  f.classical_laplacian = [d, rows, center, w2, val](const double* x,
                                                     double* out) {
    double q = 0.0;
    for (int i = 0; i < d; ++i) {
      double t = x[i] - center[i];
      q += t * t;
    }
    double g = val(x);
    double lap = (q / (w2 * w2) - d / w2) * g;
    for (int r = 0; r < rows; ++r) out[r] = lap;
  };
  return f;
}

Field make_bump(int d, int rows, double R) {
  require(R > 0.0, "make_bump: R must be positive");
  Field f;
  f.d = d;
  f.rows = rows;
  f.cols = 1;
  f.support_radius = R;
  f.smoothness = Smoothness::C2Bounded;  // in fact C-infinity
  f.sup_norm = 1.0;
  const double R2 = R * R;
  auto val = [d, R2](const double* x) {
    double t = sqnorm(x, d) / R2;
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t));
  };
  f.eval = [rows, val](const double* x, double* out) {
    double b = val(x);
    for (int r = 0; r < rows; ++r) out[r] = b;
  };
  f.classical_grad = [d, rows, R2, val](const double* x, double* out) {
    double t = sqnorm(x, d) / R2;
    double b = val(x);
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < d; ++i) {
        double g = 0.0;
        if (t < 1.0 && b > 0.0) {
          double one = 1.0 - t;
          g = -2.0 * x[i] / (R2 * one * one) * b;
        }
        out[r * d + i] = g;
      }
  };
  f.classical_laplacian = [d, rows, R2, val](const double* x, double* out) {
    double t = sqnorm(x, d) / R2;
    double b = val(x);
    double lap = 0.0;
    if (t < 1.0 && b > 0.0) {
      double one = 1.0 - t;
      lap = b * (4.0 * t / (R2 * one * one * one * one) -
                 8.0 * t / (R2 * one * one * one) -
                 2.0 * d / (R2 * one * one));
    }
    for (int r = 0; r < rows; ++r) out[r] = lap;
  };
  return f;
}

Field make_kink(double beta, double R) {
  require(beta > 0.0 && beta < 1.0, "make_kink: beta in (0,1)");
  Field b = make_bump(1, 1, R);
  Field f;
  f.d = 1;
  f.rows = 1;
  f.cols = 1;
  f.support_radius = R;
  f.smoothness = Smoothness::HolderBeta;
  f.holder_beta = beta;
  f.sup_norm = std::pow(R, beta);
  f.eval = [b, beta](const double* x, double* out) {
    double v;
    b.eval(x, &v);
    out[0] = v * std::pow(std::abs(x[0]), beta);
  };
  return f;
}

Field make_constant(int d, int rows, double value) {
  Field f;
  f.d = d;
  f.rows = rows;
  f.cols = 1;
  f.support_radius = INFINITY;
  f.smoothness = Smoothness::C2Bounded;
  f.sup_norm = std::abs(value);
  f.eval = [rows, value](const double*, double* out) {
    for (int r = 0; r < rows; ++r) out[r] = value;
  };
  f.classical_grad = [d, rows](const double*, double* out) {
    for (int i = 0; i < rows * d; ++i) out[i] = 0.0;
  };
  f.classical_laplacian = [rows](const double*, double* out) {
    for (int r = 0; r < rows; ++r) out[r] = 0.0;
  };
  return f;
}

Field translate(const Field& f, const std::vector<double>& t) {
  require((int)t.size() == f.d, "translate: shift size != d");
  Field g = f;
  double tn = std::sqrt(sqnorm(t.data(), f.d));
  if (std::isfinite(f.support_radius)) g.support_radius = f.support_radius + tn;
  auto shift = [t, d = f.d](const double* x, double* y) {
    for (int i = 0; i < d; ++i) y[i] = x[i] - t[i];
  };
  g.eval = [e = f.eval, shift](const double* x, double* out) {
    double y[3];
    shift(x, y);
    e(y, out);
  };
  if (f.classical_grad)
    g.classical_grad = [e = f.classical_grad, shift](const double* x,
                                                     double* out) {
      double y[3];
      shift(x, y);
      e(y, out);
    };
  if (f.classical_laplacian)
    g.classical_laplacian = [e = f.classical_laplacian, shift](const double* x,
                                                               double* out) {
      double y[3];
      shift(x, y);
      e(y, out);
    };
  return g;
}

Field axpby(double a, const Field& f, double b, const Field& g) {
  require(f.d == g.d && f.rows == g.rows && f.cols == g.cols,
          "axpby: shape mismatch");
  Field h = f;
  h.support_radius = std::max(f.support_radius, g.support_radius);
  h.sup_norm = std::abs(a) * f.sup_norm + std::abs(b) * g.sup_norm;
  const int n = f.ncomp();
  h.eval = [a, b, ef = f.eval, eg = g.eval, n](const double* x, double* out) {
    double u[9], v[9];
    ef(x, u);
    eg(x, v);
    for (int i = 0; i < n; ++i) out[i] = a * u[i] + b * v[i];
  };
  auto combine = [a, b](auto ef, auto eg, int m) {
    return [a, b, ef, eg, m](const double* x, double* out) {
      double u[27], v[27];
      ef(x, u);
      eg(x, v);
      for (int i = 0; i < m; ++i) out[i] = a * u[i] + b * v[i];
    };
  };
  if (f.classical_grad && g.classical_grad)
    h.classical_grad = combine(f.classical_grad, g.classical_grad, n * f.d);
  else
    h.classical_grad = nullptr;
  if (f.classical_laplacian && g.classical_laplacian)
    h.classical_laplacian =
        combine(f.classical_laplacian, g.classical_laplacian, n);
  else
    h.classical_laplacian = nullptr;
  return h;
}

Field stack(const std::vector<Field>& parts) {
  require(!parts.empty(), "stack: empty");
  const int d = parts[0].d;
  for (const auto& p : parts)
    require(p.d == d && p.rows == 1 && p.cols == 1,
            "stack: expects scalar parts of equal dimension");
  Field f;
  f.d = d;
  f.rows = (int)parts.size();
  f.cols = 1;
  f.support_radius = 0.0;
  f.sup_norm = 0.0;
  f.smoothness = parts[0].smoothness;
  for (const auto& p : parts) {
    f.support_radius = std::max(f.support_radius, p.support_radius);
    f.sup_norm = std::max(f.sup_norm, p.sup_norm);
  }
  f.eval = [parts](const double* x, double* out) {
    for (size_t r = 0; r < parts.size(); ++r) parts[r].eval(x, &out[r]);
  };
  bool grads = true, laps = true;
  for (const auto& p : parts) {
    grads = grads && (bool)p.classical_grad;
    laps = laps && (bool)p.classical_laplacian;
  }
  if (grads)
    f.classical_grad = [parts, d](const double* x, double* out) {
      for (size_t r = 0; r < parts.size(); ++r)
        parts[r].classical_grad(x, &out[r * d]);
    };
  if (laps)
    f.classical_laplacian = [parts](const double* x, double* out) {
      for (size_t r = 0; r < parts.size(); ++r)
        parts[r].classical_laplacian(x, &out[r]);
    };
  return f;
}

double seminorm_estimate(const Field& f, int order, double alpha, long budget,
                         unsigned seed) {
  require(alpha > 0.0 && alpha < 1.0, "seminorm_estimate: alpha in (0,1)");
  require(order == 0 || order == 1, "seminorm_estimate: order 0 or 1");
  const int d = f.d, n = f.ncomp();
  const double L =
      std::isfinite(f.support_radius) ? 1.2 * f.support_radius : 5.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-L, L);
  std::uniform_real_distribution<double> ulog(std::log(1e-4), std::log(2.0 * L));
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto value = [&](const double* x, double* out) {
    if (order == 0) {
      f.eval(x, out);
    } else if (f.classical_grad) {
      f.classical_grad(x, out);
    } else {
      // central finite differences, step 1e-5
      double xp[3], v1[9], v2[9];
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) xp[j] = x[j];
        xp[i] += 1e-5;
        f.eval(xp, v1);
        xp[i] -= 2e-5;
        f.eval(xp, v2);
        for (int r = 0; r < n; ++r) out[r * d + i] = (v1[r] - v2[r]) / 2e-5;
      }
    }
  };
  const int m = (order == 0) ? n : n * d;

  double best = 0.0;
  for (long it = 0; it < budget; ++it) {
    double x[3], y[3], dir[3];
    for (int i = 0; i < d; ++i) x[i] = ux(rng);
    double nn = 0.0;
    for (int i = 0; i < d; ++i) {
      dir[i] = gauss(rng);
      nn += dir[i] * dir[i];
    }
    nn = std::sqrt(nn) + 1e-300;
    double h = std::exp(ulog(rng));
    for (int i = 0; i < d; ++i) y[i] = x[i] + h * dir[i] / nn;
    double vx[27], vy[27];
    value(x, vx);
    value(y, vy);
    double diff = 0.0;
    for (int i = 0; i < m; ++i) diff += (vx[i] - vy[i]) * (vx[i] - vy[i]);
    diff = std::sqrt(diff);
    best = std::max(best, diff / std::pow(h, alpha));
  }
  return best;
}

Field parse_field(const std::string& tokens, int d) {
  std::istringstream in(tokens);
  std::map<std::string, std::string> kv;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    require(eq != std::string::npos,
            "field spec: expected key=value, got '" + tok + "'");
    std::string key = tok.substr(0, eq);
    require(!kv.count(key), "field spec: duplicate key '" + key + "'");
    kv[key] = tok.substr(eq + 1);
  }
  require(kv.count("field"), "field spec: missing field=");
  std::string name = kv["field"];
  kv.erase("field");
  std::string shape = "scalar";
  if (kv.count("shape")) {
    shape = kv["shape"];
    kv.erase("shape");
  }
  require(shape == "scalar" || shape == "vector3",
          "field spec: shape must be scalar or vector3");
  if (shape == "vector3")
    require(d == 3, "field spec: shape=vector3 requires d=3");

  auto take = [&](const char* key) {
    require(kv.count(key) > 0, std::string("field spec: missing ") + key + "=");
    double v = std::stod(kv[key]);
    kv.erase(key);
    return v;
  };

  Field f;
  if (name == "gaussian") {
    double w = take("w");
    if (shape == "scalar") {
      f = make_gaussian(d, 1, std::vector<double>(d, 0.0), w);
    } else {
      // distinct component centers keep the vector field generic
      std::vector<Field> comps;
      for (int i = 0; i < 3; ++i) {
        std::vector<double> c(3, 0.0);
        c[i] = 0.3 * w;
        comps.push_back(make_gaussian(3, 1, c, w));
      }
      f = stack(comps);
    }
  } else if (name == "bump") {
    double R = take("R");
    if (shape == "scalar") {
      f = make_bump(d, 1, R);
    } else {
      std::vector<Field> comps;
      for (int i = 0; i < 3; ++i) {
        std::vector<double> t(3, 0.0);
        t[i] = 0.2 * R;
        comps.push_back(translate(make_bump(3, 1, R), t));
      }
      f = stack(comps);
    }
  } else {
    throw std::invalid_argument("field spec: unknown field '" + name + "'");
  }
  require(kv.empty(), "field spec: unknown key '" +
                          (kv.empty() ? "" : kv.begin()->first) + "'");
  return f;
}

}  // namespace nlvc::fields
