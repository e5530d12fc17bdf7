// Command-line front end: evaluates nonlocal operators, tabulates
// equivalence kernels, runs identity/analysis certifications, and performs
// the fractional Helmholtz decomposition. Outputs are deterministic for a
// fixed configuration and seed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlvc/equivalence.hpp"
#include "nlvc/fields.hpp"
#include "nlvc/helmholtz.hpp"
#include "nlvc/kernels.hpp"
#include "nlvc/operators.hpp"
#include "nlvc/quad.hpp"
#include "nlvc/specfun.hpp"
#include "nlvc/verify.hpp"

using nlohmann::json;
namespace kn = nlvc::kernels;
namespace fd = nlvc::fields;
namespace qd = nlvc::quad;
namespace op = nlvc::operators;
namespace eq = nlvc::equivalence;
namespace vf = nlvc::verify;
namespace hh = nlvc::helmholtz;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  qd::QuadratureSpec spec;
  std::string out;  // empty = stdout
  long seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--eps0", c.spec.eps0, "largest PV exclusion radius");
  cmd->add_option("--eps-levels", c.spec.eps_levels,
                  "number of epsilon-schedule levels");
  cmd->add_option("--radial-order", c.spec.radial_order,
                  "Gauss points per radial panel");
  cmd->add_option("--angular-order", c.spec.angular_order,
                  "angular rule order");
  cmd->add_option("--tail-R", c.spec.tail_radius, "outer integration cutoff");
  cmd->add_option("--rel-tol", c.spec.rel_tol, "reporting tolerance");
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--seed", c.seed, "seed for quasi-random point sets");
}

// Writes text to c.out or stdout.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + c.out);
  f << text;
  if (!f.good()) throw std::runtime_error("write failed: " + c.out);
}

// "a:b:step" (inclusive of b up to rounding) or a single value.
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> vals;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    vals.push_back(std::stod(text));
    return vals;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw std::invalid_argument("range must be a:b:step, got " + text);
  const double a = std::stod(text.substr(0, c1));
  const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(text.substr(c2 + 1));
  if (!(step > 0.0) || b < a)
    throw std::invalid_argument("range needs b >= a and step > 0: " + text);
  for (double v = a; v <= b + 1e-12 * step; v += step) vals.push_back(v);
  return vals;
}

std::vector<double> parse_point(const std::string& text, int d) {
  std::vector<double> x;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) x.push_back(std::stod(tok));
  if ((int)x.size() != d)
    throw std::invalid_argument("point '" + text + "' is not " +
                                std::to_string(d) + "-dimensional");
  return x;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json config_json(const Common& c) {
  return json{{"eps0", c.spec.eps0},
              {"eps_levels", c.spec.eps_levels},
              {"radial_order", c.spec.radial_order},
              {"angular_order", c.spec.angular_order},
              {"tail_radius", c.spec.tail_radius},
              {"rel_tol", c.spec.rel_tol},
              {"seed", c.seed}};
}

// ---------------------------------------------------------------- specfun
int run_specfun_selftest(const Common& c) {
  namespace sf = nlvc::specfun;
  struct Check {
    std::string name;
    double observed, tolerance;
  };
  std::vector<Check> checks;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
  };

  // Gamma identities on a fixed grid
  double worst_rec = 0, worst_dup = 0, worst_ref = 0;
  for (double x = 0.1; x < 10.0; x += 0.17) {
    worst_rec = std::max(worst_rec,
                         rel(sf::gamma(x + 1.0), x * sf::gamma(x)));
    const double dup = std::pow(2.0, 2.0 * x - 1.0) / std::sqrt(M_PI) *
                       sf::gamma(x) * sf::gamma(x + 0.5);
    worst_dup = std::max(worst_dup, rel(sf::gamma(2.0 * x), dup));
  }
  for (double x = 0.05; x < 1.0; x += 0.06)
    worst_ref = std::max(
        worst_ref, rel(sf::gamma(x) * sf::gamma(1.0 - x),
                       M_PI / std::sin(M_PI * x)));
  checks.push_back({"gamma_recurrence", worst_rec, 1e-11});
  checks.push_back({"gamma_duplication", worst_dup, 1e-11});
  checks.push_back({"gamma_reflection", worst_ref, 1e-11});

  // 2F1(-1/2, 3/2; 1/2; z) = (1 - 2z) / (1 - z)^{1/2}
  double worst_f = 0;
  for (double z = -5.0; z <= 0.99 + 1e-12; z += 0.01) {
    const double lhs = sf::hyp2f1(-0.5, 1.5, 0.5, z);
    const double rhs = (1.0 - 2.0 * z) / std::sqrt(1.0 - z);
    if (std::abs(rhs) < 1e-10)  // closed form vanishes at z = 1/2
      worst_f = std::max(worst_f, std::abs(lhs - rhs));
    else
      worst_f = std::max(worst_f, rel(lhs, rhs));
  }
  checks.push_back({"hyp2f1_closed_form", worst_f, 1e-10});

  checks.push_back({"kappa_half_limit", std::abs(sf::kappa_s_numeric(0.5)),
                    1e-8});
  checks.push_back({"g_half_limit_at_infinity",
                    rel(sf::g_s_limit_at_infinity(0.5), 8.0), 1e-6});
  for (double s : {0.25, 0.5, 0.75})
    checks.push_back({"g_s_limit_at_one_s" + fmt(s),
                      rel(sf::g_s_limit_at_one(s), 2.0 / s), 1e-4});

  json rep;
  rep["version"] = kVersion;
  rep["subcommand"] = "specfun-selftest";
  rep["config"] = config_json(c);
  bool all = true;
  for (const auto& ch : checks) {
    const bool pass = ch.observed <= ch.tolerance;
    all = all && pass;
    rep["checks"].push_back({{"name", ch.name},
                             {"observed", ch.observed},
                             {"tolerance", ch.tolerance},
                             {"pass", pass}});
  }
  rep["pass"] = all;
  emit(c, rep.dump(2) + "\n");
  return all ? 0 : 2;
}

// ---------------------------------------------------------------- eval-op
int run_eval_op(const Common& c, const std::string& kernel_s,
                const std::string& field_s, const std::string& op_s,
                const std::vector<std::string>& points_s,
                const std::string& points_file) {
  auto k = kn::parse_kernel(kernel_s);
  auto f = fd::parse_field(field_s, k.d);
  op::Op which;
  if (op_s == "grad") which = op::Op::Grad;
  else if (op_s == "div") which = op::Op::Div;
  else if (op_s == "curl") which = op::Op::Curl;
  else throw std::invalid_argument("unknown operator: " + op_s);

  std::vector<std::vector<double>> pts;
  for (const auto& p : points_s) pts.push_back(parse_point(p, k.d));
  if (!points_file.empty()) {
    std::ifstream in(points_file);
    if (!in) throw std::runtime_error("cannot open " + points_file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      pts.push_back(parse_point(line, k.d));
    }
  }
  if (pts.empty()) throw std::invalid_argument("no evaluation points given");

  std::ostringstream csv;
  csv << "# nlvc " << kVersion << " eval-op op=" << op_s << " kernel=\""
      << kn::to_string(k) << "\" field=\"" << field_s << "\"\n";
  for (int j = 0; j < k.d; ++j) csv << "x" << (j + 1) << ",";
  auto shape = op::op_shape(which, f.rows, f.cols, k.d);
  for (int j = 0; j < shape.first * shape.second; ++j) csv << "v" << (j + 1) << ",";
  csv << "err\n";
  for (const auto& x : pts) {
    auto r = op::nl_apply(which, k, f, x.data(), c.spec);
    for (double xi : x) csv << fmt(xi) << ",";
    for (double v : r.value) csv << fmt(v) << ",";
    csv << fmt(r.err_estimate) << "\n";
  }
  emit(c, csv.str());
  return 0;
}

// ---------------------------------------------------------------- eqkernel
int run_eqkernel(const Common& c, const std::string& kernel_s,
                 const std::string& etas_s) {
  auto k = kn::parse_kernel(kernel_s);
  auto etas = parse_range(etas_s);
  auto rows = eq::tabulate(k, etas, c.spec);
  std::ostringstream csv;
  csv << "# nlvc " << kVersion << " eqkernel kernel=\"" << kn::to_string(k)
      << "\"\n";
  csv << "eta,numeric,numeric_err,closed,rel_err\n";
  for (const auto& r : rows) {
    csv << fmt(r.eta) << "," << fmt(r.numeric) << "," << fmt(r.numeric_err)
        << ",";
    if (r.has_closed)
      csv << fmt(r.closed) << "," << fmt(r.rel_err);
    else
      csv << ",";
    csv << "\n";
  }
  emit(c, csv.str());
  return 0;
}

// Identities act on a fixed operand shape (scalar or 3-vector). When the
// given field has the wrong shape, use its first component for scalar
// identities; a scalar field cannot stand in for a vector one.
fd::Field adapt_operand(const fd::Field& f, vf::Identity id) {
  const bool needs_scalar = id == vf::Identity::CurlGradZero ||
                            id == vf::Identity::DivGradEqLaplacian ||
                            id == vf::Identity::FracLaplacianMatch;
  if (!needs_scalar || f.ncomp() == 1) return f;
  fd::Field g = f;
  g.rows = 1;
  g.cols = 1;
  auto base = f.eval;
  const int nc = f.ncomp();
  g.eval = [base, nc](const double* x, double* out) {
    std::vector<double> buf(nc);
    base(x, buf.data());
    out[0] = buf[0];
  };
  g.classical_grad = nullptr;
  g.classical_laplacian = nullptr;
  return g;
}

// -------------------------------------------------------------- identities
int run_identities(const Common& c, const std::string& kernel_s,
                   const std::string& field_s,
                   std::vector<std::string> which, int npoints, double tol) {
  auto k = kn::parse_kernel(kernel_s);
  auto f = fd::parse_field(field_s, k.d);
  if (which.empty() || (which.size() == 1 && which[0] == "all")) {
    which.clear();
    for (auto id : {vf::Identity::CurlGradZero, vf::Identity::DivCurlZero,
                    vf::Identity::CurlCurl, vf::Identity::DivGradEqLaplacian,
                    vf::Identity::FracLaplacianMatch})
      which.push_back(vf::to_string(id));
  }
  auto pts = vf::default_points(f, npoints, (unsigned)c.seed + 1);

  json rep;
  rep["version"] = kVersion;
  rep["subcommand"] = "identities";
  rep["config"] = config_json(c);
  rep["kernel"] = kn::to_string(k);
  rep["field"] = field_s;
  bool all = true;
  for (const auto& name : which) {
    const auto id = vf::parse_identity(name);
    auto r = vf::run_identity(id, k, adapt_operand(f, id), pts, c.spec, tol);
    json jr;
    jr["identity"] = name;
    jr["kernel"] = r.kernel;
    jr["field"] = field_s;
    for (const auto& p : r.points)
      jr["points"].push_back(
          {{"x", p.x}, {"residual", p.residual}, {"scale", p.scale}});
    jr["residual_norm"] = r.residual_norm;
    jr["scale"] = r.scale;
    jr["tolerance"] = r.tolerance_used;
    jr["pass"] = r.pass;
    all = all && r.pass;
    rep["reports"].push_back(jr);
  }
  rep["pass"] = all;
  emit(c, rep.dump(2) + "\n");
  return all ? 0 : 2;
}

// ---------------------------------------------------------------- analysis
int run_analysis_decay(const Common& c, const std::string& kernel_s,
                       const std::string& field_s, const std::string& dir_s,
                       const std::string& radii_s) {
  auto k = kn::parse_kernel(kernel_s);
  auto f = fd::parse_field(field_s, k.d);
  auto dir = parse_point(dir_s, k.d);
  auto radii = parse_range(radii_s);
  auto fit = vf::decay_fit(k, f, dir, radii, c.spec);
  json rep;
  rep["version"] = kVersion;
  rep["subcommand"] = "analysis";
  rep["mode"] = "decay";
  rep["config"] = config_json(c);
  rep["kernel"] = kn::to_string(k);
  rep["field"] = field_s;
  rep["radii"] = fit.radii;
  rep["values"] = fit.values;
  rep["slope"] = fit.slope;
  rep["intercept"] = fit.intercept;
  rep["loglog_dev"] = fit.loglog_dev;
  rep["semilog_slope"] = fit.semilog_slope;
  rep["semilog_dev"] = fit.semilog_dev;
  rep["underflow"] = fit.underflow;
  emit(c, rep.dump(2) + "\n");
  return 0;
}

int run_analysis_holder(const Common& c, double s, double beta,
                        const std::string& field_s, int d, long budget) {
  auto f = fd::parse_field(field_s, d);
  auto r = vf::holder_mapping_check(s, f, beta, budget, c.spec);
  json rep;
  rep["version"] = kVersion;
  rep["subcommand"] = "analysis";
  rep["mode"] = "holder";
  rep["config"] = config_json(c);
  rep["s"] = s;
  rep["beta"] = beta;
  rep["field"] = field_s;
  rep["seminorm"] = r.seminorm;
  rep["field_norm"] = r.field_norm;
  rep["ratio"] = r.ratio;
  rep["ratio_half"] = r.ratio_half;
  rep["pass"] = r.pass;
  emit(c, rep.dump(2) + "\n");
  return r.pass ? 0 : 2;
}

// --------------------------------------------------------------- helmholtz
int run_helmholtz(const Common& c, double s, double R, int n,
                  const std::string& field_s, int check_points,
                  bool potentials, double budget, const std::string& csv_out) {
  auto u = fd::parse_field(field_s, 3);
  hh::DecomposeOptions opt;
  opt.n = n;
  opt.check_points = check_points;
  opt.seed = (unsigned)c.seed + 1;
  opt.grid_potentials = potentials;
  opt.resolution_budget = budget;
  auto res = hh::decompose(s, u, R, opt, c.spec);

  if (!csv_out.empty()) {
    std::ofstream f(csv_out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + csv_out);
    f << "x,y,z,v1,v2,v3";
    if (potentials) f << ",psi,w1,w2,w3";
    f << "\n";
    const auto& g = res.grid;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        for (int kk = 0; kk < g.n; ++kk) {
          const size_t id = g.idx(i, j, kk);
          f << fmt(g.coord(i)) << "," << fmt(g.coord(j)) << ","
            << fmt(g.coord(kk));
          for (int q = 0; q < 3; ++q) f << "," << fmt(res.v[id * 3 + q]);
          if (potentials) {
            f << "," << fmt(res.psi[id]);
            for (int q = 0; q < 3; ++q) f << "," << fmt(res.w[id * 3 + q]);
          }
          f << "\n";
        }
  }

  json rep;
  rep["version"] = kVersion;
  rep["subcommand"] = "helmholtz";
  rep["config"] = config_json(c);
  rep["s"] = res.s;
  rep["R"] = res.R;
  rep["grid"] = res.grid.n;
  rep["field"] = field_s;
  rep["u_max"] = res.u_max;
  rep["residual"] = res.reconstruction_residual;
  rep["point_residuals"] = res.point_residuals;
  rep["interp_err"] = res.interp_err;
  rep["psi_max"] = res.psi_max;
  rep["w_max"] = res.w_max;
  rep["runtime"] = res.runtime_seconds;
  emit(c, rep.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal vector calculus toolkit"};
  app.require_subcommand(1);

  Common c;

  // specfun-selftest
  auto* sf = app.add_subcommand("specfun-selftest",
                                "special-function identity checks");
  add_common(sf, c);

  // eval-op
  auto* ev = app.add_subcommand("eval-op", "evaluate a nonlocal operator");
  std::string ev_kernel, ev_field, ev_op = "grad", ev_points_file;
  std::vector<std::string> ev_points;
  ev->add_option("--kernel", ev_kernel, "kernel tokens")->required();
  ev->add_option("--field", ev_field, "field tokens")->required();
  ev->add_option("--op", ev_op, "grad | div | curl");
  ev->add_option("--point", ev_points, "evaluation point x1,..,xd");
  ev->add_option("--points-file", ev_points_file,
                 "CSV of points (columns x1..xd)");
  add_common(ev, c);

  // eqkernel
  auto* ek = app.add_subcommand("eqkernel", "tabulate the equivalence kernel");
  std::string ek_kernel, ek_etas;
  ek->add_option("--kernel", ek_kernel, "kernel tokens")->required();
  ek->add_option("--etas", ek_etas, "eta grid a:b:step")->required();
  add_common(ek, c);

  // identities
  auto* idc = app.add_subcommand("identities", "operator identity residuals");
  std::string id_kernel, id_field;
  std::vector<std::string> id_which;
  int id_points = 10;
  double id_tol = 0.0;
  idc->add_option("--kernel", id_kernel, "kernel tokens")->required();
  idc->add_option("--field", id_field, "field tokens")->required();
  idc->add_option("--which", id_which, "identity name(s) or 'all'");
  idc->add_option("--points", id_points, "interior point count");
  idc->add_option("--tol", id_tol, "relative tolerance (0 = default)");
  add_common(idc, c);

  // analysis
  auto* an = app.add_subcommand("analysis", "decay fits / Holder checks");
  std::string an_mode = "decay", an_kernel, an_field, an_dir, an_radii;
  double an_s = 0.5, an_beta = 0.75;
  int an_d = 1;
  long an_budget = 200;
  an->add_option("--mode", an_mode, "decay | holder");
  an->add_option("--kernel", an_kernel, "kernel tokens (decay)");
  an->add_option("--field", an_field, "field tokens")->required();
  an->add_option("--direction", an_dir, "ray direction x1,..,xd (decay)");
  an->add_option("--radii", an_radii, "radius grid a:b:step (decay)");
  an->add_option("--s", an_s, "operator order (holder)");
  an->add_option("--beta", an_beta, "field Holder exponent (holder)");
  an->add_option("--d", an_d, "dimension (holder)");
  an->add_option("--budget", an_budget, "sample-pair budget (holder)");
  add_common(an, c);

  // helmholtz
  auto* hm = app.add_subcommand("helmholtz", "fractional Helmholtz split");
  double hm_s = 0.4, hm_R = 1.0;
  int hm_n = 48, hm_cp = 20;
  bool hm_nopot = false;
  std::string hm_field = "field=bump R=1 shape=vector3", hm_csv;
  hm->add_option("--s", hm_s, "fractional order");
  hm->add_option("--R", hm_R, "concentration radius");
  hm->add_option("--n", hm_n, "lattice nodes per axis");
  hm->add_option("--field", hm_field, "vector3 field tokens");
  hm->add_option("--check-points", hm_cp, "reconstruction check points");
  hm->add_flag("--no-potentials", hm_nopot, "skip the psi/w lattice sweep");
  double hm_budget = 5e-3;
  hm->add_option("--resolution-budget", hm_budget,
                 "relative interpolation-error budget for the lattice");
  hm->add_option("--lattice-csv", hm_csv, "CSV path for the lattice fields");
  add_common(hm, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage / configuration errors -> 1
  }

  try {
    if (sf->parsed()) return run_specfun_selftest(c);
    if (ev->parsed())
      return run_eval_op(c, ev_kernel, ev_field, ev_op, ev_points,
                         ev_points_file);
    if (ek->parsed()) return run_eqkernel(c, ek_kernel, ek_etas);
    if (idc->parsed())
      return run_identities(c, id_kernel, id_field, id_which, id_points,
                            id_tol);
    if (an->parsed()) {
      if (an_mode == "decay") {
        if (an_kernel.empty() || an_dir.empty() || an_radii.empty())
          throw std::invalid_argument(
              "decay mode needs --kernel, --direction, --radii");
        return run_analysis_decay(c, an_kernel, an_field, an_dir, an_radii);
      }
      if (an_mode == "holder")
        return run_analysis_holder(c, an_s, an_beta, an_field, an_d,
                                   an_budget);
      throw std::invalid_argument("unknown analysis mode: " + an_mode);
    }
    if (hm->parsed())
      return run_helmholtz(c, hm_s, hm_R, hm_n, hm_field, hm_cp, !hm_nopot,
                           hm_budget, hm_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
