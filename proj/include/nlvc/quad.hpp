#pragma once

// Principal-value quadrature engine: polar splitting with geometric radial
// panels, antipode-symmetric angular rules, epsilon-schedule extrapolation,
// and analytic tail bounds.
//
// Concurrency: panels are independent and evaluated under OpenMP, but the
// final reduction always sums per-panel partials in fixed panel order, so
// results are bitwise identical for any thread count (including the serial
// reference path).

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlvc/fields.hpp"
#include "nlvc/kernels.hpp"

namespace nlvc::quad {

struct QuadratureSpec {
  double eps0 = 0.1;        // largest PV exclusion radius (caller-scaled)
  int eps_levels = 4;       // schedule eps0 * 2^{-k}, k = 0 .. eps_levels-1
  int radial_order = 8;     // Gauss points per radial panel
  int angular_order = 16;   // d=3: order x 2*order product rule; d=2: 2*order
  double tail_radius = 0.;  // outer cutoff; 0 lets the caller pick
  double rel_tol = 1e-8;    // target relative tolerance (reporting only)

  std::vector<double> eps_schedule() const;
};

struct Diagnostics {
  int panels = 0;
  long integrand_evals = 0;
  // (eps, max-norm of shell value) pairs fed to the extrapolation
  std::vector<std::pair<double, double>> extrapolation;
};

struct EvalResult {
  std::vector<double> value;  // row-major rows x cols
  int rows = 1, cols = 1;
  double err_estimate = 0.0;
  Diagnostics diag;

  double norm_max() const;
};

// Worker cap: min(OMP max threads, NLVC_THREADS if set).
int max_threads();

// Antipode-symmetric angular rule; weights sum to omega_{d-1}. dirs is
// n x d row-major. For every node direction its antipode is also a node
// with equal weight, so odd integrands cancel to rounding.
struct SphereRule {
  std::vector<double> dirs;
  std::vector<double> wts;
  int n = 0;
  int d = 1;
};
const SphereRule& sphere_rule(int d, int angular_order);

// Geometric panel boundaries rmin * 2^i, ending exactly at rmax (rmax must
// be rmin * 2^m for integer m; round_up_pow2 helps callers arrange that).
double round_up_pow2(double rmin, double rmax);

// Per-panel integrals of a vector integrand over the shell rmin < |z| < rmax.
struct PanelDecomposition {
  std::vector<double> radii;              // size P+1, ascending
  std::vector<std::vector<double>> sums;  // size P, each ncomp values
  long evals = 0;

  // total over panels [i0, P)
  std::vector<double> cumulative_from(int i0) const;
};

using Integrand = std::function<void(const double* z, double* out)>;

PanelDecomposition panel_integrate(const Integrand& g, int d, int ncomp,
                                   int radial_order, int angular_order,
                                   double rmin, double rmax,
                                   bool parallel = true);

// Same engine over caller-supplied panel boundaries (ascending, positive).
PanelDecomposition panel_integrate_radii(const Integrand& g, int d, int ncomp,
                                         int radial_order, int angular_order,
                                         const std::vector<double>& radii,
                                         bool parallel = true);

// Panel boundaries on [a, b]: geometric ratio-2 panels, subdivided dyadically
// toward each interior singular radius (levels halvings per side) so that
// integrable endpoint singularities are resolved by the Gauss rule.
std::vector<double> graded_radii(double a, double b,
                                 const std::vector<double>& singular,
                                 int levels = 26);

// Single-shell integral with an a-posteriori error estimate obtained by
// comparing against halved radial/angular orders. Throws std::runtime_error
// with the offending point if the integrand produces a non-finite sample.
EvalResult integrate_shell(const Integrand& g, int d, int ncomp, double eps,
                           double R, const QuadratureSpec& spec);

// Serial reference: identical arithmetic, no OpenMP.
EvalResult integrate_shell_serial(const Integrand& g, int d, int ncomp,
                                  double eps, double R,
                                  const QuadratureSpec& spec);

// Richardson-type extrapolation of shell values at a decreasing geometric
// eps-schedule. Throws std::runtime_error (divergence diagnostic) when the
// increments grow instead of shrinking.
EvalResult pv_limit(const std::vector<std::pair<double, std::vector<double>>>&
                        values_at_eps);

// Extrapolation with known correction exponents: fits
// v(eps) = V + sum_j a_j eps^{p_j} through the last powers.size()+1 samples
// exactly (column-scaled linear solve) and estimates the error from the
// previous sample window. Needs values_at_eps.size() >= powers.size()+2.
EvalResult pv_limit_powers(
    const std::vector<std::pair<double, std::vector<double>>>& values_at_eps,
    const std::vector<double>& powers);

// Principal-value integral over R^d with exclusion balls shrinking along the
// spec's eps-schedule: evaluates one panel decomposition on
// [eps_min, outer_R] and assembles every schedule value from cumulative
// panel sums, then extrapolates. tail_err is added to the error estimate.
EvalResult pv_integrate(const Integrand& g, int d, int ncomp,
                        const QuadratureSpec& spec, double outer_R,
                        double tail_err = 0.0, bool estimate_quad_err = true);

// Rigorous bound for the neglected operator tail beyond radius R:
// 2 ||f||_inf * int_{|h|>R} rho(|h|)/|h| dV.
double tail_bound(const kernels::KernelSpec& k, const fields::Field& f,
                  double R);

}  // namespace nlvc::quad
