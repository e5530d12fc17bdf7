#pragma once

// Equivalence kernels: the radial kernel rho_eq for which the composition
// -D o G acts as the unweighted nonlocal Laplacian
//   (1/2) int rho_eq(|y|) (2u(x) - u(x+y) - u(x-y)) / |y|^2 dy.
// Provides a principal-value numeric evaluation valid for singular kernels,
// closed forms where available, and a property-certification report for the
// truncated-fractional equivalence kernel in d = 1.

#include <string>
#include <vector>

#include "nlvc/kernels.hpp"
#include "nlvc/quad.hpp"

namespace nlvc::equivalence {

// PV-extrapolated numeric value of
//   rho_eq(eta) = eta^d PV int rho(eta|z|)/|z| rho(eta|e1-z|)/|e1-z|
//                           (e1-z).z / (|e1-z||z|) dz
// with shrinking exclusion balls at z = 0 and z = e1. The two singular
// neighborhoods contribute equally (the integrand is symmetric under
// z <-> e1 - z), so one PV integral is evaluated and doubled; the smooth
// remainder is integrated separately under a C-infinity partition of unity.
// Non-convergent schedules surface as std::runtime_error diagnostics.
quad::EvalResult rho_eq_numeric(const kernels::KernelSpec& k, double eta,
                                const quad::QuadratureSpec& spec);

// True when a closed form is implemented: fractional (any d), truncated
// fractional (d = 1), characteristic (d = 1).
bool has_closed_form(const kernels::KernelSpec& k);

// Exact closed-form value. Throws std::invalid_argument for unsupported
// family/dimension and std::domain_error at singular radii (eta = delta for
// the truncated family, eta in {0, delta} for the characteristic family).
double rho_eq_closed(const kernels::KernelSpec& k, double eta);

struct EquivKernelSample {
  double eta = 0;
  double numeric = 0;
  double numeric_err = 0;
  bool has_closed = false;
  double closed = 0;
  double abs_err = 0;  // |numeric - closed| when closed present
  double rel_err = 0;  // abs_err / |closed| when closed nonzero
};

// Numeric (and, where available, closed-form) values over an eta grid.
// Grid points are independent; output order matches the input grid.
std::vector<EquivKernelSample> tabulate(const kernels::KernelSpec& k,
                                        const std::vector<double>& etas,
                                        const quad::QuadratureSpec& spec);

struct PropertyCheck {
  std::string name;
  bool pass = false;
  double observed = 0;
  double expected = 0;   // 0 when the check has no reference value
  double tolerance = 0;  // criterion applied to observed vs expected
};

struct TruncatedReport {
  double s = 0, delta = 0;
  std::vector<PropertyCheck> checks;
  bool all_pass() const;
};

// Certifies the structural properties of the truncated-fractional
// equivalence kernel in d = 1 over the supplied eta grid:
//   nonnegativity, compact support in [0, 2 delta], singularity of order s
//   at eta = delta with limit constant 2 c_{1,s}^2 / s, integrability, and
//   consistency with the fractional closed form as delta/eta -> infinity.
TruncatedReport certify_truncated_properties(double s, double delta,
                                             const std::vector<double>& etas,
                                             const quad::QuadratureSpec& spec);

}  // namespace nlvc::equivalence
