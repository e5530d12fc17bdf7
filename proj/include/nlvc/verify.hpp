#pragma once

// Batch certification harness: operator-identity residual suites, far-field
// decay-rate fits, and Holder mapping-property spot checks.

#include <string>
#include <vector>

#include "nlvc/fields.hpp"
#include "nlvc/kernels.hpp"
#include "nlvc/quad.hpp"

namespace nlvc::verify {

enum class Identity {
  CurlGradZero,        // C o G u = 0            (d = 3, scalar u)
  DivCurlZero,         // D o C u = 0            (d = 3, 3-vector u)
  CurlCurl,            // C o C u = G o D u - D o G u   (d = 3, 3-vector u)
  DivGradEqLaplacian,  // -D o G u = (-Delta)_{rho_eq} u
  FracLaplacianMatch,  // -D_s o G_s u = (-Delta)^s u   (fractional kernel)
};

std::string to_string(Identity id);
Identity parse_identity(const std::string& name);

struct PointResidual {
  std::vector<double> x;
  double residual = 0;  // max-norm of lhs - rhs at this point
  // max-norm of |lhs| + |rhs| at this point; identities that are exactly
  // zero fold in the magnitude of a non-cancelling composition of the same
  // operand instead, so "relative" keeps its meaning there
  double scale = 0;
};

struct ResidualReport {
  Identity identity = Identity::CurlGradZero;
  std::string kernel, field;  // display strings for report output
  std::vector<PointResidual> points;
  double residual_norm = 0;  // max over points of the per-point residual
  double scale = 0;          // max over points of the per-point scale
  double tolerance_used = 0;
  bool pass = false;  // residual_norm <= tolerance * max(scale, 1e-8)
};

// Default relative tolerance for an identity: 5e-4 for the nested curl-curl
// identity, 1e-4 otherwise.
double default_tolerance(Identity id);

// Evaluates the identity residual at each point. tolerance <= 0 selects the
// default. Configuration mismatches (curl identities with d != 3, fractional
// match with a non-fractional kernel, wrong field shape) throw
// std::invalid_argument.
ResidualReport run_identity(Identity id, const kernels::KernelSpec& k,
                            const fields::Field& f,
                            const std::vector<std::vector<double>>& points,
                            const quad::QuadratureSpec& spec,
                            double tolerance = 0.0);

// n seeded quasi-random (Halton) points inside the field's effective support
// plus two points outside it, deterministically.
std::vector<std::vector<double>> default_points(const fields::Field& f, int n,
                                                unsigned seed = 1);

struct DecayFit {
  std::vector<double> radii;   // radii actually used in the fit
  std::vector<double> values;  // max-norm operator values at those radii
  double slope = 0, intercept = 0;  // least squares in log-log
  double loglog_dev = 0;            // max |fit - data| in log space
  double semilog_slope = 0;         // least squares of log value vs r
  double semilog_dev = 0;
  bool underflow = false;  // too few values above the 1e-14 floor to fit
};

// Operator magnitude along x = r * direction: the nonlocal gradient for
// scalar fields, the divergence for d-vector fields.
DecayFit decay_fit(const kernels::KernelSpec& k, const fields::Field& f,
                   const std::vector<double>& direction,
                   const std::vector<double>& radii,
                   const quad::QuadratureSpec& spec);

struct HolderReport {
  double seminorm = 0;    // estimated [Z_s f]_{C^{0,beta-s}}
  double field_norm = 0;  // estimated ||f||_{C^{0,beta}}
  double ratio = 0;       // seminorm / field_norm at the full budget
  double ratio_half = 0;  // same at half the budget
  bool pass = false;      // finite and stable within 20% under doubling
};

// Ratio estimate for the mapping bound ||Z_s f||_{C^{0,beta-s}} <=
// C ||f||_{C^{0,beta}} with Z_s the fractional gradient; budget counts
// sample pairs. Requires beta strictly inside (s, 1); the excluded
// boundary cases throw std::domain_error.
HolderReport holder_mapping_check(double s, const fields::Field& f,
                                  double beta, long budget,
                                  const quad::QuadratureSpec& spec);

}  // namespace nlvc::verify
