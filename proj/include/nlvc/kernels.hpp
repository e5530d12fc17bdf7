#pragma once

// The four radial interaction kernels (fractional, truncated fractional,
// tempered fractional, characteristic), the tail antiderivative Psi, and the
// per-family integrability flags.

#include <string>

namespace nlvc::kernels {

enum class Family {
  Fractional,
  TruncatedFractional,
  TemperedFractional,
  Characteristic,
};

struct KernelSpec {
  Family family;
  int d;             // ambient dimension
  double s = 0.0;    // order (all but Characteristic)
  double delta = 0;  // horizon (Truncated / Characteristic)
  double alpha = 0;  // tempering rate (Tempered)
};

struct AssumptionFlags {
  bool K;      // nonnegative, rho(r)/r nonincreasing, min{1,1/r} rho integrable
  bool K_INT;  // rho(r)/r integrable over R^d
  bool K_EQ;   // Psi-based conditions for the pointwise equivalence kernel
};

KernelSpec make_fractional(int d, double s);
KernelSpec make_truncated(int d, double s, double delta);
KernelSpec make_tempered(int d, double s, double alpha);
KernelSpec make_characteristic(int d, double delta);

// Surface measure of the unit sphere in R^d (2, 2*pi, 4*pi for d = 1,2,3).
double omega_dm1(int d);

// Kernel value at radius r > 0. Closed form including normalization
// constants; singular families are not clamped near 0.
double eval(const KernelSpec& k, double r);

// Psi(r) = int_r^inf rho(theta)/theta dtheta. Closed form except for the
// tempered family, which is integrated numerically to ~1e-12 relative.
double psi(const KernelSpec& k, double r);

// int_{|h|>R} rho(|h|)/|h| dV, the exact tail mass used for truncation-error
// bounds. Zero for compactly supported kernels once R >= delta.
double tail_integral(const KernelSpec& k, double R);

// int_{|h|<r} rho(|h|) dV (finite for every family since rho ~ r^{-(d+s-1)}).
double ball_integral(const KernelSpec& k, double r);

AssumptionFlags assumption_flags(const KernelSpec& k);

// Parses "family=fractional s=0.5 d=3" style token strings; unknown keys,
// missing required keys, or out-of-range values throw std::invalid_argument.
KernelSpec parse_kernel(const std::string& tokens);

std::string to_string(const KernelSpec& k);

}  // namespace nlvc::kernels
