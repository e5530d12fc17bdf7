#pragma once

// Self-contained special functions: Gamma, the real Gauss hypergeometric
// function 2F1, and the auxiliary functions F_s, G_s with the constants
// kappa_s, c_{d,s}, C_{d,s}, kappa_{d,s} used by the kernel and
// equivalence-kernel closed forms.

#include <stdexcept>

namespace nlvc::specfun {

struct FracParams {
  double s;  // order, in (0,1)
  int d;     // spatial dimension, >= 1
};

struct Constants {
  double c_ds;        // fractional-kernel normalization
  double C_ds;        // fractional-Laplacian / equivalence-kernel constant
  double kappa_fund;  // Riesz fundamental-solution constant (needs d > 2s)
};

// Gamma function on the real line. Throws std::domain_error at the poles
// x = 0, -1, -2, ...
double gamma(double x);

// Reciprocal Gamma, finite everywhere (0 at the poles). Used internally so
// that transformation coefficients with Gamma poles in a denominator vanish
// cleanly instead of blowing up.
double rgamma(double x);

// Real 2F1(a,b;c;z) for z < 1. Analytic continuation to z <= -1 via the
// Pfaff transformation; arguments near 1 via the 1-z linear transformation.
// Throws std::domain_error for z >= 1 or c a nonpositive integer, and
// std::runtime_error for the one degenerate regime (c-a-b = 0 with z near 1)
// this library never needs.
double hyp2f1(double a, double b, double c, double z);

// Antiderivative of (1-x)/|1-x|^{2+s} * x/|x|^{2+s}, piecewise on the three
// intervals separated by {0,1}. Throws std::domain_error at x in {0,1}.
// Note: the third branch applies for x > 1 (the two first branches already
// cover x <= 0 and 0 < x < 1).
double f_s(double s, double x);

// kappa_s = Gamma(1-s)Gamma(-s)/(s Gamma(-2s)) for s != 1/2, and 0 at
// s = 1/2 (the generic formula is indeterminate there).
double kappa_s(double s);

// G_s(x): 0 on (0,1/2]; F_s(x)-F_s(1-x) on (1/2,1); F_s(x)-F_s(1-x)-kappa_s
// on (1,inf). Throws std::domain_error for x <= 0 or x = 1.
double g_s(double s, double x);

// Richardson-type limits of the singular/removable points, extrapolated over
// a geometric epsilon schedule. Raw evaluation at the points always errors;
// these are the sanctioned accessors.
double kappa_s_numeric(double s);        // lim_{e->0} F_s(e) - F_s(-e)
double f_s_jump_at_one(double s);        // lim_{e->0} F_s(1+e) - F_s(1-e) (= 0)
double g_s_limit_at_one(double s);       // lim_{x->1} |x-1|^s G_s(x) (= 2/s)
double g_s_limit_at_infinity(double s);  // lim_{x->inf} G_s(x)

double c_ds(int d, double s);
double C_ds(int d, double s);
double kappa_fund(int d, double s);  // throws if d <= 2s
Constants constants(const FracParams& p);

// Iterated exponent-fitted Richardson extrapolation of v(eps) -> eps = 0
// given samples at a decreasing geometric schedule (constant ratio).
// Returns the extrapolated limit; *err_out (optional) gets the magnitude of
// the last correction. Throws std::runtime_error if increments grow.
double extrapolate_to_zero(const double* eps, const double* val, int n,
                           double* err_out = nullptr);

}  // namespace nlvc::specfun
