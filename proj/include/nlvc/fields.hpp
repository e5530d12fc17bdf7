#pragma once

// Evaluable test fields: closures plus metadata (shape, support, smoothness)
// and optional closed-form classical derivatives used as oracles.

#include <functional>
#include <string>
#include <vector>

namespace nlvc::fields {

enum class Smoothness { C2Bounded, Schwartz, HolderBeta, C1HolderBeta };

// Codomain is rows x cols (scalar 1x1, vector N = Nx1, matrix N x d).
// Values are written row-major into caller buffers of size rows*cols.
struct Field {
  int d = 1;
  int rows = 1, cols = 1;
  double support_radius = 0.0;  // INFINITY when not compactly supported
  Smoothness smoothness = Smoothness::Schwartz;
  double holder_beta = 0.0;  // only meaningful for the Holder classes
  double sup_norm = 1.0;     // known bound on max |component|

  std::function<void(const double* x, double* out)> eval;
  // Optional closed forms; null when unavailable.
  // classical_grad: (rows*cols) x d matrix, row-major (component varies slow).
  std::function<void(const double* x, double* out)> classical_grad;
  std::function<void(const double* x, double* out)> classical_laplacian;

  int ncomp() const { return rows * cols; }
};

// Component-wise Gaussian exp(-|x-c|^2 / (2 w^2)); Schwartz class, with
// closed-form gradient and Laplacian.
Field make_gaussian(int d, int rows, const std::vector<double>& center,
                    double width);

// Standard smooth bump exp(1 - 1/(1 - |x/R|^2)) inside B(0,R), 0 outside;
// C-infinity with compact support, closed-form derivatives.
Field make_bump(int d, int rows, double R);

// 1D kink bump(x) * |x|^beta: C^{0,beta} but not Lipschitz at 0.
Field make_kink(double beta, double R);

Field make_constant(int d, int rows, double value);

// u(x) = component-wise center-shifted copy: g(x - t).
Field translate(const Field& f, const std::vector<double>& t);

// a*f + b*g (shapes must match); derivative oracles combined when both exist.
Field axpby(double a, const Field& f, double b, const Field& g);

// Stack scalar fields into a vector field (rows = components.size()).
Field stack(const std::vector<Field>& components);

// Sampled lower bound of the Holder seminorm sup |v(x)-v(y)|/|x-y|^alpha
// (order 0) or of the same quotient on the gradient (order 1, needs a
// closed-form or finite-difference gradient). Deterministic in seed.
double seminorm_estimate(const Field& f, int order, double alpha,
                         long budget, unsigned seed = 0);

// Parses "field=bump R=1.0 shape=vector3" style tokens. Supported fields:
// gaussian (w=, optional shape=), bump (R=, optional shape=); shapes: scalar,
// vector3. Dimension is supplied by the caller.
Field parse_field(const std::string& tokens, int d);

}  // namespace nlvc::fields
