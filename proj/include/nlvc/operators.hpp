#pragma once

// Pointwise nonlocal gradient / divergence / curl (principal-value and
// eps-truncated), the fractional Laplacian in second-difference form, the
// generic equivalence-kernel Laplacian, and nested operator compositions.

#include <functional>
#include <utility>
#include <vector>

#include "nlvc/fields.hpp"
#include "nlvc/kernels.hpp"
#include "nlvc/quad.hpp"

namespace nlvc::operators {

enum class Op { Grad, Div, Curl };

// Result shape (rows, cols) of applying op to a rows x cols field in R^d.
// Grad appends the d index; Div contracts it (matrix N x d -> vector N,
// plain d-vector -> scalar); Curl needs d = 3 and a 3-vector. Throws
// std::invalid_argument on incompatible shapes.
std::pair<int, int> op_shape(Op op, int rows, int cols, int d);

// Principal-value evaluation at x with the spec's eps-schedule. fixed_eps > 0
// skips extrapolation and evaluates the eps-truncated operator on the single
// shell [fixed_eps, R]. The outer radius is the kernel horizon for compactly
// supported kernels, otherwise the field's (effective) reach from x; beyond
// it the u(x) part of the integrand cancels by antipodal symmetry, so the
// neglected tail only carries the far residue of u and is reported in
// err_estimate.
quad::EvalResult nl_apply(Op op, const kernels::KernelSpec& k,
                          const fields::Field& f, const double* x,
                          const quad::QuadratureSpec& spec,
                          double fixed_eps = 0.0);

quad::EvalResult nl_gradient(const kernels::KernelSpec& k,
                             const fields::Field& f, const double* x,
                             const quad::QuadratureSpec& spec,
                             double fixed_eps = 0.0);
quad::EvalResult nl_divergence(const kernels::KernelSpec& k,
                               const fields::Field& f, const double* x,
                               const quad::QuadratureSpec& spec,
                               double fixed_eps = 0.0);
quad::EvalResult nl_curl(const kernels::KernelSpec& k, const fields::Field& f,
                         const double* x, const quad::QuadratureSpec& spec,
                         double fixed_eps = 0.0);

// (1/2) C_{d,s} int (2u(x) - u(x+y) - u(x-y)) / |y|^{d+2s} dy, componentwise.
// For fields with a classical Laplacian the ball |y| < eps0 is replaced by
// its quadratic Taylor value and the Taylor error is estimated by halving
// eps0; Holder-only fields fall back to PV extrapolation of the same
// integrand. The tail beyond the field's reach is added in closed form.
quad::EvalResult frac_laplacian(double s, const fields::Field& f,
                                const double* x,
                                const quad::QuadratureSpec& spec);

// (1/2) int rho_eq(|y|) (2u(x) - u(x+y) - u(x-y)) / |y|^2 dy with a caller
// supplied radial kernel. support > 0 declares rho_eq zero beyond that
// radius (integration is then exact there); singular lists interior radii
// where rho_eq has integrable singularities, resolved by graded panels.
quad::EvalResult eq_laplacian(const std::function<double(double)>& rho_eq,
                              double support, const fields::Field& f,
                              const double* x,
                              const quad::QuadratureSpec& spec,
                              const std::vector<double>& singular = {});

// Nested composition outer(inner(f)) at x, both truncations driven by the
// same (diagonal) eps-schedule and extrapolated jointly. All pairs share one
// sweep of the nested quadrature: the field is sampled once per (outer node,
// inner node) and every requested inner operator accumulates from the same
// samples, so batching the identity checks costs barely more than a single
// composition.
std::vector<quad::EvalResult> compose_batch(
    const std::vector<std::pair<Op, Op>>& pairs, const kernels::KernelSpec& k,
    const fields::Field& f, const double* x, const quad::QuadratureSpec& spec);

quad::EvalResult compose(Op outer, Op inner, const kernels::KernelSpec& k,
                         const fields::Field& f, const double* x,
                         const quad::QuadratureSpec& spec);

// eps-truncated composition at fixed exclusion radii (no extrapolation).
// Both radii must lie on the eps_min * 2^j panel grid of the spec.
quad::EvalResult compose_fixed(Op outer, Op inner, const kernels::KernelSpec& k,
                               const fields::Field& f, const double* x,
                               const quad::QuadratureSpec& spec,
                               double eps_outer, double eps_inner);

}  // namespace nlvc::operators
