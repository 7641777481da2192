// Assembly of the bilinear forms and load functionals on nodal P1 spaces.
#pragma once

#include <functional>

#include "hodgeforms/quadrature.hpp"
#include "hodgeforms/space.hpp"

namespace hodge {

/// Samples the matrix of a quadratic form in the full gradient, size
/// (C(n,k)*n) squared with the p-major flattening used by build_atilde.
using GradientFormSampler = std::function<Matrix(const Vector&)>;

enum class AssemblyMode { parallel, serial };

/// Full (unreduced) nodal matrix of a gradient-form integrand. One-point
/// quadrature for constant samplers, order 2 otherwise. The parallel and
/// serial modes produce bit-identical matrices; the serial mode exists as
/// the reference for testing and benchmarking.
SpMat assemble_gradient_form_full(const DofSpace& space, const GradientFormSampler& G,
                                  Smoothness smoothness,
                                  AssemblyMode mode = AssemblyMode::parallel);

/// Stiffness of <A du, dv> + <delta(Bu), delta(Bv)> via the gradient form.
SpMat assemble_stiffness_full(const DofSpace& space, const OperatorField& A,
                              const OperatorField& B,
                              AssemblyMode mode = AssemblyMode::parallel);

/// Mass matrix of <Bu, v>.
SpMat assemble_mass_full(const DofSpace& space, const OperatorField& B,
                         AssemblyMode mode = AssemblyMode::parallel);

/// Load vector with entries -int <f, phi_i> + int <F, d phi_i>; either
/// field may be empty (treated as zero).
Vector assemble_load_full(const DofSpace& space, const FormField& f, const FormField& F,
                          AssemblyMode mode = AssemblyMode::parallel);

/// Galerkin reduction by the constraint injection P.
SpMat reduce(const DofSpace& space, const SpMat& full);

/// Everything a linear solve needs. rhs already carries the lift correction.
struct AssembledProblem {
  SpMat K_full, M_full;
  SpMat K, M;
  Vector rhs;
  Vector lift;  ///< full-length nodal lift of the boundary data (may be zero)
  double lambda = 0.0;
};

/// Assembles stiffness, mass, load and the boundary-data lift. Solution
/// reconstruction is space.to_full(x) + lift.
AssembledProblem assemble_problem(const DofSpace& space, const OperatorField& A,
                                  const OperatorField& B, double lambda, const FormField& f,
                                  const FormField& F, const FormField& omega0,
                                  AssemblyMode mode = AssemblyMode::parallel);

/// Same as assemble_problem but with an externally supplied gradient-form
/// sampler for the stiffness (the normal-substitution solver needs this).
AssembledProblem assemble_problem_with_form(const DofSpace& space,
                                            const GradientFormSampler& G,
                                            Smoothness smoothness, const OperatorField& B,
                                            double lambda, const FormField& f,
                                            const FormField& F, const FormField& omega0,
                                            AssemblyMode mode = AssemblyMode::parallel);

/// Per-cell constant derivatives of a nodal field: row c of `d` is the
/// coefficient vector of d omega_h on cell c; row c of `delta` is
/// delta(B omega_h) evaluated at the cell centroid (exact for constant B,
/// finite differences feed the grad-B term otherwise).
struct CellDerivatives {
  Matrix d;
  Matrix delta;
};
CellDerivatives cell_derivatives(const DofSpace& space, const Vector& full,
                                 const OperatorField& B);

/// L2 and H1-seminorm errors of the nodal field against an exact field.
/// The exact gradient is analytic when supplied, otherwise a fourth-order
/// finite difference of `exact` (step 1e-3).
struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double l2_exact = 0.0;       ///< norm of the exact field, for relative errors
  double h1_semi_exact = 0.0;
};
ErrorNorms error_norms(const DofSpace& space, const Vector& full, const FormField& exact,
                       const std::function<Matrix(const Vector&)>* exact_grad = nullptr);

/// Squared boundary-trace residuals, face-quadrature order 4. When omega0
/// is supplied the data traces (including the natural ones, differentiated
/// by finite differences) are subtracted first.
struct BoundaryResiduals {
  double wedge_trace = 0.0;  ///< int |nu ^ (w_h - w_0)|^2
  double wedge_delta = 0.0;  ///< int |nu ^ (delta(B w_h) - delta(B w_0))|^2
  double int_trace = 0.0;    ///< int |nu _| B (w_h - w_0)|^2
  double int_ad = 0.0;       ///< int |nu _| A d(w_h - w_0)|^2
};
BoundaryResiduals boundary_residuals(const DofSpace& space, const Vector& full,
                                     const OperatorField& A, const OperatorField& B,
                                     const FormField& omega0 = FormField());

/// L2 inner product of two full nodal fields, via the identity mass form.
double l2_inner(const DofSpace& space, const Vector& full_a, const Vector& full_b);

}  // namespace hodge
