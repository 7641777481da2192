// Linear solves, generalized eigenpairs, harmonic bases, Rayleigh minima.
#pragma once

#include <string>

#include "hodgeforms/assembly.hpp"

namespace hodge {

struct LinearSolveInfo {
  bool spd_path = false;  ///< factorization without pivoting was used
  double residual = 0.0;  ///< relative residual of the returned solution
  double invcond = 1.0;   ///< estimated inverse condition number
};

/// Solves (K + lambda M) x = rhs on the reduced space. Takes the
/// LDLT fast path when the matrix is symmetric and lambda > 0 (then the
/// pencil is definite), pivoting LU otherwise. The relative residual is
/// verified to 1e-9. An estimated inverse condition below 1e-12 raises a
/// spectrum_hit error naming lambda as the suspected eigenvalue.
Vector solve_shifted(const SpMat& K, const SpMat& M, double lambda, const Vector& rhs,
                     LinearSolveInfo* info = nullptr);

/// solve_shifted on an assembled problem; returns the reduced coefficients.
Vector solve_linear(const AssembledProblem& problem, LinearSolveInfo* info = nullptr);

struct EigOptions {
  long dense_threshold = 2000;
  int max_iterations = 600;
  double tol = 1e-10;  ///< iteration stop on scaled residuals (sparse path)
};

/// Generalized eigenpairs of K x = rho M x reported as sigma = -rho.
struct EigenResult {
  Vector sigma;      ///< sorted decreasing (closest to zero first)
  Matrix vectors;    ///< columns, M-orthonormal
  Vector residuals;  ///< ||(K + sigma_i M) x_i|| / (||x_i|| (||K|| + |sigma_i| ||M||))
  std::string sign_convention = "sigma = -rho, rho = <Kx,x>/<Mx,x> >= 0";
};

/// The count smallest Rayleigh quotients of (K, M). Dense solver up to
/// opts.dense_threshold reduced dofs, deterministic shift-invert block
/// iteration above. K and M must be symmetric to 1e-8 relative and M
/// positive definite. Residuals are re-verified to 1e-7.
EigenResult eig_pairs(const SpMat& K, const SpMat& M, int count,
                      const EigOptions& opts = {});

/// Near-null space of the identity-coefficient Hodge form.
struct HarmonicBasis {
  int dimension = 0;
  double tau = 0.0;      ///< eigenvalue threshold c_tau * h^2 actually used
  Matrix vectors;        ///< reduced coefficients, M-orthonormal columns
  Matrix full_vectors;   ///< nodal coefficients of the same columns
  Vector rho;            ///< all Rayleigh quotients computed while deciding
  std::string warning;   ///< set when an eigenvalue sits within 3x of tau
};

/// Eigenpairs of the A = B = I form on the (mesh, k, bc) space with
/// Rayleigh quotient below tau = c_tau * h^2.
HarmonicBasis harmonic_basis(const SimplicialMesh& mesh, int k, BcKind bc,
                             double c_tau = 0.5,
                             AssemblyMode mode = AssemblyMode::parallel);

struct RayleighMin {
  double value = 0.0;
  Vector minimizer;
};

/// Smallest generalized eigenvalue of Q against N after restricting to a
/// complement of the exclusion columns. N must be positive definite on
/// that complement.
RayleighMin rayleigh_min(const SpMat& Q, const SpMat& N,
                         const Matrix& exclusion = Matrix(),
                         const EigOptions& opts = {});

}  // namespace hodge
