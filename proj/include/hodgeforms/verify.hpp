// Finite-difference strong operators, the sign calibration, manufactured
// solutions, the square spectrum oracle, and convergence bookkeeping.
#pragma once

#include <string>
#include <vector>

#include "hodgeforms/solver.hpp"

namespace hodge {

/// Exterior derivative of a smooth field, fourth-order finite differences.
Vector fd_d(const FormField& omega, const Vector& x, double h = 1e-3);

/// Codifferential -sum_p e_p _| d/dx_p omega, same stencil.
Vector fd_delta(const FormField& omega, const Vector& x, double h = 1e-3);

/// delta(B omega); the product rule happens implicitly because B is
/// sampled at the stencil points.
Vector fd_delta_op(const FormField& omega, const OperatorField& B, const Vector& x,
                   double h = 1e-3);

/// The sign s relating the assembled weak form to the strong equations
///   s * [delta(A d w) + B^T d delta(B w)] = lambda B w + f.
/// Calibrated once per process on a coarse square: the residuals
/// || K x + s * 2 M x || of an interpolated eigenfield are compared for
/// s = +-1 and the smaller one wins. `ratio` is losing over winning
/// residual; a ratio below 10 aborts the calibration.
struct SignCalibration {
  int s = 0;
  double ratio = 0.0;
};
const SignCalibration& calibrated_sign();

/// Pointwise s * [delta(A d w) + B^T d delta(B w)] - lambda B w by nested
/// finite differences, i.e. the data f a solution manufactures. The
/// stencil reaches 4h from x; a non-finite sample raises a stencil error.
Vector fd_operator_apply(const FormField& omega, const OperatorField& A,
                         const OperatorField& B, double lambda, const Vector& x,
                         double h = 1e-3);

/// First `count` eigenvalues sigma (sorted decreasing, multiplicities kept)
/// of the tangential A = B = I problem for 1-forms on [0, pi]^2.
Vector square_spectrum_oracle(int count);

/// One manufactured problem: coefficients, data, the exact solution when
/// the problem pins one down, and a mesh family.
struct ManufacturedCase {
  std::string name;
  std::string kind;  ///< hodge_t, hodge_n, maxwell_t, stokes_t, stokes_n,
                     ///< divcurl_t, divcurl_n, dirichlet
  int n = 2;
  int k = 1;
  BcKind bc = BcKind::tangential;
  double lambda = 0.0;
  OperatorField A, B;
  FormField exact;  ///< invalid when the solution is not unique
  std::function<Matrix(const Vector&)> exact_grad;  ///< mk x n, column p = d/dx_p
  FormField f;       ///< k-form load (divcurl: the (k+1)-form d-data)
  FormField F;       ///< optional (k+1)-form load
  FormField g;       ///< (k-1)-form data (maxwell, divcurl)
  FormField omega0;  ///< boundary data as a field on the closure
  FormField p0;      ///< stokes boundary pressure
  std::function<double(const Vector&)> pressure;  ///< stokes exact pressure
  std::function<SimplicialMesh(int)> mesh;
  std::vector<int> levels;  ///< mesh parameters, coarse to fine
};

/// The cases exercised by the tests: square and disk Hodge problems with
/// and without lifts and variable coefficients, Maxwell, both Stokes
/// variants, div-curl on three domains, and a Dirichlet potential problem.
std::vector<ManufacturedCase> manufactured_catalog();

/// Tangential family (cos(m x1) sin(l x2), sin x1 cos x2) on [0, pi]^2,
/// lambda = 1/2, load manufactured by fd_operator_apply.
ManufacturedCase square_tangential_family(int m, int l);

/// Errors per refinement level with least-squares log-log slopes.
struct ConvergenceTable {
  std::vector<double> h;
  std::vector<int> dofs;
  std::vector<std::string> columns;
  Matrix errors;                      ///< level x column, clamped at 1e-16
  std::vector<double> slopes;         ///< per column; NaN below 3 levels
  std::vector<double> fit_residuals;  ///< rms log-space misfit per column
  std::vector<int> excluded;          ///< coarsest levels dropped per column
};

/// Fits err ~ C h^slope per column. With at least 4 levels a coarsest
/// point whose log-space misfit exceeds log(1.1) is excluded and the fit
/// repeated without it.
ConvergenceTable make_convergence_table(std::vector<double> h, std::vector<int> dofs,
                                        std::vector<std::string> columns,
                                        Matrix errors);

/// h, dofs and the error columns as rows; slopes, misfits and exclusions
/// follow as '#'-prefixed footer lines.
std::string to_csv(const ConvergenceTable& table);

/// Runs the driver for `problem` on each level and tabulates errors and
/// residuals. Defined with the drivers.
ConvergenceTable convergence_study(const ManufacturedCase& problem,
                                   const std::vector<int>& levels = {});

}  // namespace hodge
