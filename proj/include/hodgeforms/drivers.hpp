// Boundary value problem drivers: Hodge-type solves for both trace
// conditions, Maxwell and Stokes systems, the Dirichlet potential problem,
// div-curl least squares, Gaffney constants and data compatibility checks.
#pragma once

#include "hodgeforms/verify.hpp"

namespace hodge {

/// A complete problem statement. `kind` selects the driver and the trace
/// condition: hodge_t, hodge_n, maxwell_t, maxwell_n, stokes_t, stokes_n,
/// dirichlet, divcurl_t, divcurl_n. Fields that a kind does not use are
/// ignored; invalid FormFields mean zero data.
struct ProblemSpec {
  std::string kind;
  int n = 2;
  int k = 1;
  double lambda = 0.0;
  OperatorField A;   ///< acts on (k+1)-forms; identity when unset
  OperatorField B;   ///< acts on k-forms; identity when unset
  FormField f;       ///< k-form load (divcurl: the (k+1)-form d-data)
  FormField F;       ///< optional (k+1)-form load, enters as int <F, d phi>
  FormField g;       ///< (k-1)-form divergence data (maxwell, divcurl)
  FormField omega0;  ///< boundary data, given as a field on the closure
  FormField p0;      ///< stokes boundary pressure
};

/// ProblemSpec carrying the coefficients, data and kind of a catalog case.
ProblemSpec spec_from_case(const ManufacturedCase& c);

/// One data compatibility condition and its measured violation.
struct CompatibilityCheck {
  std::string name;
  double magnitude = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct CompatibilityReport {
  std::vector<CompatibilityCheck> checks;
  bool all_pass = true;
  /// First failing check, or nullptr.
  const CompatibilityCheck* failed() const;
};

/// Evaluates every compatibility condition the kind imposes on the data.
/// Never throws for data reasons; the drivers turn a failing required
/// check into a data_incompatible error.
CompatibilityReport check_compatibility(const SimplicialMesh& mesh,
                                        const ProblemSpec& spec);

/// Everything a solve reports. All residuals are recomputed from the
/// returned solution, not read back from the solver.
struct SolveReport {
  std::string kind;
  int n = 0;
  int k = 0;
  double lambda = 0.0;
  int sign = 0;             ///< calibrated strong-form sign
  Vector solution;          ///< full nodal coefficients of omega_h
  Vector pressure;          ///< stokes: full nodal 0-form
  Matrix cell_correction;   ///< dirichlet: per-cell constant d v, C x m_k
  double equation_residual = 0.0;   ///< relative residual of the weak system
  double constraint_residual = 0.0; ///< maxwell/stokes: ||delta(B w_h) - g_h||
  double res_d = 0.0;               ///< divcurl: ||d(.) - f|| by quadrature
  double res_delta = 0.0;           ///< divcurl: ||delta(.) - g||
  double trace_residual = 0.0;      ///< dirichlet: boundary mismatch
  double projection_gap = 0.0;      ///< maxwell: projection vs constructive
  BoundaryResiduals boundary;
  CompatibilityReport compatibility;
  int nullspace_dim = 0;    ///< harmonic directions fixed by side conditions
  std::string notes;        ///< accumulated warnings
};

SolveReport solve_hodge(const SimplicialMesh& mesh, const ProblemSpec& spec);
SolveReport solve_maxwell(const SimplicialMesh& mesh, const ProblemSpec& spec);
SolveReport solve_stokes(const SimplicialMesh& mesh, const ProblemSpec& spec);
SolveReport solve_dirichlet(const SimplicialMesh& mesh, const ProblemSpec& spec);
SolveReport solve_divcurl(const SimplicialMesh& mesh, const ProblemSpec& spec);

/// Dispatches on spec.kind.
SolveReport solve_problem(const SimplicialMesh& mesh, const ProblemSpec& spec);

/// Discrete Gaffney constant: the smallest C with
///   ||grad u||^2 <= C (||d u||^2 + ||delta(B u)||^2)
/// over the trace-constrained space with harmonic fields and admissible
/// constants excluded. C is 1 / rayleigh.
struct GaffneyReport {
  double constant = 0.0;
  double rayleigh = 0.0;
  Vector minimizer;      ///< full nodal coefficients of the minimizing field
  int excluded_dim = 0;  ///< harmonic plus constant directions removed
  std::string notes;
};
GaffneyReport gaffney_constant(const SimplicialMesh& mesh, int k, const OperatorField& B,
                               BcKind bc);

/// Weak residual int <A d w_h, d phi_i> + int <f, phi_i> of a Dirichlet
/// solution (nodal part plus per-cell constant correction), masked to test
/// functions supported away from the boundary. Exactly invariant under
/// adding cell-constant fields to the correction.
Vector dirichlet_interior_residual(const SimplicialMesh& mesh, const ProblemSpec& spec,
                                   const Vector& nodal_full, const Matrix& cell_correction);

}  // namespace hodge
