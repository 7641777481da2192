// Nodal P1 spaces of k-form fields with trace constraints at boundary vertices.
#pragma once

#include <Eigen/SparseCore>
#include <optional>
#include <string>

#include "hodgeforms/fields.hpp"
#include "hodgeforms/mesh.hpp"
#include "hodgeforms/operator_field.hpp"

namespace hodge {

using SpMat = Eigen::SparseMatrix<double>;

enum class BcKind { none, tangential, normal, normal_b, dirichlet };

const char* bc_kind_name(BcKind bc);

/// Continuous piecewise-linear fields with values in Lambda^k, one nodal
/// coefficient block of size C(n,k) per vertex (vertex-major flattening:
/// full index = vertex * C(n,k) + component). Boundary vertices carry an
/// admissible subspace; P injects free coefficients into full nodal ones
/// and has orthonormal columns.
struct DofSpace {
  const SimplicialMesh* mesh = nullptr;
  int k = 0;
  BcKind bc = BcKind::none;
  long comp = 0;       ///< C(n,k)
  long full_dofs = 0;  ///< num_vertices * comp
  long free_dofs = 0;
  /// Admissible basis per vertex; empty matrix means unconstrained
  /// (identity). Indexed by vertex id.
  std::vector<Matrix> vertex_basis;
  std::vector<long> offset;  ///< free-dof offset per vertex, size V+1
  SpMat P;                   ///< full_dofs x free_dofs
  std::string warning;       ///< set when every boundary vertex is fully clamped

  int n() const { return mesh->n; }
  Vector to_full(const Vector& free) const { return P * free; }
  Vector to_free(const Vector& full) const { return P.transpose() * full; }
  /// Nodal value of the full vector at a vertex.
  Vector value_at(const Vector& full, int v) const { return full.segment(v * comp, comp); }
};

/// Builds the admissible subspaces. At a smooth boundary vertex the single
/// constraint uses the averaged vertex normal; at a corner the constraints
/// of every incident face are stacked and intersected. The null space is
/// decided by SVD with relative threshold 1e-8. B is sampled at vertex
/// positions and is required exactly for bc = normal_b.
DofSpace build_space(const SimplicialMesh& mesh, int k, BcKind bc,
                     const OperatorField* B = nullptr);

/// Nodal interpolation of a field on every vertex, as a full vector.
Vector interpolate(const DofSpace& space, const FormField& field);

/// Largest violation of the vertex constraints by a full nodal vector.
double constraint_residual(const DofSpace& space, const Vector& full);

}  // namespace hodge
