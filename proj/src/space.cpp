#include "hodgeforms/space.hpp"

#include <Eigen/Dense>
#include <vector>

namespace hodge {

const char* bc_kind_name(BcKind bc) {
  switch (bc) {
    case BcKind::none: return "none";
    case BcKind::tangential: return "tangential";
    case BcKind::normal: return "normal";
    case BcKind::normal_b: return "normal_b";
    case BcKind::dirichlet: return "dirichlet";
  }
  return "?";
}

namespace {

// One constraint block for a single normal direction.
Matrix constraint_rows(BcKind bc, int n, int k, const Vector& nu, const Matrix& Bv) {
  switch (bc) {
    case BcKind::tangential:
      return wedge_matrix(n, k, nu);
    case BcKind::normal:
      return interior_matrix(n, k, nu);
    case BcKind::normal_b:
      return interior_matrix(n, k, nu) * Bv;
    default:
      return Matrix::Zero(0, binomial(n, k));
  }
}

// Orthonormal basis of the null space of C, relative SVD threshold 1e-8.
Matrix null_space(const Matrix& C, long comp) {
  if (C.rows() == 0) return Matrix::Identity(comp, comp);
  Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-8 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  long rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  return svd.matrixV().rightCols(comp - rank);
}

}  // namespace

DofSpace build_space(const SimplicialMesh& mesh, int k, BcKind bc, const OperatorField* B) {
  const int n = mesh.n;
  if (k < 0 || k > n)
    throw Error(ErrorCode::invalid_argument, "build_space: degree out of range");
  if (bc == BcKind::normal_b && B == nullptr)
    throw Error(ErrorCode::invalid_argument, "build_space: normal_b requires B");
  if (B != nullptr && (B->degree_source != k || B->degree_target != k || B->n != n))
    throw Error(ErrorCode::invalid_argument, "build_space: B acts on the wrong degree");

  DofSpace space;
  space.mesh = &mesh;
  space.k = k;
  space.bc = bc;
  space.comp = binomial(n, k);
  const int V = mesh.num_vertices();
  space.full_dofs = static_cast<long>(V) * space.comp;
  space.vertex_basis.assign(V, Matrix());
  space.offset.assign(V + 1, 0);

  bool any_boundary = false, any_free_on_boundary = false;
  for (int v = 0; v < V; ++v) {
    long dv = space.comp;
    if (bc != BcKind::none && mesh.is_boundary_vertex(v)) {
      any_boundary = true;
      const auto& vn = mesh.vertex_normals[mesh.normal_of[v]];
      if (bc == BcKind::dirichlet) {
        space.vertex_basis[v] = Matrix::Zero(space.comp, 0);
      } else {
        Matrix Bv;
        if (bc == BcKind::normal_b)
          Bv = (*B)(mesh.vertices.row(v).transpose());
        Matrix C;
        if (!vn.corner) {
          C = constraint_rows(bc, n, k, vn.normal, Bv);
        } else {
          const long rows = constraint_rows(bc, n, k, vn.normal, Bv).rows();
          C.resize(rows * static_cast<long>(vn.faces.size()), space.comp);
          for (size_t f = 0; f < vn.faces.size(); ++f)
            C.middleRows(rows * static_cast<long>(f), rows) = constraint_rows(
                bc, n, k, mesh.face_normals.row(vn.faces[f]).transpose(), Bv);
        }
        space.vertex_basis[v] = null_space(C, space.comp);
      }
      dv = space.vertex_basis[v].cols();
      if (dv > 0) any_free_on_boundary = true;
    }
    space.offset[v + 1] = space.offset[v] + dv;
  }
  space.free_dofs = space.offset[V];
  if (any_boundary && !any_free_on_boundary && bc != BcKind::dirichlet)
    space.warning = "admissible subspace is empty at every boundary vertex";

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(space.full_dofs);
  for (int v = 0; v < V; ++v) {
    const Matrix& U = space.vertex_basis[v];
    if (U.size() == 0 && space.offset[v + 1] - space.offset[v] ==
                             space.comp) {  // unconstrained vertex
      for (long c = 0; c < space.comp; ++c)
        trips.emplace_back(v * space.comp + c, space.offset[v] + c, 1.0);
    } else {
      for (long c = 0; c < U.cols(); ++c)
        for (long r = 0; r < U.rows(); ++r)
          if (U(r, c) != 0.0)
            trips.emplace_back(v * space.comp + r, space.offset[v] + c, U(r, c));
    }
  }
  space.P.resize(space.full_dofs, space.free_dofs);
  space.P.setFromTriplets(trips.begin(), trips.end());
  space.P.makeCompressed();
  return space;
}

Vector interpolate(const DofSpace& space, const FormField& field) {
  if (field.n != space.n() || field.degree != space.k)
    throw Error(ErrorCode::invalid_argument, "interpolate: field degree mismatch");
  Vector full(space.full_dofs);
  for (int v = 0; v < space.mesh->num_vertices(); ++v)
    full.segment(v * space.comp, space.comp) =
        field(space.mesh->vertices.row(v).transpose());
  return full;
}

double constraint_residual(const DofSpace& space, const Vector& full) {
  if (full.size() != space.full_dofs)
    throw Error(ErrorCode::invalid_argument, "constraint_residual: vector size mismatch");
  double worst = 0.0;
  for (int v = 0; v < space.mesh->num_vertices(); ++v) {
    if (!space.mesh->is_boundary_vertex(v) || space.bc == BcKind::none) continue;
    const Vector val = full.segment(v * space.comp, space.comp);
    const Matrix& U = space.vertex_basis[v];
    if (U.size() != 0 && U.cols() == U.rows()) continue;  // unconstrained
    // distance of the nodal value to its admissible subspace
    if (U.cols() == 0)
      worst = std::max(worst, val.norm());
    else
      worst = std::max(worst, (val - U * (U.transpose() * val)).norm());
  }
  return worst;
}

}  // namespace hodge
