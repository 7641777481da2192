// Simplicial meshes: generation, ASCII io, validation, boundary geometry.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "hodgeforms/errors.hpp"
#include "hodgeforms/forms.hpp"

namespace hodge {

/// Per-boundary-vertex normal data. `normal` is the angle-weighted average
/// of the incident boundary face normals (uniform weights in 2D). When some
/// pair of incident face normals differs by more than 20 degrees the vertex
/// is flagged as a corner and downstream constraint builders intersect the
/// constraints of all incident faces instead of trusting the average.
struct VertexNormal {
  int vertex = -1;
  Vector normal;
  std::vector<int> faces;  ///< indices into boundary_faces
  bool corner = false;
};

struct SimplicialMesh {
  int n = 0;                    ///< ambient dimension, 2 or 3
  Matrix vertices;              ///< V x n coordinates
  Eigen::MatrixXi cells;        ///< C x (n+1), positively oriented
  Eigen::MatrixXi boundary_faces;  ///< F x n vertex ids
  Matrix face_normals;          ///< F x n outward unit normals
  std::vector<int> face_cell;   ///< adjacent cell of each boundary face
  std::vector<VertexNormal> vertex_normals;  ///< one entry per boundary vertex
  std::vector<int> normal_of;   ///< V entries; index into vertex_normals or -1

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_cells() const { return static_cast<int>(cells.rows()); }
  int num_boundary_faces() const { return static_cast<int>(boundary_faces.rows()); }
  bool is_boundary_vertex(int v) const { return normal_of[v] >= 0; }

  /// Rows are the n+1 vertex positions of cell c.
  Matrix cell_vertices(int c) const;
  /// Rows are the n vertex positions of boundary face f.
  Matrix face_vertices(int f) const;
  /// Signed volume of cell c (positive for valid meshes).
  double cell_volume(int c) const;
  /// Longest edge over all cells.
  double mesh_size() const;
  /// Sum of cell volumes.
  double total_volume() const;
};

/// Uniform triangulation of the square [a,b]^2 with (m+1)^2 vertices and
/// 2 m^2 triangles.
SimplicialMesh generate_square(double a, double b, int m);

/// Disk of radius r meshed by m concentric rings (6j vertices on ring j),
/// 6 m^2 triangles; boundary vertices lie on the exact circle.
SimplicialMesh generate_disk(double r, int m);

/// Annulus r0 < |x| < r1, m radial layers, angular count chosen for
/// near-unit aspect ratio; both circles are resolved exactly at vertices.
SimplicialMesh generate_annulus(double r0, double r1, int m);

/// Freudenthal triangulation of the cube [0,a]^3, 6 m^3 tetrahedra.
SimplicialMesh generate_cube(double a, int m);

/// One uniform refinement step is just the generator with doubled m; these
/// generators are the only mesh sources besides load_mesh.

/// Outcome of one validation check.
struct MeshCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;
  std::string detail;
};

struct MeshDiagnostics {
  std::vector<MeshCheck> checks;
  bool all_pass() const;
  std::string summary() const;
};

/// Checks every structural invariant: positive cell volumes, two-or-one
/// cell incidence per facet, boundary closure, unit outward normals,
/// duplicate vertices, index ranges. Reporting only; never throws.
MeshDiagnostics validate_mesh(const SimplicialMesh& mesh);

/// Derives boundary faces (when absent), outward normals, vertex normals
/// and corner flags. Generators and load_mesh call this; call it again
/// after editing a mesh by hand.
void finalize_mesh(SimplicialMesh& mesh);

/// Reads the line-oriented ASCII format:
///   dim <n>
///   vertices <V>   followed by V lines of n coordinates
///   cells <C>      followed by C lines of n+1 zero-based indices
///   boundary <F>   optional, F lines of n zero-based indices
/// `#` starts a comment. Parse errors carry the line number; the loaded
/// mesh is validated and invalid input throws with the violated invariant.
SimplicialMesh load_mesh(const std::string& path);

/// Writes the same format (boundary section included).
void save_mesh(const SimplicialMesh& mesh, const std::string& path);

}  // namespace hodge
