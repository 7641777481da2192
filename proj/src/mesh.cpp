#include "hodgeforms/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace hodge {

namespace {

constexpr double kCornerDot = 0.93969262078590838;  // cos 20 deg

std::vector<int> sorted_key(const Eigen::MatrixXi& rows, int r) {
  std::vector<int> key(rows.cols());
  for (int c = 0; c < rows.cols(); ++c) key[c] = rows(r, c);
  std::sort(key.begin(), key.end());
  return key;
}

// Facet -> list of owning cells. A facet of cell c is the cell with local
// vertex l removed, keeping the remaining order.
std::map<std::vector<int>, std::vector<int>> facet_incidence(const SimplicialMesh& mesh) {
  std::map<std::vector<int>, std::vector<int>> map;
  const int n = mesh.n;
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int l = 0; l <= n; ++l) {
      std::vector<int> key;
      key.reserve(n);
      for (int v = 0; v <= n; ++v)
        if (v != l) key.push_back(mesh.cells(c, v));
      std::sort(key.begin(), key.end());
      map[key].push_back(c);
    }
  return map;
}

Vector face_plane_normal(const SimplicialMesh& mesh, int f) {
  if (mesh.n == 2) {
    const Vector t = (mesh.vertices.row(mesh.boundary_faces(f, 1)) -
                      mesh.vertices.row(mesh.boundary_faces(f, 0)))
                         .transpose();
    Vector nu(2);
    nu << t[1], -t[0];
    const double len = nu.norm();
    return len > 0 ? Vector(nu / len) : Vector(Vector::Zero(2));
  }
  const Vector a = (mesh.vertices.row(mesh.boundary_faces(f, 1)) -
                    mesh.vertices.row(mesh.boundary_faces(f, 0)))
                       .transpose();
  const Vector b = (mesh.vertices.row(mesh.boundary_faces(f, 2)) -
                    mesh.vertices.row(mesh.boundary_faces(f, 0)))
                       .transpose();
  Vector nu(3);
  nu << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  const double len = nu.norm();
  return len > 0 ? Vector(nu / len) : Vector(Vector::Zero(3));
}

// Interior angle of face f at vertex v; the 2D "angle" of a segment is 1.
double face_angle_at(const SimplicialMesh& mesh, int f, int v) {
  if (mesh.n == 2) return 1.0;
  int local = -1;
  for (int c = 0; c < 3; ++c)
    if (mesh.boundary_faces(f, c) == v) local = c;
  if (local < 0) return 0.0;
  const int o1 = mesh.boundary_faces(f, (local + 1) % 3);
  const int o2 = mesh.boundary_faces(f, (local + 2) % 3);
  const Vector e1 = (mesh.vertices.row(o1) - mesh.vertices.row(v)).transpose();
  const Vector e2 = (mesh.vertices.row(o2) - mesh.vertices.row(v)).transpose();
  const double c = e1.dot(e2) / (e1.norm() * e2.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

void orient_cells(SimplicialMesh& mesh) {
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (mesh.cell_volume(c) < 0) std::swap(mesh.cells(c, mesh.n - 1), mesh.cells(c, mesh.n));
}

}  // namespace

Matrix SimplicialMesh::cell_vertices(int c) const {
  Matrix V(n + 1, n);
  for (int l = 0; l <= n; ++l) V.row(l) = vertices.row(cells(c, l));
  return V;
}

Matrix SimplicialMesh::face_vertices(int f) const {
  Matrix V(n, n);
  for (int l = 0; l < n; ++l) V.row(l) = vertices.row(boundary_faces(f, l));
  return V;
}

double SimplicialMesh::cell_volume(int c) const {
  Matrix E(n, n);
  for (int l = 0; l < n; ++l)
    E.col(l) = (vertices.row(cells(c, l + 1)) - vertices.row(cells(c, 0))).transpose();
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return E.determinant() / fact;
}

double SimplicialMesh::mesh_size() const {
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c)
    for (int a = 0; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b)
        h = std::max(h, (vertices.row(cells(c, a)) - vertices.row(cells(c, b))).norm());
  return h;
}

double SimplicialMesh::total_volume() const {
  double v = 0.0;
  for (int c = 0; c < num_cells(); ++c) v += cell_volume(c);
  return v;
}

void finalize_mesh(SimplicialMesh& mesh) {
  if (mesh.n != 2 && mesh.n != 3)
    throw Error(ErrorCode::mesh_invalid, "finalize_mesh: dimension must be 2 or 3");
  if (mesh.cells.cols() != mesh.n + 1 || mesh.vertices.cols() != mesh.n)
    throw Error(ErrorCode::mesh_invalid, "finalize_mesh: inconsistent array shapes");
  const int V = mesh.num_vertices();
  const auto incidence = facet_incidence(mesh);

  if (mesh.boundary_faces.rows() == 0) {
    std::vector<std::vector<int>> faces;
    for (int c = 0; c < mesh.num_cells(); ++c)
      for (int l = 0; l <= mesh.n; ++l) {
        std::vector<int> face;
        for (int v = 0; v <= mesh.n; ++v)
          if (v != l) face.push_back(mesh.cells(c, v));
        std::vector<int> key = face;
        std::sort(key.begin(), key.end());
        if (incidence.at(key).size() == 1) faces.push_back(face);
      }
    mesh.boundary_faces.resize(static_cast<int>(faces.size()), mesh.n);
    for (size_t f = 0; f < faces.size(); ++f)
      for (int c = 0; c < mesh.n; ++c) mesh.boundary_faces(static_cast<int>(f), c) = faces[f][c];
  }

  const int F = mesh.num_boundary_faces();
  mesh.face_cell.assign(F, -1);
  mesh.face_normals = Matrix::Zero(F, mesh.n);
  for (int f = 0; f < F; ++f) {
    const auto it = incidence.find(sorted_key(mesh.boundary_faces, f));
    if (it == incidence.end() || it->second.size() != 1) continue;
    const int c = it->second.front();
    mesh.face_cell[f] = c;
    Vector nu = face_plane_normal(mesh, f);
    Vector fc = Vector::Zero(mesh.n), cc = Vector::Zero(mesh.n);
    for (int l = 0; l < mesh.n; ++l)
      fc += mesh.vertices.row(mesh.boundary_faces(f, l)).transpose();
    fc /= mesh.n;
    for (int l = 0; l <= mesh.n; ++l) cc += mesh.vertices.row(mesh.cells(c, l)).transpose();
    cc /= mesh.n + 1;
    if (nu.dot(fc - cc) < 0) nu = -nu;
    mesh.face_normals.row(f) = nu.transpose();
  }

  mesh.normal_of.assign(V, -1);
  mesh.vertex_normals.clear();
  std::vector<std::vector<int>> vertex_faces(V);
  for (int f = 0; f < F; ++f)
    for (int l = 0; l < mesh.n; ++l) vertex_faces[mesh.boundary_faces(f, l)].push_back(f);
  for (int v = 0; v < V; ++v) {
    if (vertex_faces[v].empty()) continue;
    VertexNormal vn;
    vn.vertex = v;
    vn.faces = vertex_faces[v];
    Vector avg = Vector::Zero(mesh.n);
    for (const int f : vn.faces)
      avg += face_angle_at(mesh, f, v) * mesh.face_normals.row(f).transpose();
    const double len = avg.norm();
    vn.normal = len > 1e-14 ? Vector(avg / len) : Vector(Vector::Zero(mesh.n));
    for (size_t a = 0; a < vn.faces.size() && !vn.corner; ++a)
      for (size_t b = a + 1; b < vn.faces.size() && !vn.corner; ++b)
        if (mesh.face_normals.row(vn.faces[a]).dot(mesh.face_normals.row(vn.faces[b])) <
            kCornerDot)
          vn.corner = true;
    mesh.normal_of[v] = static_cast<int>(mesh.vertex_normals.size());
    mesh.vertex_normals.push_back(std::move(vn));
  }
}

SimplicialMesh generate_square(double a, double b, int m) {
  if (!(b > a) || m < 2)
    throw Error(ErrorCode::invalid_argument, "generate_square: need b > a and m >= 2");
  SimplicialMesh mesh;
  mesh.n = 2;
  const double h = (b - a) / m;
  mesh.vertices.resize((m + 1) * (m + 1), 2);
  const auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) {
      mesh.vertices(vid(i, j), 0) = a + i * h;
      mesh.vertices(vid(i, j), 1) = a + j * h;
    }
  mesh.cells.resize(2 * m * m, 3);
  int c = 0;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.cells.row(c++) << v00, v10, v11;
      mesh.cells.row(c++) << v00, v11, v01;
    }
  orient_cells(mesh);
  finalize_mesh(mesh);
  return mesh;
}

SimplicialMesh generate_disk(double r, int m) {
  if (!(r > 0) || m < 2)
    throw Error(ErrorCode::invalid_argument, "generate_disk: need r > 0 and m >= 2");
  SimplicialMesh mesh;
  mesh.n = 2;
  const auto ring_start = [](int j) { return 1 + 3 * j * (j - 1); };
  mesh.vertices.resize(ring_start(m + 1), 2);
  mesh.vertices.row(0).setZero();
  for (int j = 1; j <= m; ++j) {
    const double rj = r * j / m;
    for (int i = 0; i < 6 * j; ++i) {
      const double th = 2.0 * std::numbers::pi * i / (6 * j);
      mesh.vertices(ring_start(j) + i, 0) = rj * std::cos(th);
      mesh.vertices(ring_start(j) + i, 1) = rj * std::sin(th);
    }
  }
  mesh.cells.resize(6 * m * m, 3);
  int c = 0;
  for (int i = 0; i < 6; ++i) mesh.cells.row(c++) << 0, 1 + i, 1 + (i + 1) % 6;
  for (int j = 1; j < m; ++j)
    for (int s = 0; s < 6; ++s) {
      const auto inner = [&](int t) { return ring_start(j) + (s * j + t) % (6 * j); };
      const auto outer = [&](int t) {
        return ring_start(j + 1) + (s * (j + 1) + t) % (6 * (j + 1));
      };
      for (int t = 0; t <= j; ++t) mesh.cells.row(c++) << inner(t), outer(t), outer(t + 1);
      for (int t = 0; t < j; ++t) mesh.cells.row(c++) << inner(t), outer(t + 1), inner(t + 1);
    }
  orient_cells(mesh);
  finalize_mesh(mesh);
  return mesh;
}

SimplicialMesh generate_annulus(double r0, double r1, int m) {
  if (!(r0 > 0) || !(r1 > r0) || m < 2)
    throw Error(ErrorCode::invalid_argument, "generate_annulus: need 0 < r0 < r1 and m >= 2");
  SimplicialMesh mesh;
  mesh.n = 2;
  const double dr = (r1 - r0) / m;
  const int N = std::max(8, static_cast<int>(std::ceil(std::numbers::pi * (r0 + r1) / dr)));
  mesh.vertices.resize(N * (m + 1), 2);
  const auto vid = [N](int i, int j) { return j * N + i; };
  for (int j = 0; j <= m; ++j) {
    const double rj = r0 + j * dr;
    for (int i = 0; i < N; ++i) {
      const double th = 2.0 * std::numbers::pi * i / N;
      mesh.vertices(vid(i, j), 0) = rj * std::cos(th);
      mesh.vertices(vid(i, j), 1) = rj * std::sin(th);
    }
  }
  mesh.cells.resize(2 * N * m, 3);
  int c = 0;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < N; ++i) {
      const int i1 = (i + 1) % N;
      mesh.cells.row(c++) << vid(i, j), vid(i1, j), vid(i1, j + 1);
      mesh.cells.row(c++) << vid(i, j), vid(i1, j + 1), vid(i, j + 1);
    }
  orient_cells(mesh);
  finalize_mesh(mesh);
  return mesh;
}

SimplicialMesh generate_cube(double a, int m) {
  if (!(a > 0) || m < 2)
    throw Error(ErrorCode::invalid_argument, "generate_cube: need a > 0 and m >= 2");
  SimplicialMesh mesh;
  mesh.n = 3;
  const double h = a / m;
  const int s = m + 1;
  mesh.vertices.resize(s * s * s, 3);
  const auto vid = [s](int i, int j, int k) { return (k * s + j) * s + i; };
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        mesh.vertices(vid(i, j, k), 0) = i * h;
        mesh.vertices(vid(i, j, k), 1) = j * h;
        mesh.vertices(vid(i, j, k), 2) = k * h;
      }
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  mesh.cells.resize(6 * m * m * m, 4);
  int c = 0;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        for (const auto& p : perms) {
          int pos[3] = {i, j, k};
          mesh.cells(c, 0) = vid(pos[0], pos[1], pos[2]);
          for (int step = 0; step < 3; ++step) {
            ++pos[p[step]];
            mesh.cells(c, step + 1) = vid(pos[0], pos[1], pos[2]);
          }
          ++c;
        }
  orient_cells(mesh);
  finalize_mesh(mesh);
  return mesh;
}

bool MeshDiagnostics::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string MeshDiagnostics::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "pass " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

MeshDiagnostics validate_mesh(const SimplicialMesh& mesh) {
  MeshDiagnostics diag;
  const int V = mesh.num_vertices(), n = mesh.n;

  {
    MeshCheck chk{"index_range", true, 0.0, ""};
    for (int c = 0; c < mesh.num_cells() && chk.pass; ++c)
      for (int l = 0; l <= n; ++l)
        if (mesh.cells(c, l) < 0 || mesh.cells(c, l) >= V) {
          chk.pass = false;
          chk.detail = "cell " + std::to_string(c) + " references vertex " +
                       std::to_string(mesh.cells(c, l));
        }
    for (int f = 0; f < mesh.num_boundary_faces() && chk.pass; ++f)
      for (int l = 0; l < n; ++l)
        if (mesh.boundary_faces(f, l) < 0 || mesh.boundary_faces(f, l) >= V) {
          chk.pass = false;
          chk.detail = "face " + std::to_string(f) + " references vertex " +
                       std::to_string(mesh.boundary_faces(f, l));
        }
    diag.checks.push_back(chk);
    if (!chk.pass) return diag;  // later checks would index out of range
  }

  {
    MeshCheck chk{"cell_orientation", true, 0.0, ""};
    double worst = std::numeric_limits<double>::infinity();
    int worst_cell = -1;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const double vol = mesh.cell_volume(c);
      if (vol < worst) {
        worst = vol;
        worst_cell = c;
      }
    }
    chk.worst = worst;
    if (!(worst > 0)) {
      chk.pass = false;
      chk.detail = "cell " + std::to_string(worst_cell) + " has signed volume " +
                   std::to_string(worst);
    }
    diag.checks.push_back(chk);
  }

  const auto incidence = facet_incidence(mesh);
  {
    MeshCheck chk{"facet_incidence", true, 0.0, ""};
    for (const auto& [key, cells] : incidence) {
      chk.worst = std::max(chk.worst, static_cast<double>(cells.size()));
      if (cells.size() > 2 && chk.pass) {
        chk.pass = false;
        chk.detail = "a facet of cell " + std::to_string(cells.front()) + " is shared by " +
                     std::to_string(cells.size()) + " cells";
      }
    }
    diag.checks.push_back(chk);
  }

  {
    MeshCheck chk{"boundary_closure", true, 0.0, ""};
    std::map<std::vector<int>, int> listed;
    for (int f = 0; f < mesh.num_boundary_faces(); ++f)
      ++listed[sorted_key(mesh.boundary_faces, f)];
    for (const auto& [key, cells] : incidence)
      if (cells.size() == 1 && listed.find(key) == listed.end() && chk.pass) {
        chk.pass = false;
        chk.detail = "unlisted boundary facet of cell " + std::to_string(cells.front());
      }
    for (int f = 0; f < mesh.num_boundary_faces() && chk.pass; ++f) {
      const auto it = incidence.find(sorted_key(mesh.boundary_faces, f));
      if (it == incidence.end() || it->second.size() != 1) {
        chk.pass = false;
        chk.detail = "face " + std::to_string(f) + " is not a boundary facet of any cell";
      }
    }
    diag.checks.push_back(chk);
  }

  {
    MeshCheck chk{"normal_direction", true, 1.0, ""};
    for (int f = 0; f < mesh.num_boundary_faces(); ++f) {
      if (mesh.face_normals.rows() != mesh.num_boundary_faces() ||
          mesh.face_cell.size() != static_cast<size_t>(mesh.num_boundary_faces())) {
        chk.pass = false;
        chk.detail = "face geometry not computed (run finalize_mesh)";
        break;
      }
      const double len = mesh.face_normals.row(f).norm();
      if (std::abs(len - 1.0) > 1e-12) {
        chk.pass = false;
        chk.detail = "face " + std::to_string(f) + " normal has length " + std::to_string(len);
        break;
      }
      if (mesh.face_cell[f] < 0) continue;
      Vector fc = Vector::Zero(n), cc = Vector::Zero(n);
      for (int l = 0; l < n; ++l)
        fc += mesh.vertices.row(mesh.boundary_faces(f, l)).transpose();
      fc /= n;
      for (int l = 0; l <= n; ++l)
        cc += mesh.vertices.row(mesh.cells(mesh.face_cell[f], l)).transpose();
      cc /= n + 1;
      const double dot = mesh.face_normals.row(f).dot((fc - cc).transpose());
      chk.worst = std::min(chk.worst, dot);
      if (!(dot > 0)) {
        chk.pass = false;
        chk.detail = "face " + std::to_string(f) + " normal points inward";
        break;
      }
    }
    diag.checks.push_back(chk);
  }

  {
    MeshCheck chk{"duplicate_vertices", true,
                  std::numeric_limits<double>::infinity(), ""};
    double diam = 0.0;
    for (int d = 0; d < n; ++d)
      diam = std::max(diam, mesh.vertices.col(d).maxCoeff() - mesh.vertices.col(d).minCoeff());
    std::vector<int> order(V);
    for (int v = 0; v < V; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      for (int d = 0; d < n; ++d) {
        if (mesh.vertices(a, d) < mesh.vertices(b, d)) return true;
        if (mesh.vertices(a, d) > mesh.vertices(b, d)) return false;
      }
      return a < b;
    });
    for (int v = 0; v + 1 < V; ++v) {
      const double dist =
          (mesh.vertices.row(order[v]) - mesh.vertices.row(order[v + 1])).norm();
      chk.worst = std::min(chk.worst, dist);
      if (dist <= 1e-12 * std::max(1.0, diam)) {
        chk.pass = false;
        chk.detail = "vertices " + std::to_string(order[v]) + " and " +
                     std::to_string(order[v + 1]) + " coincide";
        break;
      }
    }
    diag.checks.push_back(chk);
  }

  {
    MeshCheck chk{"vertex_normals", true, 0.0, ""};
    std::vector<char> on_boundary(V, 0);
    for (int f = 0; f < mesh.num_boundary_faces(); ++f)
      for (int l = 0; l < n; ++l) on_boundary[mesh.boundary_faces(f, l)] = 1;
    for (int v = 0; v < V && chk.pass; ++v) {
      const bool has = static_cast<int>(mesh.normal_of.size()) == V && mesh.normal_of[v] >= 0;
      if (on_boundary[v] && !has) {
        chk.pass = false;
        chk.detail = "boundary vertex " + std::to_string(v) + " has no normal entry";
      } else if (!on_boundary[v] && has) {
        chk.pass = false;
        chk.detail = "interior vertex " + std::to_string(v) + " has a normal entry";
      } else if (has) {
        const double len = mesh.vertex_normals[mesh.normal_of[v]].normal.norm();
        if (std::abs(len - 1.0) > 1e-10) {
          chk.pass = false;
          chk.detail = "vertex " + std::to_string(v) + " normal has length " +
                       std::to_string(len);
        }
      }
    }
    diag.checks.push_back(chk);
  }

  return diag;
}

SimplicialMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "load_mesh: cannot open " + path);
  SimplicialMesh mesh;
  int lineno = 0;
  std::string line;
  const auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": " + msg);
  };
  const auto next_tokens = [&](std::istringstream& ss) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      ss.clear();
      ss.str(line);
      std::string probe;
      if (ss >> probe) {
        ss.clear();
        ss.str(line);
        return true;
      }
    }
    return false;
  };

  std::istringstream ss;
  std::string word;
  if (!next_tokens(ss) || !(ss >> word) || word != "dim" || !(ss >> mesh.n))
    fail("expected 'dim <n>'");
  if (mesh.n != 2 && mesh.n != 3) fail("dim must be 2 or 3");

  int count = 0;
  if (!next_tokens(ss) || !(ss >> word) || word != "vertices" || !(ss >> count) || count < 1)
    fail("expected 'vertices <count>'");
  mesh.vertices.resize(count, mesh.n);
  for (int v = 0; v < count; ++v) {
    if (!next_tokens(ss)) fail("unexpected end of file in vertex list");
    for (int d = 0; d < mesh.n; ++d)
      if (!(ss >> mesh.vertices(v, d))) fail("expected " + std::to_string(mesh.n) +
                                             " coordinates");
  }

  if (!next_tokens(ss) || !(ss >> word) || word != "cells" || !(ss >> count) || count < 1)
    fail("expected 'cells <count>'");
  mesh.cells.resize(count, mesh.n + 1);
  for (int c = 0; c < count; ++c) {
    if (!next_tokens(ss)) fail("unexpected end of file in cell list");
    for (int l = 0; l <= mesh.n; ++l)
      if (!(ss >> mesh.cells(c, l))) fail("expected " + std::to_string(mesh.n + 1) +
                                          " vertex indices");
  }

  if (next_tokens(ss)) {
    if (!(ss >> word) || word != "boundary" || !(ss >> count) || count < 0)
      fail("expected 'boundary <count>' or end of file");
    mesh.boundary_faces.resize(count, mesh.n);
    for (int f = 0; f < count; ++f) {
      if (!next_tokens(ss)) fail("unexpected end of file in boundary list");
      for (int l = 0; l < mesh.n; ++l)
        if (!(ss >> mesh.boundary_faces(f, l)))
          fail("expected " + std::to_string(mesh.n) + " vertex indices");
    }
  }

  {
    // index sanity before finalize touches coordinates
    const int V = mesh.num_vertices();
    for (int c = 0; c < mesh.num_cells(); ++c)
      for (int l = 0; l <= mesh.n; ++l)
        if (mesh.cells(c, l) < 0 || mesh.cells(c, l) >= V)
          throw Error(ErrorCode::mesh_invalid,
                      "load_mesh: cell " + std::to_string(c) + " references vertex " +
                          std::to_string(mesh.cells(c, l)) + " out of range");
    for (int f = 0; f < mesh.num_boundary_faces(); ++f)
      for (int l = 0; l < mesh.n; ++l)
        if (mesh.boundary_faces(f, l) < 0 || mesh.boundary_faces(f, l) >= V)
          throw Error(ErrorCode::mesh_invalid,
                      "load_mesh: boundary face " + std::to_string(f) +
                          " references vertex out of range");
  }

  finalize_mesh(mesh);
  const MeshDiagnostics diag = validate_mesh(mesh);
  if (!diag.all_pass()) {
    std::string msg = "load_mesh: invalid mesh:\n" + diag.summary();
    throw Error(ErrorCode::mesh_invalid, msg);
  }
  return mesh;
}

void save_mesh(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "save_mesh: cannot open " + path);
  out << std::setprecision(17);
  out << "dim " << mesh.n << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int d = 0; d < mesh.n; ++d) out << (d ? " " : "") << mesh.vertices(v, d);
    out << "\n";
  }
  out << "cells " << mesh.num_cells() << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int l = 0; l <= mesh.n; ++l) out << (l ? " " : "") << mesh.cells(c, l);
    out << "\n";
  }
  out << "boundary " << mesh.num_boundary_faces() << "\n";
  for (int f = 0; f < mesh.num_boundary_faces(); ++f) {
    for (int l = 0; l < mesh.n; ++l) out << (l ? " " : "") << mesh.boundary_faces(f, l);
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::io, "save_mesh: write failure on " + path);
}

}  // namespace hodge
