#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "hodgeforms/mesh.hpp"

using hodge::SimplicialMesh;
using hodge::Vector;

namespace {

// V - E + F from the cell complex (2D) or V - E + F - C (3D).
long euler_characteristic(const SimplicialMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  std::set<std::array<int, 3>> tris;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int m = mesh.n + 1;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        int u = mesh.cells(c, a), v = mesh.cells(c, b);
        if (u > v) std::swap(u, v);
        edges.insert({u, v});
      }
    if (mesh.n == 3)
      for (int drop = 0; drop < 4; ++drop) {
        std::array<int, 3> t;
        int w = 0;
        for (int l = 0; l < 4; ++l)
          if (l != drop) t[w++] = mesh.cells(c, l);
        std::sort(t.begin(), t.end());
        tris.insert(t);
      }
  }
  long chi = mesh.num_vertices() - static_cast<long>(edges.size());
  if (mesh.n == 2) return chi + mesh.num_cells();
  return chi + static_cast<long>(tris.size()) - mesh.num_cells();
}

std::string temp_path(const char* name) {
  return std::string("/tmp/hodgeforms_test_") + name;
}

}  // namespace

TEST_CASE("square generator counts, area, corners") {
  const auto mesh = hodge::generate_square(0.0, std::numbers::pi, 4);
  CHECK(mesh.num_vertices() == 25);
  CHECK(mesh.num_cells() == 32);
  CHECK(mesh.num_boundary_faces() == 16);
  CHECK(mesh.total_volume() ==
        doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-13));
  CHECK(hodge::validate_mesh(mesh).all_pass());
  int corners = 0;
  for (const auto& vn : mesh.vertex_normals)
    if (vn.corner) ++corners;
  CHECK(corners == 4);
  CHECK(euler_characteristic(mesh) == 1);
  // boundary edge normals are axis directions
  for (int f = 0; f < mesh.num_boundary_faces(); ++f) {
    const double mx = mesh.face_normals.row(f).cwiseAbs().maxCoeff();
    CHECK(mx == doctest::Approx(1.0));
  }
}

TEST_CASE("disk generator boundary radii, area convergence, vertex normals") {
  for (int m : {4, 8}) {
    const auto mesh = hodge::generate_disk(1.0, m);
    CHECK(mesh.num_vertices() == 1 + 3 * m * (m + 1));
    CHECK(mesh.num_cells() == 6 * m * m);
    CHECK(hodge::validate_mesh(mesh).all_pass());
    CHECK(euler_characteristic(mesh) == 1);
    double max_angle = 0.0;
    for (const auto& vn : mesh.vertex_normals) {
      const Vector x = mesh.vertices.row(vn.vertex).transpose();
      CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(!vn.corner);
      const Vector radial = x / x.norm();
      max_angle = std::max(max_angle, std::acos(std::clamp(vn.normal.dot(radial), -1.0, 1.0)));
    }
    CHECK(max_angle <= 3.0 / m);
    // area of the inscribed polygon tends to pi from below at O(1/m^2)
    const double defect = std::numbers::pi - mesh.total_volume();
    CHECK(defect > 0.0);
    CHECK(defect < 8.0 / (m * m));
  }
}

TEST_CASE("annulus generator topology") {
  const auto mesh = hodge::generate_annulus(0.5, 1.0, 4);
  CHECK(hodge::validate_mesh(mesh).all_pass());
  CHECK(euler_characteristic(mesh) == 0);
  for (const auto& vn : mesh.vertex_normals) {
    const double r = mesh.vertices.row(vn.vertex).norm();
    const bool inner = std::abs(r - 0.5) < 1e-12;
    const bool outer = std::abs(r - 1.0) < 1e-12;
    CHECK((inner || outer));
    CHECK(!vn.corner);
    // outward means radial outward on the outer circle, inward on the inner
    const Vector radial = mesh.vertices.row(vn.vertex).transpose() / r;
    const double dot = vn.normal.dot(radial);
    if (outer) CHECK(dot > 0.9);
    if (inner) CHECK(dot < -0.9);
  }
}

TEST_CASE("cube generator counts and closure") {
  const auto mesh = hodge::generate_cube(1.0, 3);
  CHECK(mesh.num_vertices() == 64);
  CHECK(mesh.num_cells() == 6 * 27);
  CHECK(mesh.total_volume() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(hodge::validate_mesh(mesh).all_pass());
  CHECK(euler_characteristic(mesh) == 1);
  CHECK(mesh.num_boundary_faces() == 2 * 6 * 9);  // two triangles per square facet
  // face-interior vertices smooth, edge and corner vertices flagged
  int corners = 0;
  for (const auto& vn : mesh.vertex_normals)
    if (vn.corner) ++corners;
  // 8 cube corners + 12 edges with 2 interior vertices each
  CHECK(corners == 8 + 12 * 2);
}

TEST_CASE("generator argument validation") {
  CHECK_THROWS_AS(hodge::generate_square(1.0, 0.0, 4), hodge::Error);
  CHECK_THROWS_AS(hodge::generate_square(0.0, 1.0, 1), hodge::Error);
  CHECK_THROWS_AS(hodge::generate_disk(-1.0, 4), hodge::Error);
  CHECK_THROWS_AS(hodge::generate_annulus(0.5, 0.5, 4), hodge::Error);
  CHECK_THROWS_AS(hodge::generate_annulus(0.0, 1.0, 4), hodge::Error);
  CHECK_THROWS_AS(hodge::generate_cube(0.0, 2), hodge::Error);
}

TEST_CASE("ascii round trip preserves connectivity") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const std::string path = temp_path("roundtrip.mesh");
  hodge::save_mesh(mesh, path);
  const auto back = hodge::load_mesh(path);
  CHECK(back.n == mesh.n);
  CHECK((back.cells - mesh.cells).cwiseAbs().maxCoeff() == 0);
  CHECK((back.boundary_faces - mesh.boundary_faces).cwiseAbs().maxCoeff() == 0);
  CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("loader diagnostics carry line numbers and invariants") {
  const std::string path = temp_path("bad.mesh");
  {
    std::ofstream out(path);
    out << "dim 2\nvertices 3\n0 0\n1 0\nnot_a_number 1\n";
  }
  try {
    hodge::load_mesh(path);
    FAIL("expected parse error");
  } catch (const hodge::Error& e) {
    CHECK(std::string(e.what()).find(":5:") != std::string::npos);
    CHECK(e.code() == hodge::ErrorCode::io);
  }

  {
    std::ofstream out(path);
    // second triangle has negative orientation
    out << "# comment line\n"
        << "dim 2\nvertices 4\n0 0\n1 0\n1 1\n0 1\n"
        << "cells 2\n0 1 2\n0 3 2\n";
  }
  try {
    hodge::load_mesh(path);
    FAIL("expected orientation error");
  } catch (const hodge::Error& e) {
    CHECK(e.code() == hodge::ErrorCode::mesh_invalid);
    CHECK(std::string(e.what()).find("cell 1") != std::string::npos);
  }

  {
    std::ofstream out(path);
    // dangling boundary face 1-3 is not a facet of any cell
    out << "dim 2\nvertices 4\n0 0\n1 0\n1 1\n0 1\n"
        << "cells 2\n0 1 2\n0 2 3\n"
        << "boundary 4\n0 1\n1 2\n2 3\n1 3\n";
  }
  try {
    hodge::load_mesh(path);
    FAIL("expected closedness error");
  } catch (const hodge::Error& e) {
    CHECK(e.code() == hodge::ErrorCode::mesh_invalid);
    CHECK(std::string(e.what()).find("boundary") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("validate_mesh flags constructed defects") {
  auto mesh = hodge::generate_square(0.0, 1.0, 2);
  CHECK(hodge::validate_mesh(mesh).all_pass());

  SUBCASE("duplicated vertex") {
    mesh.vertices.row(0) = mesh.vertices.row(1);
    const auto diag = hodge::validate_mesh(mesh);
    bool dup_failed = false;
    for (const auto& c : diag.checks)
      if (c.name == "duplicate_vertices" && !c.pass) dup_failed = true;
    CHECK(dup_failed);
  }

  SUBCASE("perturbed normal") {
    mesh.face_normals(0, 0) += 0.1;
    const auto diag = hodge::validate_mesh(mesh);
    bool norm_failed = false;
    for (const auto& c : diag.checks)
      if (c.name == "normal_direction" && !c.pass) norm_failed = true;
    CHECK(norm_failed);
  }

  SUBCASE("inverted cell") {
    std::swap(mesh.cells(3, 0), mesh.cells(3, 1));
    const auto diag = hodge::validate_mesh(mesh);
    bool orient_failed = false;
    for (const auto& c : diag.checks)
      if (c.name == "cell_orientation" && !c.pass) {
        orient_failed = true;
        CHECK(c.detail.find("cell 3") != std::string::npos);
      }
    CHECK(orient_failed);
  }
}

TEST_CASE("interior vertices carry no normal entry") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 4);
  int interior = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.is_boundary_vertex(v)) ++interior;
  CHECK(interior == 9);
  for (const auto& vn : mesh.vertex_normals) CHECK(mesh.is_boundary_vertex(vn.vertex));
}
