#include <doctest.h>

#include <numbers>

#include "hodgeforms/space.hpp"

using hodge::BcKind;
using hodge::binomial;
using hodge::build_space;
using hodge::constraint_residual;
using hodge::DofSpace;
using hodge::FormField;
using hodge::interpolate;
using hodge::Matrix;
using hodge::OperatorField;
using hodge::SimplicialMesh;
using hodge::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

int find_vertex(const SimplicialMesh& mesh, double x, double y) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (std::abs(mesh.vertices(v, 0) - x) < 1e-12 && std::abs(mesh.vertices(v, 1) - y) < 1e-12)
      return v;
  return -1;
}

double orthonormality_defect(const DofSpace& sp) {
  const Matrix G = Matrix(sp.P.transpose() * sp.P);
  return (G - Matrix::Identity(sp.free_dofs, sp.free_dofs)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("square tangential 1-forms: admissible spans and counts") {
  const auto mesh = hodge::generate_square(0.0, kPi, 4);
  const auto sp = build_space(mesh, 1, BcKind::tangential);
  CHECK(sp.comp == 2);
  CHECK(sp.full_dofs == 50);
  // 9 interior vertices keep both components, 12 edge vertices keep one,
  // 4 corners keep none.
  CHECK(sp.free_dofs == 30);
  CHECK(orthonormality_defect(sp) < 1e-12);
  CHECK(sp.warning.empty());

  const int bottom = find_vertex(mesh, kPi / 2, 0.0);
  REQUIRE(bottom >= 0);
  const Matrix& Ub = sp.vertex_basis[bottom];
  REQUIRE(Ub.cols() == 1);
  CHECK(std::abs(Ub(0, 0)) < 1e-12);  // nu ^ xi = 0 kills the tangential part
  CHECK(std::abs(Ub(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));

  const int left = find_vertex(mesh, 0.0, kPi / 2);
  REQUIRE(left >= 0);
  const Matrix& Ul = sp.vertex_basis[left];
  REQUIRE(Ul.cols() == 1);
  CHECK(std::abs(Ul(1, 0)) < 1e-12);
  CHECK(std::abs(Ul(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));

  const int corner = find_vertex(mesh, 0.0, 0.0);
  REQUIRE(corner >= 0);
  CHECK(sp.vertex_basis[corner].cols() == 0);

  // vectors built through P satisfy the constraints, generic nodal data does not
  Vector y = Vector::LinSpaced(sp.free_dofs, -1.0, 2.0);
  CHECK(constraint_residual(sp, sp.to_full(y)) < 1e-12);
  const auto ones =
      FormField::make(2, 1, [](const Vector&) { return Vector(Vector::Ones(2)); });
  CHECK(constraint_residual(sp, interpolate(sp, ones)) > 0.5);
}

TEST_CASE("square normal 1-forms keep the tangent direction") {
  const auto mesh = hodge::generate_square(0.0, kPi, 4);
  const auto sp = build_space(mesh, 1, BcKind::normal);
  CHECK(sp.free_dofs == 30);
  const int bottom = find_vertex(mesh, kPi / 4, 0.0);
  REQUIRE(bottom >= 0);
  const Matrix& Ub = sp.vertex_basis[bottom];
  REQUIRE(Ub.cols() == 1);
  CHECK(std::abs(Ub(1, 0)) < 1e-12);  // nu _| xi = 0 kills the normal part
  const int corner = find_vertex(mesh, kPi, kPi);
  REQUIRE(corner >= 0);
  CHECK(sp.vertex_basis[corner].cols() == 0);
}

TEST_CASE("degenerate degrees") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 4);
  SUBCASE("0-forms tangential clamp the boundary") {
    const auto sp = build_space(mesh, 0, BcKind::tangential);
    CHECK(sp.free_dofs == 9);
    CHECK_FALSE(sp.warning.empty());
  }
  SUBCASE("0-forms normal are unconstrained") {
    const auto sp = build_space(mesh, 0, BcKind::normal);
    CHECK(sp.free_dofs == sp.full_dofs);
    CHECK(orthonormality_defect(sp) < 1e-15);
  }
  SUBCASE("top forms tangential are unconstrained") {
    const auto sp = build_space(mesh, 2, BcKind::tangential);
    CHECK(sp.free_dofs == 25);
  }
  SUBCASE("top forms normal clamp the boundary") {
    const auto sp = build_space(mesh, 2, BcKind::normal);
    CHECK(sp.free_dofs == 9);
  }
  SUBCASE("dirichlet clamps every component without a warning") {
    const auto sp = build_space(mesh, 1, BcKind::dirichlet);
    CHECK(sp.free_dofs == 18);
    CHECK(sp.warning.empty());
  }
  SUBCASE("none keeps everything") {
    const auto sp = build_space(mesh, 1, BcKind::none);
    CHECK(sp.free_dofs == sp.full_dofs);
  }
  CHECK_THROWS_AS(build_space(mesh, 3, BcKind::none), hodge::Error);
  CHECK_THROWS_AS(build_space(mesh, -1, BcKind::none), hodge::Error);
}

TEST_CASE("disk normal 1-forms: tangent spans on the curved boundary") {
  const auto mesh = hodge::generate_disk(1.0, 4);
  const auto sp = build_space(mesh, 1, BcKind::normal);
  int boundary = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.is_boundary_vertex(v)) continue;
    ++boundary;
    const Matrix& U = sp.vertex_basis[v];
    REQUIRE(U.cols() == 1);
    const Vector radial = mesh.vertices.row(v).transpose().normalized();
    // uniform arcs make the averaged vertex normal exactly radial
    CHECK(std::abs(U.col(0).dot(radial)) < 1e-10);
  }
  CHECK(boundary == 24);
  CHECK(sp.free_dofs == 2 * (61 - 24) + 24);

  // the rotational field (-y, x) has zero normal trace on the exact circle
  const auto rot = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << -x[1], x[0];
    return v;
  });
  CHECK(constraint_residual(sp, interpolate(sp, rot)) < 1e-10);
}

TEST_CASE("cube admissible dimensions by vertex class") {
  const auto mesh = hodge::generate_cube(1.0, 3);
  // a face-interior vertex and an edge vertex of the unit cube
  int face_v = -1, edge_v = -1;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.is_boundary_vertex(v)) continue;
    int on = 0;
    for (int d = 0; d < 3; ++d) {
      const double c = mesh.vertices(v, d);
      if (std::abs(c) < 1e-12 || std::abs(c - 1.0) < 1e-12) ++on;
    }
    if (on == 1 && face_v < 0) face_v = v;
    if (on == 2 && edge_v < 0) edge_v = v;
  }
  REQUIRE(face_v >= 0);
  REQUIRE(edge_v >= 0);
  CHECK_FALSE(mesh.vertex_normals[mesh.normal_of[face_v]].corner);
  CHECK(mesh.vertex_normals[mesh.normal_of[edge_v]].corner);

  for (int k = 1; k <= 2; ++k) {
    const auto st = build_space(mesh, k, BcKind::tangential);
    const auto sn = build_space(mesh, k, BcKind::normal);
    CHECK(st.vertex_basis[face_v].cols() == binomial(2, k - 1));
    CHECK(sn.vertex_basis[face_v].cols() == binomial(2, k));
  }
  // at a geometric edge the tangential 1-form space dies, the normal one
  // keeps exactly the edge direction
  const auto st1 = build_space(mesh, 1, BcKind::tangential);
  const auto sn1 = build_space(mesh, 1, BcKind::normal);
  CHECK(st1.vertex_basis[edge_v].cols() == 0);
  REQUIRE(sn1.vertex_basis[edge_v].cols() == 1);
  const Vector dir = sn1.vertex_basis[edge_v].col(0);
  int free_axes = 0;
  for (int d = 0; d < 3; ++d)
    if (std::abs(std::abs(dir[d]) - 1.0) < 1e-10) ++free_axes;
  CHECK(free_axes == 1);
}

TEST_CASE("normal_b bends the admissible span by B") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  Matrix B(2, 2);
  B << 1.0, 0.0, 0.5, 1.0;
  const auto Bf = OperatorField::constant(2, 1, 1, B);
  const auto sp = build_space(mesh, 1, BcKind::normal_b, &Bf);
  const int bottom = find_vertex(mesh, 1.0 / 3.0, 0.0);
  REQUIRE(bottom >= 0);
  const Matrix& U = sp.vertex_basis[bottom];
  REQUIRE(U.cols() == 1);
  // nu = (0,-1): constraint (B xi)_2 = 0.5 xi_1 + xi_2 = 0
  Vector expect(2);
  expect << 1.0, -0.5;
  expect.normalize();
  CHECK(std::abs(std::abs(U.col(0).dot(expect)) - 1.0) < 1e-12);

  CHECK_THROWS_AS(build_space(mesh, 1, BcKind::normal_b), hodge::Error);
  const auto wrong = OperatorField::identity(2, 2);
  CHECK_THROWS_AS(build_space(mesh, 1, BcKind::normal_b, &wrong), hodge::Error);
}

TEST_CASE("interpolate places nodal values vertex-major") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 2);
  const auto sp = build_space(mesh, 1, BcKind::none);
  const auto field = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << x[0] + 2.0 * x[1], x[0] * x[1];
    return v;
  });
  const Vector full = interpolate(sp, field);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vector expect = field(mesh.vertices.row(v).transpose());
    CHECK((sp.value_at(full, v) - expect).norm() < 1e-15);
  }
  const auto bad = FormField::zero(2, 2);
  CHECK_THROWS_AS(interpolate(sp, bad), hodge::Error);
}
