#include <doctest.h>

#include <numbers>

#include "hodgeforms/assembly.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using hodge::AssemblyMode;
using hodge::BcKind;
using hodge::binomial;
using hodge::build_space;
using hodge::FormField;
using hodge::interior_matrix;
using hodge::interpolate;
using hodge::Matrix;
using hodge::OperatorField;
using hodge::SimplicialMesh;
using hodge::SpMat;
using hodge::Vector;
using hodge::wedge_matrix;

namespace {

constexpr double kPi = std::numbers::pi;

// Hat-function gradients of one cell, rows 0..n.
Matrix hat_gradients(const SimplicialMesh& mesh, int c) {
  const int n = mesh.n;
  const Matrix verts = mesh.cell_vertices(c);
  Matrix E(n, n);
  for (int i = 0; i < n; ++i) E.col(i) = (verts.row(i + 1) - verts.row(0)).transpose();
  const Matrix Einv = E.inverse();
  Matrix g(n + 1, n);
  for (int i = 1; i <= n; ++i) g.row(i) = Einv.row(i - 1);
  g.row(0) = -g.middleRows(1, n).colwise().sum();
  return g;
}

// Textbook P1 scalar stiffness, assembled independently of the library path.
Matrix scalar_stiffness(const SimplicialMesh& mesh) {
  const int V = mesh.num_vertices();
  Matrix K = Matrix::Zero(V, V);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Matrix g = hat_gradients(mesh, c);
    const double vol = mesh.cell_volume(c);
    for (int a = 0; a <= mesh.n; ++a)
      for (int b = 0; b <= mesh.n; ++b)
        K(mesh.cells(c, a), mesh.cells(c, b)) += vol * g.row(a).dot(g.row(b));
  }
  return K;
}

SimplicialMesh reference_triangle() {
  SimplicialMesh mesh;
  mesh.n = 2;
  mesh.vertices.resize(3, 2);
  mesh.vertices << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  mesh.cells.resize(1, 3);
  mesh.cells << 0, 1, 2;
  hodge::finalize_mesh(mesh);
  return mesh;
}

}  // namespace

TEST_CASE("0-form stiffness with identity coefficients is the scalar laplacian") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 0, BcKind::none);
  const auto A = OperatorField::identity(2, 1);
  const auto B = OperatorField::identity(2, 0);
  const Matrix K = Matrix(hodge::assemble_stiffness_full(sp, A, B));
  const Matrix ref = scalar_stiffness(mesh);
  CHECK((K - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("top-degree stiffness carries only the codifferential term") {
  // for n = 2, k = 2 the energy of u e^12 is again |grad u|^2
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 2, BcKind::none);
  const auto A = OperatorField::identity(2, 3);  // acts on the zero space
  const auto B = OperatorField::identity(2, 2);
  const Matrix K = Matrix(hodge::assemble_stiffness_full(sp, A, B));
  CHECK((K - scalar_stiffness(mesh)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("one-cell 1-form stiffness matches the direct d/delta energy") {
  const auto mesh = reference_triangle();
  const auto sp = build_space(mesh, 1, BcKind::none);
  Matrix Am(1, 1);
  Am << 1.7;
  const auto A = OperatorField::constant(2, 2, 2, Am);
  Matrix Bm(2, 2);
  Bm << 1.2, 0.3, 0.3, 0.9;
  const auto B = OperatorField::constant(2, 1, 1, Bm);
  const Matrix K = Matrix(hodge::assemble_stiffness_full(sp, A, B));

  const Matrix g = hat_gradients(mesh, 0);
  const double vol = 0.5;
  Matrix ref = Matrix::Zero(6, 6);
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i) {
      // d(phi_a B e_i) needs B inside; the form uses d u with u the field,
      // so the trial column is (a, i): d = grad phi_a ^ e_i,
      // delta(B u) = -iota(grad phi_a) B e_i
      const Vector du_ai = wedge_matrix(2, 1, g.row(a).transpose()) * Vector::Unit(2, i);
      const Vector del_ai =
          -interior_matrix(2, 1, g.row(a).transpose()) * (Bm * Vector::Unit(2, i));
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 2; ++j) {
          const Vector du_bj = wedge_matrix(2, 1, g.row(b).transpose()) * Vector::Unit(2, j);
          const Vector del_bj =
              -interior_matrix(2, 1, g.row(b).transpose()) * (Bm * Vector::Unit(2, j));
          ref(a * 2 + i, b * 2 + j) +=
              vol * ((Am * du_bj).dot(du_ai) + del_bj.dot(del_ai));
        }
    }
  CHECK((K - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("mass matrix integrates exactly") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 4);
  const auto sp = build_space(mesh, 1, BcKind::none);
  SUBCASE("constant B against a constant field") {
    Matrix Bm(2, 2);
    Bm << 2.0, 0.5, 0.5, 1.0;
    const auto B = OperatorField::constant(2, 1, 1, Bm);
    const SpMat M = hodge::assemble_mass_full(sp, B);
    Vector c(2);
    c << 0.7, -0.4;
    const Vector u = interpolate(sp, FormField::constant(hodge::Form(2, 1, c)));
    CHECK(u.dot(M * u) == doctest::Approx(c.dot(Bm * c)).epsilon(1e-13));
  }
  SUBCASE("smooth B against a constant field") {
    const auto B = OperatorField::scalar(2, 1, [](const Vector& x) {
      return 1.0 + x[0] * x[0];
    });
    const SpMat M = hodge::assemble_mass_full(sp, B);
    const Vector u =
        interpolate(sp, FormField::constant(hodge::Form(2, 1, Vector::Unit(2, 0))));
    // int over the unit square of (1 + x^2) = 4/3
    CHECK(u.dot(M * u) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  }
  SUBCASE("0-form mass sums to the area") {
    const auto sp0 = build_space(mesh, 0, BcKind::none);
    const SpMat M = hodge::assemble_mass_full(sp0, OperatorField::identity(2, 0));
    const Vector ones = Vector::Ones(sp0.full_dofs);
    CHECK(ones.dot(M * ones) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("load vector: f against mass, F against elementwise d") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 1, BcKind::none);
  const auto B = OperatorField::identity(2, 1);
  SUBCASE("constant f equals -M times its interpolant") {
    Vector c(2);
    c << 1.3, -0.2;
    const auto f = FormField::constant(hodge::Form(2, 1, c));
    const Vector load = hodge::assemble_load_full(sp, f, FormField());
    const SpMat M = hodge::assemble_mass_full(sp, B);
    const Vector ref = -(M * interpolate(sp, f));
    CHECK((load - ref).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("F pairs with the derivative of any nodal field") {
    Vector C1(1);
    C1 << 0.8;
    const auto F = FormField::constant(hodge::Form(2, 2, C1));
    const Vector load = hodge::assemble_load_full(sp, FormField(), F);
    Vector u(sp.full_dofs);
    for (long i = 0; i < u.size(); ++i) u[i] = std::sin(0.37 * i + 0.1);
    const auto der = hodge::cell_derivatives(sp, u, B);
    double ref = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c)
      ref += mesh.cell_volume(c) * C1[0] * der.d(c, 0);
    CHECK(load.dot(u) == doctest::Approx(ref).epsilon(1e-12));
  }
  SUBCASE("degree mismatch throws") {
    CHECK_THROWS_AS(hodge::assemble_load_full(sp, FormField::zero(2, 2), FormField()),
                    hodge::Error);
    CHECK_THROWS_AS(hodge::assemble_load_full(sp, FormField(), FormField::zero(2, 1)),
                    hodge::Error);
  }
}

TEST_CASE("interpolated eigenfunction nearly solves the discrete system") {
  // omega = cos x1 sin x2 e1 on [0,pi]^2 has tangential trace zero and
  // satisfies the weak identity a(omega, theta) = 2 (omega, theta)
  const auto field = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::cos(x[0]) * std::sin(x[1]), 0.0;
    return v;
  });
  const auto A = OperatorField::identity(2, 2);
  const auto B = OperatorField::identity(2, 1);
  double prev = 0.0;
  for (const int m : {4, 8}) {
    const auto mesh = hodge::generate_square(0.0, kPi, m);
    const auto sp = build_space(mesh, 1, BcKind::tangential);
    const SpMat K = hodge::reduce(sp, hodge::assemble_stiffness_full(sp, A, B));
    const SpMat M = hodge::reduce(sp, hodge::assemble_mass_full(sp, B));
    const Vector u = sp.to_free(interpolate(sp, field));
    const double r = (K * u - 2.0 * (M * u)).cwiseAbs().maxCoeff();
    if (m == 4) prev = r;
    if (m == 8) CHECK(r < prev / 6.0);  // between O(h^3) and O(h^4) nodewise
  }
  CHECK(prev < 0.2);
}

TEST_CASE("assembled problem carries the lift correction") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 1, BcKind::tangential);
  const auto A = OperatorField::identity(2, 2);
  const auto B = OperatorField::identity(2, 1);
  const auto f = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << x[1], -x[0];
    return v;
  });
  const auto w0 = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << 1.0 + x[0], x[0] * x[1];
    return v;
  });
  const double lambda = 0.7;
  const auto prob = hodge::assemble_problem(sp, A, B, lambda, f, FormField(), w0);
  CHECK(prob.lambda == lambda);
  CHECK(prob.lift.size() == sp.full_dofs);
  CHECK((prob.lift - interpolate(sp, w0)).cwiseAbs().maxCoeff() < 1e-15);
  const auto bare = hodge::assemble_problem(sp, A, B, lambda, f, FormField(), FormField());
  CHECK(bare.lift.cwiseAbs().maxCoeff() == 0.0);
  const Vector expect =
      bare.rhs - sp.to_free(prob.K_full * prob.lift + lambda * (prob.M_full * prob.lift));
  CHECK((prob.rhs - expect).cwiseAbs().maxCoeff() < 1e-13);
  // reduced matrices are the Galerkin restrictions
  Vector y = Vector::LinSpaced(sp.free_dofs, -1.0, 1.0);
  CHECK((prob.K * y - sp.to_free(prob.K_full * sp.to_full(y))).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("cell derivatives are exact for affine fields") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 1, BcKind::none);
  const auto field = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << x[1], 3.0 * x[0];
    return v;
  });
  const Vector u = interpolate(sp, field);
  SUBCASE("identity B") {
    const auto der = hodge::cell_derivatives(sp, u, OperatorField::identity(2, 1));
    for (int c = 0; c < mesh.num_cells(); ++c) {
      CHECK(der.d(c, 0) == doctest::Approx(2.0).epsilon(1e-13));  // d = (d1 w2 - d2 w1) e12
      CHECK(std::abs(der.delta(c, 0)) < 1e-13);                   // -div = 0
    }
  }
  SUBCASE("smooth B feeds the gradient term by finite differences") {
    const auto B = OperatorField::scalar(2, 1, [](const Vector& x) { return 1.0 + x[0]; });
    const auto der = hodge::cell_derivatives(sp, u, B);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      Vector centroid = Vector::Zero(2);
      const Matrix verts = mesh.cell_vertices(c);
      for (int a = 0; a <= 2; ++a) centroid += verts.row(a).transpose() / 3.0;
      // delta(B w) = -div((1+x) (y, 3x)) = -y
      CHECK(der.delta(c, 0) == doctest::Approx(-centroid[1]).epsilon(1e-8));
    }
  }
}

TEST_CASE("error norms vanish on representable fields and scale correctly") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 4);
  const auto sp = build_space(mesh, 1, BcKind::none);
  const auto affine = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << 1.0 + 2.0 * x[0] - x[1], x[0];
    return v;
  });
  const Vector u = interpolate(sp, affine);
  const auto e = hodge::error_norms(sp, u, affine);
  CHECK(e.l2 < 1e-12);
  CHECK(e.h1_semi < 1e-9);  // finite-difference gradient floor
  const auto quad = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << x[0] * x[0], 0.0;
    return v;
  });
  const auto eq = hodge::error_norms(sp, interpolate(sp, quad), quad);
  CHECK(eq.l2_exact == doctest::Approx(std::sqrt(0.2)).epsilon(1e-12));
  CHECK(eq.l2 > 1e-4);

  std::function<Matrix(const Vector&)> grad = [](const Vector& x) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = 2.0 * x[0];
    return g;
  };
  const auto ea = hodge::error_norms(sp, interpolate(sp, quad), quad, &grad);
  CHECK(ea.h1_semi_exact == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("boundary residuals vanish against matching data") {
  const auto mesh = hodge::generate_square(0.0, 1.0, 3);
  const auto sp = build_space(mesh, 1, BcKind::none);
  const auto A = OperatorField::identity(2, 2);
  const auto B = OperatorField::identity(2, 1);
  const auto affine = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << 0.5 - x[1], 2.0 * x[0] + x[1];
    return v;
  });
  const Vector u = interpolate(sp, affine);
  const auto zero = hodge::boundary_residuals(sp, u, A, B, affine);
  CHECK(zero.wedge_trace < 1e-18);
  CHECK(zero.int_trace < 1e-18);
  CHECK(zero.wedge_delta < 1e-16);
  CHECK(zero.int_ad < 1e-16);

  const auto raw = hodge::boundary_residuals(sp, u, A, B);
  CHECK(raw.wedge_trace > 1e-2);
  CHECK(raw.int_trace > 1e-2);
}

TEST_CASE("parallel and serial assembly agree bitwise") {
  const auto mesh = hodge::generate_square(0.0, kPi, 6);
  const auto sp = build_space(mesh, 1, BcKind::tangential);
  const auto A = OperatorField::scalar(2, 2, [](const Vector& x) {
    return 1.0 + 0.5 * std::sin(x[0] + x[1]);
  });
  const auto B = OperatorField::scalar(2, 1, [](const Vector& x) {
    return 2.0 + std::cos(x[0]) * 0.25;
  });
  const auto f = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::sin(x[0]), std::cos(x[1]);
    return v;
  });
#ifdef _OPENMP
  omp_set_num_threads(8);
#endif
  const SpMat Kp = hodge::assemble_stiffness_full(sp, A, B, AssemblyMode::parallel);
  const SpMat Mp = hodge::assemble_mass_full(sp, B, AssemblyMode::parallel);
  const Vector lp = hodge::assemble_load_full(sp, f, FormField(), AssemblyMode::parallel);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  const SpMat Ks = hodge::assemble_stiffness_full(sp, A, B, AssemblyMode::serial);
  const SpMat Ms = hodge::assemble_mass_full(sp, B, AssemblyMode::serial);
  const Vector ls = hodge::assemble_load_full(sp, f, FormField(), AssemblyMode::serial);
  CHECK(SpMat(Kp - Ks).norm() == 0.0);
  CHECK(SpMat(Mp - Ms).norm() == 0.0);
  CHECK((lp - ls).cwiseAbs().maxCoeff() == 0.0);
}
