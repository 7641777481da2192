#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hodgeforms/verify.hpp"

using hodge::FormField;
using hodge::Matrix;
using hodge::OperatorField;
using hodge::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

Vector point(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

FormField smooth_test_form() {
  return FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::sin(x[0]) * std::exp(0.3 * x[1]), std::cos(x[0] + 0.5 * x[1]);
    return v;
  });
}

}  // namespace

TEST_CASE("finite-difference d and delta against hand derivatives") {
  FormField w = smooth_test_form();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = point(coord(rng), coord(rng));
    const double d1w1 = std::cos(x[0]) * std::exp(0.3 * x[1]);
    const double d2w1 = 0.3 * std::sin(x[0]) * std::exp(0.3 * x[1]);
    const double d1w2 = -std::sin(x[0] + 0.5 * x[1]);
    const double d2w2 = -0.5 * std::sin(x[0] + 0.5 * x[1]);
    Vector dw = hodge::fd_d(w, x);
    REQUIRE(dw.size() == 1);
    CHECK(dw[0] == doctest::Approx(d1w2 - d2w1).epsilon(1e-9));
    Vector deltaw = hodge::fd_delta(w, x);
    REQUIRE(deltaw.size() == 1);
    CHECK(deltaw[0] == doctest::Approx(-(d1w1 + d2w2)).epsilon(1e-9));
  }
  // Degree edges: d of a top form and delta of a 0-form are empty.
  CHECK(hodge::fd_d(FormField::zero(2, 2), point(0.1, 0.2)).size() == 0);
  CHECK(hodge::fd_delta(FormField::zero(2, 0), point(0.1, 0.2)).size() == 0);
}

TEST_CASE("fd_delta_op applies the product rule through B") {
  FormField w = smooth_test_form();
  OperatorField B = OperatorField::scalar(2, 1, [](const Vector& x) {
    return 1.0 + 0.25 * x[0] * x[1];
  });
  Vector x = point(0.4, -0.7);
  // delta(b w) = b delta(w) - sum_p (d_p b) w_p for scalar b.
  const double b = 1.0 + 0.25 * x[0] * x[1];
  const double bx = 0.25 * x[1];
  const double by = 0.25 * x[0];
  Vector w_at = w(x);
  const double expected = b * hodge::fd_delta(w, x)[0] - bx * w_at[0] - by * w_at[1];
  CHECK(hodge::fd_delta_op(w, B, x)[0] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("sign calibration picks s = -1 decisively") {
  const hodge::SignCalibration& cal = hodge::calibrated_sign();
  CHECK(cal.s == -1);
  CHECK(cal.ratio > 10.0);
}

TEST_CASE("fd_operator_apply on eigenfields, constants, and combinations") {
  OperatorField A = OperatorField::identity(2, 2);
  OperatorField B = OperatorField::identity(2, 1);
  FormField eig = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::cos(x[0]) * std::sin(x[1]), 0.0;
    return v;
  });

  FormField constant = FormField::make(2, 1, [](const Vector&) {
    Vector v(2);
    v << 0.7, -0.4;
    return v;
  });
  Vector at = point(1.1, 0.6);
  CHECK(hodge::fd_operator_apply(constant, A, B, 0.0, at).norm() == doctest::Approx(0.0).epsilon(1e-10));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(0.5, kPi - 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = point(coord(rng), coord(rng));
    Vector lhs = hodge::fd_operator_apply(eig, A, B, 0.0, x);
    Vector expected = -2.0 * eig(x);
    CHECK((lhs - expected).norm() <= 1e-8 * (1.0 + expected.norm()));
  }

  // Linearity in the field, and the lambda term.
  FormField combo = FormField::make(2, 1, [eig, constant](const Vector& x) {
    return Vector(2.0 * eig(x) - 3.0 * constant(x));
  });
  Vector x = point(0.9, 1.3);
  const double lambda = 0.7;
  Vector lhs = hodge::fd_operator_apply(combo, A, B, lambda, x);
  Vector rhs = 2.0 * hodge::fd_operator_apply(eig, A, B, lambda, x) -
               3.0 * hodge::fd_operator_apply(constant, A, B, lambda, x);
  CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
}

TEST_CASE("fd_operator_apply converges at fourth order in the stencil width") {
  OperatorField A = OperatorField::identity(2, 2);
  OperatorField B = OperatorField::identity(2, 1);
  FormField eig = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::cos(x[0]) * std::sin(x[1]), 0.0;
    return v;
  });
  Vector x = point(1.0, 1.2);
  Vector truth = -2.7 * eig(x);  // lambda = 0.7
  const double e_coarse = (hodge::fd_operator_apply(eig, A, B, 0.7, x, 0.1) - truth).norm();
  const double e_fine = (hodge::fd_operator_apply(eig, A, B, 0.7, x, 0.05) - truth).norm();
  const double order = std::log2(e_coarse / e_fine);
  CHECK(order >= 3.5);
}

TEST_CASE("fd_operator_apply reports a stencil failure on non-finite samples") {
  OperatorField A = OperatorField::identity(2, 2);
  OperatorField B = OperatorField::identity(2, 1);
  // sqrt is not smooth across x1 = 1; samples beyond it are NaN.
  FormField partial = FormField::make(2, 1, [](const Vector& x) {
    Vector v(2);
    v << std::sqrt(1.0 - x[0]), 0.0;
    return v;
  });
  CHECK_THROWS_AS(hodge::fd_operator_apply(partial, A, B, 0.0, point(0.9999, 0.5)),
                  hodge::Error);
}

TEST_CASE("manufactured loads match the finite-difference strong operator") {
  // The catalog stores closed-form data; fd_operator_apply rebuilds it from
  // the exact solution. Stokes cases carry an extra pressure gradient.
  auto catalog = hodge::manufactured_catalog();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(0.25, 0.75);
  int checked = 0;
  for (const auto& c : catalog) {
    if (!c.exact.valid() || c.kind == "divcurl_t" || c.kind == "divcurl_n") continue;
    const bool on_square = c.name.rfind("square", 0) == 0;
    for (int trial = 0; trial < 4; ++trial) {
      Vector x(2);
      if (on_square) {
        x = point(unit(rng) * kPi, unit(rng) * kPi);
      } else {  // unit disk
        x = point(0.5 * (unit(rng) - 0.5), 0.5 * (unit(rng) - 0.5));
      }
      Vector expected = hodge::fd_operator_apply(c.exact, c.A, c.B, c.lambda, x);
      if (c.pressure) {
        FormField p = FormField::make(2, 0, [&](const Vector& y) {
          Vector v(1);
          v << c.pressure(y);
          return v;
        });
        expected -= hodge::fd_d(p, x);
      }
      Vector stored = c.f(x);
      CHECK((stored - expected).norm() <= 2e-7 * (1.0 + expected.norm()));
    }
    ++checked;
  }
  CHECK(checked >= 7);
}

TEST_CASE("divcurl catalog data are the derivatives of the exact fields") {
  for (const auto& c : hodge::manufactured_catalog()) {
    if (c.kind != "divcurl_t" || !c.exact.valid()) continue;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unit(0.3, 0.7);
    for (int trial = 0; trial < 5; ++trial) {
      Vector x = point(unit(rng) * kPi, unit(rng) * kPi);
      if (c.name != "square_divcurl") x = point(0.2 * unit(rng), 0.2 * unit(rng));
      Vector dv = hodge::fd_d(c.exact, x);
      Vector deltav = hodge::fd_delta(c.exact, x);
      CHECK((dv - c.f(x)).norm() <= 1e-8 * (1.0 + dv.norm()));
      CHECK((deltav - c.g(x)).norm() <= 1e-8 * (1.0 + deltav.norm()));
    }
  }
}

TEST_CASE("catalog boundary structure: traces, co-closedness, natural data") {
  auto catalog = hodge::manufactured_catalog();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& c : catalog) {
    if (!c.exact.valid()) continue;
    if (c.name.rfind("square", 0) == 0 && c.omega0.valid() == false) {
      // Tangential component vanishes on each edge of [0, pi]^2.
      for (int trial = 0; trial < 5; ++trial) {
        const double t = unit(rng) * kPi;
        CHECK(std::abs(c.exact(point(0.0, t))[1]) <= 1e-12);
        CHECK(std::abs(c.exact(point(kPi, t))[1]) <= 1e-12);
        CHECK(std::abs(c.exact(point(t, 0.0))[0]) <= 1e-12);
        CHECK(std::abs(c.exact(point(t, kPi))[0]) <= 1e-12);
      }
    }
    if (c.kind == "hodge_t" && c.name == "square_tangential") {
      // The natural condition: delta(omega) vanishes on the boundary.
      for (int trial = 0; trial < 5; ++trial) {
        const double t = unit(rng) * kPi;
        CHECK(std::abs(hodge::fd_delta(c.exact, point(t, 0.0))[0]) <= 1e-9);
        CHECK(std::abs(hodge::fd_delta(c.exact, point(0.0, t))[0]) <= 1e-9);
      }
    }
    if (c.kind == "stokes_t" || c.kind == "stokes_n") {
      for (int trial = 0; trial < 5; ++trial) {
        Vector x = point(0.4 + unit(rng), 0.4 + unit(rng));
        if (c.kind == "stokes_n") x = 0.3 * point(unit(rng) - 0.5, unit(rng) - 0.5);
        CHECK(std::abs(hodge::fd_delta(c.exact, x)[0]) <= 1e-9);
      }
    }
    if (c.name == "disk_normal" || c.name == "disk_stokes_n") {
      // nu _| u = 0 and the natural trace d u = 0 on the unit circle.
      for (int trial = 0; trial < 5; ++trial) {
        const double a = 2.0 * kPi * unit(rng);
        Vector x = point(std::cos(a), std::sin(a));
        CHECK(std::abs(x.dot(c.exact(x))) <= 1e-12);
        CHECK(std::abs(hodge::fd_d(c.exact, x)[0]) <= 1e-9);
      }
    }
    // The stored gradient matches finite differences of the field.
    if (c.exact_grad) {
      Vector x = point(0.3, 0.2);
      Matrix g = c.exact_grad(x);
      Matrix g_fd = hodge::fd_gradient(c.exact.eval, x, 1e-3);
      CHECK((g - g_fd).norm() <= 1e-9 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("square spectrum oracle against a brute product enumeration") {
  Vector sigma = hodge::square_spectrum_oracle(10);
  Vector expected(10);
  expected << -1, -1, -2, -2, -4, -4, -5, -5, -5, -5;
  CHECK((sigma - expected).norm() == 0.0);

  // Independent route: 1D Neumann {m^2, m >= 0} x Dirichlet {l^2, l >= 1}
  // sums, each combination appearing once per component family.
  std::vector<double> brute;
  for (int m = 0; m <= 20; ++m)
    for (int l = 1; l <= 20; ++l) {
      brute.push_back(m * m + l * l);  // first component family
      brute.push_back(l * l + m * m);  // second, mirrored
    }
  std::sort(brute.begin(), brute.end());
  Vector sigma40 = hodge::square_spectrum_oracle(40);
  for (int i = 0; i < 40; ++i) {
    CHECK(sigma40[i] == -brute[i]);
    if (i) CHECK(sigma40[i] <= sigma40[i - 1]);
  }
  CHECK(sigma40.maxCoeff() <= 0.0);
}

TEST_CASE("codifferential via the star route equals the assembly formula") {
  // On any affine field the two per-direction operator matrices agree
  // entry by entry, hence the per-element values do too.
  for (int n = 2; n <= 4; ++n) {
    for (int k = 1; k <= n; ++k) {
      const int sign = (n * (k + 1) + 1) % 2 == 0 ? 1 : -1;
      for (int p = 0; p < n; ++p) {
        Vector e = Vector::Zero(n);
        e[p] = 1.0;
        Matrix componentwise = -hodge::interior_matrix(n, k, e);
        Matrix star_route = double(sign) * hodge::star_matrix(n, n - k + 1) *
                            hodge::wedge_matrix(n, n - k, e) * hodge::star_matrix(n, k);
        CHECK((componentwise - star_route).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("convergence table fits, drops a bad coarsest level, and clamps") {
  std::vector<double> h = {0.4, 0.2, 0.1, 0.05};
  std::vector<int> dofs = {10, 40, 160, 640};
  Matrix errors(4, 2);
  for (int i = 0; i < 4; ++i) {
    errors(i, 0) = 3.0 * h[i] * h[i];
    errors(i, 1) = 0.7 * h[i];
  }
  auto t = hodge::make_convergence_table(h, dofs, {"err_L2", "err_H1"}, errors);
  CHECK(t.slopes[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(t.slopes[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(t.excluded[0] == 0);
  CHECK(t.fit_residuals[0] <= 1e-12);

  // A polluted coarsest level is excluded and the clean slope recovered.
  Matrix dirty = errors;
  dirty(0, 0) *= 3.0;
  auto td = hodge::make_convergence_table(h, dofs, {"err_L2", "err_H1"}, dirty);
  CHECK(td.excluded[0] == 1);
  CHECK(td.excluded[1] == 0);
  CHECK(td.slopes[0] == doctest::Approx(2.0).epsilon(1e-10));

  // Three levels: fitted but never dropped.
  Matrix three = dirty.topRows(3);
  auto t3 = hodge::make_convergence_table({0.4, 0.2, 0.1}, {10, 40, 160},
                                          {"err_L2", "err_H1"}, three);
  CHECK(t3.excluded[0] == 0);
  CHECK(std::isfinite(t3.slopes[0]));

  // Two levels: no slopes. Zero errors: clamped, finite everything.
  auto t2 = hodge::make_convergence_table({0.4, 0.2}, {10, 40}, {"e"},
                                          Matrix::Constant(2, 1, 1e-3));
  CHECK(std::isnan(t2.slopes[0]));
  auto tz = hodge::make_convergence_table({0.4, 0.2, 0.1}, {10, 40, 160}, {"e"},
                                          Matrix::Zero(3, 1));
  CHECK(std::isfinite(tz.slopes[0]));
  CHECK(tz.errors.minCoeff() == 1e-16);
}

TEST_CASE("convergence csv layout") {
  std::vector<double> h = {0.4, 0.2, 0.1};
  Matrix errors(3, 2);
  errors << 1e-1, 2e-1, 2.5e-2, 1e-1, 6.25e-3, 5e-2;
  auto t = hodge::make_convergence_table(h, {10, 40, 160}, {"err_L2", "err_H1"}, errors);
  std::istringstream csv(hodge::to_csv(t));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "h,dofs,err_L2,err_H1");
  int data = 0, footer = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("# ", 0) == 0)
      ++footer;
    else
      ++data;
  }
  CHECK(data == 3);
  CHECK(footer == 3);
}
