#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "hodgeforms/forms.hpp"
#include "oracles.hpp"

using hodge::Form;
using hodge::Matrix;
using hodge::Vector;

namespace {

Form random_form(int n, int k, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector c(hodge::binomial(n, k));
  for (long i = 0; i < c.size(); ++i) c[i] = u(rng);
  return Form(n, k, c);
}

double max_diff(const Form& f, const oracle::TupleForm& t) {
  const Form ref = oracle::from_tuples(f.n(), f.degree(), t);
  if (f.dim() == 0) return 0.0;
  return (f.coeffs() - ref.coeffs()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("binomial") {
  CHECK(hodge::binomial(4, 2) == 6);
  CHECK(hodge::binomial(6, 3) == 20);
  CHECK(hodge::binomial(5, 0) == 1);
  CHECK(hodge::binomial(3, 4) == 0);
  CHECK(hodge::binomial(3, -1) == 0);
}

TEST_CASE("multiindex basis is lexicographic") {
  const auto& b = hodge::multiindex_basis(4, 2);
  REQUIRE(b.size() == 6);
  CHECK(b[0].axes() == std::vector<int>({1, 2}));
  CHECK(b[1].axes() == std::vector<int>({1, 3}));
  CHECK(b[2].axes() == std::vector<int>({1, 4}));
  CHECK(b[3].axes() == std::vector<int>({2, 3}));
  CHECK(b[4].axes() == std::vector<int>({2, 4}));
  CHECK(b[5].axes() == std::vector<int>({3, 4}));
  CHECK(hodge::multiindex_basis(3, 0).size() == 1);
  CHECK(hodge::multiindex_basis(3, 4).empty());
  CHECK(hodge::multiindex_basis(3, -1).empty());
}

TEST_CASE("multiindex validation") {
  CHECK_THROWS_AS(hodge::MultiIndex(3, {2, 2}), hodge::Error);
  CHECK_THROWS_AS(hodge::MultiIndex(3, {3, 1}), hodge::Error);
  CHECK_THROWS_AS(hodge::MultiIndex(3, {0}), hodge::Error);
  CHECK_THROWS_AS(hodge::MultiIndex(3, {4}), hodge::Error);
}

TEST_CASE("wedge matches permutation-parity reference") {
  std::mt19937 rng(1u);
  for (int n = 1; n <= 5; ++n)
    for (int k1 = 0; k1 <= n; ++k1)
      for (int k2 = 0; k2 <= n; ++k2) {
        const Form a = random_form(n, k1, rng);
        const Form b = random_form(n, k2, rng);
        const Form w = wedge(a, b);
        CHECK(w.degree() == k1 + k2);
        const auto ref = oracle::slow_wedge(oracle::to_tuples(a), oracle::to_tuples(b));
        CHECK(max_diff(w, ref) < 1e-13);
      }
}

TEST_CASE("wedge graded anticommutativity and associativity") {
  std::mt19937 rng(2u);
  for (int n = 2; n <= 5; ++n)
    for (int k1 = 0; k1 <= n; ++k1)
      for (int k2 = 0; k2 + k1 <= n; ++k2) {
        const Form a = random_form(n, k1, rng);
        const Form b = random_form(n, k2, rng);
        const Form ab = wedge(a, b);
        const Form ba = wedge(b, a);
        const double sign = (k1 * k2) % 2 == 0 ? 1.0 : -1.0;
        CHECK((ab.coeffs() - sign * ba.coeffs()).norm() < 1e-13);
        const Form c = random_form(n, 1, rng);
        const Form l = wedge(wedge(a, b), c);
        const Form r = wedge(a, wedge(b, c));
        CHECK((l.coeffs() - r.coeffs()).norm() < 1e-13);
      }
}

TEST_CASE("interior product is adjoint to wedge and matches reference") {
  std::mt19937 rng(3u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k <= n; ++k) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v[i] = u(rng);
      const Form xi = random_form(n, k, rng);
      const Form contracted = interior_product(v, xi);
      CHECK(contracted.degree() == k - 1);
      if (k >= 1) {
        const auto ref = oracle::slow_interior(n, k, v, oracle::to_tuples(xi));
        CHECK(max_diff(contracted, ref) < 1e-13);
        const Form eta = random_form(n, k - 1, rng);
        // <v _| xi, eta> = <xi, v ^ eta>
        Form v1(n, 1, v);
        CHECK(inner(contracted, eta) ==
              doctest::Approx(inner(xi, wedge(v1, eta))).epsilon(1e-12));
      } else {
        CHECK(contracted.is_zero_object());
        CHECK(contracted.dim() == 0);
      }
    }
}

TEST_CASE("hodge star basics in R^3") {
  auto e = [](int n, int k, std::vector<int> axes) {
    Vector c = Vector::Zero(hodge::binomial(n, k));
    c[hodge::multiindex_position(n, k, hodge::MultiIndex(n, axes).mask())] = 1.0;
    return Form(n, k, c);
  };
  const Form e1 = e(3, 1, {1}), e2 = e(3, 1, {2}), e3 = e(3, 1, {3});
  CHECK(hodge_star(e1).coeffs().isApprox(e(3, 2, {2, 3}).coeffs()));
  CHECK(hodge_star(e2).coeffs().isApprox(-e(3, 2, {1, 3}).coeffs()));
  CHECK(hodge_star(e3).coeffs().isApprox(e(3, 2, {1, 2}).coeffs()));
  const Form one(3, 0, Vector::Ones(1));
  CHECK(hodge_star(one).degree() == 3);
  CHECK(hodge_star(one).coeffs()[0] == 1.0);
  CHECK(hodge_star(hodge_star(one)).coeffs()[0] == 1.0);
}

TEST_CASE("hodge star involution sign and isometry") {
  std::mt19937 rng(4u);
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k <= n; ++k) {
      const Form xi = random_form(n, k, rng);
      const Form ss = hodge_star(hodge_star(xi));
      const double sign = (k * (n - k)) % 2 == 0 ? 1.0 : -1.0;
      CHECK((ss.coeffs() - sign * xi.coeffs()).norm() < 1e-14);
      CHECK(hodge_star(xi).coeffs().norm() ==
            doctest::Approx(xi.coeffs().norm()).epsilon(1e-14));
      const auto ref = oracle::slow_star(n, k, oracle::to_tuples(xi));
      CHECK(max_diff(hodge_star(xi), ref) < 1e-14);
      // xi ^ star eta = <xi, eta> vol
      const Form eta = random_form(n, k, rng);
      const Form top = wedge(xi, hodge_star(eta));
      CHECK(top.coeffs()[0] == doctest::Approx(inner(xi, eta)).epsilon(1e-12));
    }
}

TEST_CASE("pullback matches alternating evaluation and is functorial") {
  std::mt19937 rng(5u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 1; n <= 4; ++n) {
    Matrix T(n, n), S(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T(i, j) = u(rng);
        S(i, j) = u(rng);
      }
    for (int k = 0; k <= n; ++k) {
      const Form xi = random_form(n, k, rng);
      const Form pb = pullback_linear(T, xi);
      const auto ref = oracle::slow_pullback(T, k, oracle::to_tuples(xi));
      CHECK(max_diff(pb, ref) < 1e-12);
      // (S T)* = T* o S*
      const Form lhs = pullback_linear(S * T, xi);
      const Form rhs = pullback_linear(T, pullback_linear(S, xi));
      CHECK((lhs.coeffs() - rhs.coeffs()).norm() < 1e-12);
      // identity pullback
      CHECK((pullback_linear(Matrix::Identity(n, n), xi).coeffs() - xi.coeffs()).norm() == 0.0);
    }
    // top degree scales by det T
    const Form vol = random_form(n, n, rng);
    const Form pv = pullback_linear(T, vol);
    CHECK(pv.coeffs()[0] == doctest::Approx(T.determinant() * vol.coeffs()[0]).epsilon(1e-12));
  }
}

TEST_CASE("split along a unit normal is an orthogonal decomposition") {
  std::mt19937 rng(6u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int n = 2; n <= 5; ++n)
    for (int k = 0; k <= n; ++k) {
      Vector nu(n);
      for (int i = 0; i < n; ++i) nu[i] = gauss(rng);
      nu /= nu.norm();
      const Form xi = random_form(n, k, rng);
      const auto [normal, tangential] = split_along_normal(nu, xi);
      CHECK((normal.coeffs() + tangential.coeffs() - xi.coeffs()).norm() < 1e-13);
      CHECK(inner(normal, tangential) == doctest::Approx(0.0).epsilon(1e-12));
      // nu _| tangential = 0 and nu ^ normal = 0
      CHECK(interior_product(nu, tangential).coeffs().norm() < 1e-13);
      CHECK(wedge(Form(n, 1, nu), normal).coeffs().norm() < 1e-13);
    }
}

TEST_CASE("out-of-range degrees are canonical zero objects") {
  const Form zero_hi(3, 4);
  const Form zero_lo(3, -1);
  CHECK(zero_hi.is_zero_object());
  CHECK(zero_lo.is_zero_object());
  CHECK(zero_hi.dim() == 0);
  std::mt19937 rng(7u);
  const Form a = random_form(3, 2, rng);
  const Form b = random_form(3, 2, rng);
  const Form w = wedge(a, b);  // degree 4 > n
  CHECK(w.is_zero_object());
  CHECK(w.dim() == 0);
  const Form zf(3, 0, Vector::Ones(1));
  CHECK(interior_product(Vector::Ones(3), zf).is_zero_object());
  CHECK(wedge(zero_hi, a).is_zero_object());  // degree 4 + 2 = 6 > n stays empty
  CHECK(wedge(zero_hi, a).dim() == 0);
  // wedging a zero object back into range gives the zero form of that degree
  const Form back = wedge(zero_lo, a);  // degree 1
  CHECK(back.degree() == 1);
  CHECK(back.dim() == 3);
  CHECK(back.coeffs().norm() == 0.0);
}

TEST_CASE("mismatched operands are errors") {
  std::mt19937 rng(8u);
  const Form a = random_form(3, 1, rng);
  const Form b = random_form(4, 1, rng);
  CHECK_THROWS_AS(wedge(a, b), hodge::Error);
  CHECK_THROWS_AS(inner(a, b), hodge::Error);
  CHECK_THROWS_AS(inner(a, random_form(3, 2, rng)), hodge::Error);
  CHECK_THROWS_AS(interior_product(Vector::Ones(4), a), hodge::Error);
  CHECK_THROWS_AS(pullback_linear(Matrix::Identity(2, 2), a), hodge::Error);
  CHECK_THROWS_AS(Form(3, 1, Vector::Ones(2)), hodge::Error);
}

TEST_CASE("sign table initialization is race-safe") {
  // Hit a fresh (n, k) family from several threads at once.
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&failures] {
      for (int k = 0; k <= 6; ++k)
        if (hodge::multiindex_basis(6, k).size() !=
            static_cast<std::size_t>(hodge::binomial(6, k)))
          ++failures;
    });
  for (auto& th : threads) th.join();
  CHECK(failures.load() == 0);
}
