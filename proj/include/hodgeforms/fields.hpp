// Form-valued coefficient-free data fields and finite-difference helpers.
#pragma once

#include <functional>
#include <utility>

#include "hodgeforms/errors.hpp"
#include "hodgeforms/forms.hpp"

namespace hodge {

/// A k-form valued field on R^n, sampled pointwise. `eval` returns the
/// coefficient vector in the lexicographic basis, length C(n, degree).
struct FormField {
  int n = 0;
  int degree = 0;
  std::function<Vector(const Vector&)> eval;

  bool valid() const { return static_cast<bool>(eval); }
  long dim() const { return binomial(n, degree); }

  Vector operator()(const Vector& x) const {
    Vector v = eval(x);
    if (v.size() != dim())
      throw Error(ErrorCode::invalid_argument, "FormField: sample has wrong dimension");
    return v;
  }

  static FormField zero(int n, int degree) {
    FormField f;
    f.n = n;
    f.degree = degree;
    const long m = binomial(n, degree);
    f.eval = [m](const Vector&) { return Vector(Vector::Zero(m)); };
    return f;
  }

  static FormField constant(const Form& value) {
    FormField f;
    f.n = value.n();
    f.degree = value.degree();
    const Vector c = value.coeffs();
    f.eval = [c](const Vector&) { return c; };
    return f;
  }

  static FormField make(int n, int degree, std::function<Vector(const Vector&)> fn) {
    FormField f;
    f.n = n;
    f.degree = degree;
    f.eval = std::move(fn);
    return f;
  }
};

/// Fourth-order central difference of a vector-valued field along axis p.
inline Vector fd_partial(const std::function<Vector(const Vector&)>& f, const Vector& x,
                         int p, double h) {
  Vector e = Vector::Zero(x.size());
  e[p] = 1.0;
  return (-f(x + 2 * h * e) + 8.0 * f(x + h * e) - 8.0 * f(x - h * e) + f(x - 2 * h * e)) /
         (12.0 * h);
}

/// All partials at once; column p is the derivative along axis p.
inline Matrix fd_gradient(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h) {
  const Vector probe = f(x);
  Matrix g(probe.size(), x.size());
  for (int p = 0; p < x.size(); ++p) g.col(p) = fd_partial(f, x, p, h);
  return g;
}

}  // namespace hodge
