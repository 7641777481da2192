// Quadrature rules on reference simplices (segment, triangle, tetrahedron).
#pragma once

#include <functional>

#include "hodgeforms/errors.hpp"
#include "hodgeforms/forms.hpp"

namespace hodge {

/// A quadrature rule on the reference d-simplex, stored in barycentric
/// coordinates. Weights sum to the reference volume 1/d!.
struct QuadratureRule {
  int dim = 0;
  Matrix bary;     ///< one row per point, dim + 1 barycentric coordinates
  Vector weights;  ///< sums to 1/dim!
  int order = 0;   ///< polynomial exactness (total degree)
};

/// Rule on the reference dim-simplex exact for total degree >= order.
/// Conical product of Gauss-Jacobi lines, so any order is available;
/// dim must be 1, 2 or 3. Cached; the reference is stable for the
/// lifetime of the program.
const QuadratureRule& simplex_rule(int dim, int order);

/// Unsigned measure of the simplex spanned by the rows of `verts`
/// ((dim+1) x d with d >= dim), via the Gram determinant. Works for
/// facets embedded in a higher-dimensional space.
double simplex_measure(const Matrix& verts);

/// Integrate a callable over the physical simplex with vertex rows `verts`.
/// The callable receives the physical coordinates of each quadrature point.
template <typename F>
auto integrate_simplex(const QuadratureRule& rule, const Matrix& verts, F&& f) {
  if (verts.rows() != rule.dim + 1)
    throw Error(ErrorCode::invalid_argument, "integrate_simplex: vertex count mismatch");
  double fact = 1.0;
  for (int i = 2; i <= rule.dim; ++i) fact *= i;
  const double scale = simplex_measure(verts) * fact;
  Vector x(verts.cols());
  x = (rule.bary.row(0) * verts).transpose();
  auto acc = f(x);
  acc *= rule.weights[0];
  for (Eigen::Index q = 1; q < rule.weights.size(); ++q) {
    x = (rule.bary.row(q) * verts).transpose();
    acc += rule.weights[q] * f(x);
  }
  acc *= scale;
  return acc;
}

}  // namespace hodge
