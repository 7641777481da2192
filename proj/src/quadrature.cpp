#include "hodgeforms/quadrature.hpp"

#include <Eigen/Dense>
#include <map>
#include <mutex>

namespace hodge {

namespace {

// p-point Gauss rule on [0,1] for the weight (1-t)^alpha, by Golub-Welsch
// on the Jacobi (alpha, 0) recurrence. Exact for degree <= 2p-1.
void gauss_jacobi(int p, int alpha, Vector& nodes, Vector& weights) {
  const double a = alpha, b = 0.0;
  Matrix J = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    const double k = i;
    double diag;
    if (i == 0)
      diag = (b - a) / (a + b + 2.0);
    else
      diag = (b * b - a * a) / ((2.0 * k + a + b) * (2.0 * k + a + b + 2.0));
    J(i, i) = diag;
    if (i + 1 < p) {
      const double m = k + 1.0;
      const double num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
      const double den = (2.0 * m + a + b) * (2.0 * m + a + b) *
                         (2.0 * m + a + b + 1.0) * (2.0 * m + a + b - 1.0);
      const double off = std::sqrt(num / den);
      J(i, i + 1) = off;
      J(i + 1, i) = off;
    }
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  const double mu0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0);  // beta = 0
  nodes.resize(p);
  weights.resize(p);
  // Map [-1,1] with weight (1-x)^a to [0,1] with weight (1-t)^a.
  const double scale = mu0 * std::pow(2.0, -a - 1.0);
  for (int i = 0; i < p; ++i) {
    nodes[i] = 0.5 * (1.0 + es.eigenvalues()[i]);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = scale * v0 * v0;
  }
}

QuadratureRule build_rule(int dim, int order) {
  if (dim < 1 || dim > 3)
    throw Error(ErrorCode::invalid_argument, "simplex_rule: dim must be 1, 2 or 3");
  if (order < 0) throw Error(ErrorCode::invalid_argument, "simplex_rule: negative order");
  const int p = std::max(1, (order + 2) / 2);  // 2p - 1 >= order
  QuadratureRule rule;
  rule.dim = dim;
  rule.order = 2 * p - 1;
  std::vector<Vector> nodes(dim), weights(dim);
  // Conical product: direction i carries the Jacobi weight (1-t)^(dim-1-i).
  for (int i = 0; i < dim; ++i) gauss_jacobi(p, dim - 1 - i, nodes[i], weights[i]);
  const int npts = static_cast<int>(std::pow(p, dim));
  rule.bary.resize(npts, dim + 1);
  rule.weights.resize(npts);
  std::vector<int> idx(dim, 0);
  for (int q = 0; q < npts; ++q) {
    // Collapsed coordinates: x_1 = t_1, x_2 = t_2 (1 - x_1), ...
    double w = 1.0, remaining = 1.0;
    Vector x(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = nodes[i][idx[i]] * remaining;
      remaining -= x[i];
      w *= weights[i][idx[i]];
    }
    rule.bary(q, 0) = remaining;
    for (int i = 0; i < dim; ++i) rule.bary(q, i + 1) = x[i];
    rule.weights[q] = w;
    for (int i = dim - 1; i >= 0; --i) {
      if (++idx[i] < p) break;
      idx[i] = 0;
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& simplex_rule(int dim, int order) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find({dim, order});
  if (it == cache.end()) it = cache.emplace(std::make_pair(dim, order), build_rule(dim, order)).first;
  return it->second;
}

double simplex_measure(const Matrix& verts) {
  const int dim = static_cast<int>(verts.rows()) - 1;
  if (dim < 0 || verts.cols() < dim)
    throw Error(ErrorCode::invalid_argument, "simplex_measure: bad vertex matrix");
  if (dim == 0) return 1.0;
  Matrix E(verts.cols(), dim);
  for (int i = 0; i < dim; ++i) E.col(i) = (verts.row(i + 1) - verts.row(0)).transpose();
  double fact = 1.0;
  for (int i = 2; i <= dim; ++i) fact *= i;
  const Matrix G = E.transpose() * E;
  return std::sqrt(std::max(0.0, G.determinant())) / fact;
}

}  // namespace hodge
