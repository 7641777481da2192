#include "hodgeforms/operator_field.hpp"

#include <cmath>
#include <random>

namespace hodge {

OperatorField OperatorField::constant(int n, int a, int b, Matrix M) {
  if (M.rows() != binomial(n, b) || M.cols() != binomial(n, a))
    throw Error(ErrorCode::invalid_argument, "OperatorField: matrix size does not match degrees");
  OperatorField f;
  f.n = n;
  f.degree_source = a;
  f.degree_target = b;
  f.smoothness = Smoothness::constant;
  f.sample = [M = std::move(M)](const Vector&) { return M; };
  return f;
}

OperatorField OperatorField::identity(int n, int degree) {
  const long m = binomial(n, degree);
  return constant(n, degree, degree, Matrix::Identity(m, m));
}

OperatorField OperatorField::scalar(int n, int degree,
                                    std::function<double(const Vector&)> fn,
                                    Smoothness smoothness) {
  OperatorField f;
  f.n = n;
  f.degree_source = degree;
  f.degree_target = degree;
  f.smoothness = smoothness;
  const long m = binomial(n, degree);
  f.sample = [fn = std::move(fn), m](const Vector& x) -> Matrix {
    return fn(x) * Matrix::Identity(m, m);
  };
  return f;
}

Matrix OperatorField::operator()(const Vector& x) const {
  Matrix M = sample(x);
  if (M.rows() != rows() || M.cols() != cols())
    throw Error(ErrorCode::invalid_argument, "OperatorField: sample size does not match degrees");
  return M;
}

void validate_operator_field(const OperatorField& f, const std::vector<Vector>& points) {
  if (points.empty()) return;
  const Matrix first = f(points.front());
  for (const auto& x : points) {
    const Matrix M = f(x);
    if (!M.allFinite())
      throw Error(ErrorCode::singular_input, "OperatorField: non-finite sample");
    if (f.smoothness == Smoothness::constant && !M.isApprox(first, 1e-14))
      throw Error(ErrorCode::invalid_argument,
                  "OperatorField: tagged constant but samples vary");
  }
}

double legendre_constant(const Matrix& M, Vector* witness) {
  if (M.rows() != M.cols())
    throw Error(ErrorCode::invalid_argument, "legendre_constant: matrix not square");
  if (M.rows() == 0)
    throw Error(ErrorCode::invalid_argument, "legendre_constant: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
  if (witness) *witness = eig.eigenvectors().col(0);
  return eig.eigenvalues()[0];
}

namespace {

// Minimum of x^T Q x / x^T N x over the complement of the (near-)kernel of
// the PSD Gram matrix N. Both must be symmetric.
std::pair<double, Vector> min_generalized(const Matrix& Q, const Matrix& N) {
  Eigen::SelfAdjointEigenSolver<Matrix> en(N);
  const double nmax = en.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<long> keep;
  for (long i = 0; i < en.eigenvalues().size(); ++i)
    if (en.eigenvalues()[i] > 1e-12 * nmax) keep.push_back(i);
  if (keep.empty())
    throw Error(ErrorCode::numerical, "degenerate Gram matrix in eigen-minimization");
  Matrix V(N.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    V.col(j) = en.eigenvectors().col(keep[j]) / std::sqrt(en.eigenvalues()[keep[j]]);
  Eigen::SelfAdjointEigenSolver<Matrix> eq(V.transpose() * Q * V);
  Vector x = V * eq.eigenvectors().col(0);
  return {eq.eigenvalues()[0], x / x.norm()};
}

}  // namespace

double legendre_hadamard_constant(const Matrix& A, int n, int k,
                                  Vector* witness_a, Vector* witness_b,
                                  int restarts, double tol) {
  const long mk1 = binomial(n, k + 1);
  if (A.rows() != mk1 || A.cols() != mk1)
    throw Error(ErrorCode::invalid_argument,
                "legendre_hadamard_constant: A size does not match Lambda^{k+1}");
  if (mk1 == 0)
    throw Error(ErrorCode::invalid_argument,
                "legendre_hadamard_constant: no nonzero wedges in degree k+1");
  const Matrix S = 0.5 * (A + A.transpose());

  // Unit-axis wedge maps, so that a ^ b = sum_p a_p (e_p ^ b).
  std::vector<Matrix> Wp(n);
  for (int p = 0; p < n; ++p)
    Wp[p] = wedge_matrix(n, k, Vector::Unit(n, p));

  std::mt19937 rng(946713u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  Vector best_a, best_b;

  // The first n starts are the coordinate axes; in particular the e_n start
  // guarantees the reported value is at most the minimum over the e_n fiber,
  // which the c1 coercivity bound downstream relies on.
  for (int r = 0; r < std::max(restarts, n); ++r) {
    Vector a(n);
    if (r < n) {
      a = Vector::Unit(n, r);
    } else {
      do {
        for (int i = 0; i < n; ++i) a[i] = gauss(rng);
      } while (a.norm() < 1e-8);
      a /= a.norm();
    }

    double value = std::numeric_limits<double>::infinity();
    Vector b;
    for (int iter = 0; iter < 200; ++iter) {
      // Fix a, minimize over b.
      const Matrix Wa = wedge_matrix(n, k, a);
      auto [vb, bmin] = min_generalized(Wa.transpose() * S * Wa, Wa.transpose() * Wa);
      b = bmin;
      // Fix b, minimize over a.
      Matrix Mb(mk1, n);
      for (int p = 0; p < n; ++p) Mb.col(p) = Wp[p] * b;
      auto [va, amin] = min_generalized(Mb.transpose() * S * Mb, Mb.transpose() * Mb);
      a = amin;
      if (std::abs(vb - va) <= tol * std::max(1.0, std::abs(va))) {
        value = va;
        break;
      }
      value = va;
    }
    if (value < best) {
      best = value;
      best_a = a;
      best_b = b;
    }
  }
  if (witness_a) *witness_a = best_a;
  if (witness_b) *witness_b = best_b;
  return best;
}

std::pair<double, double> ellipticity_constants(double gamma_A, const Matrix& B,
                                                int n, int k,
                                                Vector* witness_c1, Vector* witness_c2) {
  const long mk = binomial(n, k);
  if (B.rows() != mk || B.cols() != mk)
    throw Error(ErrorCode::invalid_argument, "ellipticity_constants: B size mismatch");
  if (!(gamma_A > 0))
    throw Error(ErrorCode::invalid_argument, "ellipticity_constants: gamma_A must be positive");
  Eigen::FullPivLU<Matrix> lu(B);
  if (!lu.isInvertible())
    throw Error(ErrorCode::singular_input, "ellipticity_constants: B is singular");
  const Matrix Binv = lu.inverse();

  const Vector en = Vector::Unit(n, n - 1);
  const Matrix W = wedge_matrix(n, k, en);
  const Matrix In = interior_matrix(n, k, en);

  const Matrix Q1 = gamma_A * W.transpose() * W +
                    B.transpose() * In.transpose() * In * B;
  const Matrix WB = W * Binv;
  const Matrix Q2 = gamma_A * WB.transpose() * WB + In.transpose() * In;

  Eigen::SelfAdjointEigenSolver<Matrix> e1(0.5 * (Q1 + Q1.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> e2(0.5 * (Q2 + Q2.transpose()));
  const double c1 = e1.eigenvalues()[0];
  const double c2 = e2.eigenvalues()[0];
  if (witness_c1) *witness_c1 = e1.eigenvectors().col(0);
  if (witness_c2) *witness_c2 = e2.eigenvectors().col(0);
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw Error(ErrorCode::singular_input,
                "ellipticity_constants: nonpositive constant; B does not satisfy "
                "the Legendre condition required by the split bound");
  return {c1, c2};
}

Matrix build_atilde(const Matrix& A, const Matrix& B, int n, int k) {
  const long mk = binomial(n, k);
  return build_atilde_general(A, Matrix::Identity(mk, mk), B, n, k);
}

Matrix build_atilde_general(const Matrix& A, const Matrix& Bw, const Matrix& Bi,
                            int n, int k) {
  const long mk = binomial(n, k), mk1 = binomial(n, k + 1);
  if (A.rows() != mk1 || A.cols() != mk1)
    throw Error(ErrorCode::invalid_argument, "build_atilde: A size does not match Lambda^{k+1}");
  if (Bw.rows() != mk || Bw.cols() != mk || Bi.rows() != mk || Bi.cols() != mk)
    throw Error(ErrorCode::invalid_argument, "build_atilde: B size does not match Lambda^k");
  std::vector<Matrix> WB(n), IB(n);
  for (int p = 0; p < n; ++p) {
    WB[p] = wedge_matrix(n, k, Vector::Unit(n, p)) * Bw;
    IB[p] = interior_matrix(n, k, Vector::Unit(n, p)) * Bi;
  }
  Matrix G = Matrix::Zero(mk * n, mk * n);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p < n; ++p)
      G.block(q * mk, p * mk, mk, mk) =
          WB[q].transpose() * A * WB[p] + IB[q].transpose() * IB[p];
  return G;
}

Matrix atilde_block(const Matrix& atilde, int n, int k, int p, int q) {
  const long mk = binomial(n, k);
  if (atilde.rows() != mk * n || atilde.cols() != mk * n)
    throw Error(ErrorCode::invalid_argument, "atilde_block: size mismatch");
  if (p < 1 || p > n || q < 1 || q > n)
    throw Error(ErrorCode::invalid_argument, "atilde_block: axis out of range");
  return atilde.block((q - 1) * mk, (p - 1) * mk, mk, mk);
}

Matrix conjugate_pullback(const Matrix& A, const Matrix& T, int degree) {
  const int n = static_cast<int>(T.rows());
  if (T.cols() != n)
    throw Error(ErrorCode::invalid_argument, "conjugate_pullback: T must be square");
  if (A.rows() != binomial(n, degree) || A.cols() != binomial(n, degree))
    throw Error(ErrorCode::invalid_argument, "conjugate_pullback: A size does not match degree");
  Eigen::JacobiSVD<Matrix> svd(T);
  const double smin = svd.singularValues()[n - 1];
  const double smax = svd.singularValues()[0];
  if (smin <= 0.0 || smax / smin > 1e12)
    throw Error(ErrorCode::singular_input,
                "conjugate_pullback: T numerically singular (condition " +
                    std::to_string(smax / std::max(smin, 1e-300)) + " > 1e12)");
  // Congruence by the pullback matrix.  For orthogonal T the pullback matrix
  // is orthogonal, so this coincides with (T^-1)* A T*; for general invertible
  // T the congruence is the form that transforms the quadratic energy, and it
  // carries decomposables to decomposables, so ellipticity survives.
  const Matrix P = pullback_matrix(T, degree);
  return P.transpose() * A * P;
}

EllipticityReport ellipticity_report(const Matrix& A, const Matrix& B, int n, int k) {
  EllipticityReport rep;
  rep.gamma_legendre = legendre_constant(A, &rep.witness_legendre);
  rep.lh_restarts = 48;
  rep.gamma_lh = legendre_hadamard_constant(A, n, k, &rep.witness_lh_a, &rep.witness_lh_b,
                                            rep.lh_restarts);
  if (!(rep.gamma_lh > 0))
    throw Error(ErrorCode::singular_input,
                "ellipticity_report: A does not satisfy Legendre-Hadamard");
  std::tie(rep.c1, rep.c2) =
      ellipticity_constants(rep.gamma_lh, B, n, k, &rep.witness_c1, &rep.witness_c2);
  return rep;
}

}  // namespace hodge
