#include "hodgeforms/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace hodge {

namespace {

double inf_norm(const SpMat& S) {
  Vector rows = Vector::Zero(S.rows());
  for (int o = 0; o < S.outerSize(); ++o)
    for (SpMat::InnerIterator it(S, o); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

double max_abs(const SpMat& S) {
  double m = 0.0;
  for (int o = 0; o < S.outerSize(); ++o)
    for (SpMat::InnerIterator it(S, o); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

bool is_symmetric(const SpMat& S) {
  SpMat D = SpMat(S.transpose()) - S;
  return max_abs(D) <= 1e-8 * std::max(1e-300, max_abs(S));
}

// Deterministic dense block used to seed iterations.
Matrix seed_block(long n, int b, int phase) {
  Matrix X(n, b);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < b; ++j)
      X(i, j) = std::sin(0.5 + 0.618034 * (i + 1.0) * (j + 1.0) + 0.13 * phase);
  return X;
}

// X <- X G^{-1/2} for the Gram G = X^T W X (W given by a callback), making
// the columns W-orthonormal. Throws on numerical rank loss.
template <class ApplyW>
void orthonormalize(Matrix& X, ApplyW&& applyW) {
  const Matrix WX = applyW(X);
  const Matrix G = X.transpose() * WX;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.transpose()));
  const Vector ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-13 * std::max(1.0, ev.maxCoeff()))
    throw Error(ErrorCode::numerical, "eigensolver block lost rank during iteration");
  const Matrix half =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  X = X * half;
}

template <class Factorization>
Vector finish_solve(const SpMat& S, Factorization& fact, const Vector& rhs, double lambda,
                    bool spd, LinearSolveInfo* info) {
  const double normS = inf_norm(S);
  // a few steps of inverse power iteration to estimate the smallest
  // singular value, hence the inverse condition number
  Vector z(S.rows());
  for (long i = 0; i < z.size(); ++i) z[i] = std::sin(0.7 * i + 0.3);
  z.normalize();
  double smin = normS;
  for (int it = 0; it < 3; ++it) {
    Vector y = fact.solve(z);
    const double ny = y.norm();
    if (!std::isfinite(ny) || ny == 0.0) break;
    smin = 1.0 / ny;
    z = y / ny;
  }
  const double invcond = smin / std::max(normS, 1e-300);
  if (!std::isfinite(invcond) || invcond < 1e-12) {
    std::ostringstream msg;
    msg << "solve_linear: matrix numerically singular (estimated inverse condition "
        << invcond << "); lambda = " << lambda
        << " appears to lie in the discrete spectrum";
    throw Error(ErrorCode::spectrum_hit, msg.str());
  }
  Vector x = fact.solve(rhs);
  const double rel = (S * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rhs.norm() == 0.0) x.setZero();
  else if (!std::isfinite(rel) || rel > 1e-9) {
    std::ostringstream msg;
    msg << "solve_linear: residual " << rel << " exceeds 1e-9";
    throw Error(ErrorCode::numerical, msg.str());
  }
  if (info != nullptr) {
    info->spd_path = spd;
    info->residual = rhs.norm() == 0.0 ? 0.0 : rel;
    info->invcond = invcond;
  }
  return x;
}

}  // namespace

Vector solve_shifted(const SpMat& K, const SpMat& M, double lambda, const Vector& rhs,
                     LinearSolveInfo* info) {
  if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows() ||
      rhs.size() != K.rows())
    throw Error(ErrorCode::invalid_argument, "solve_shifted: dimension mismatch");
  SpMat S = K + lambda * M;
  S.makeCompressed();
  if (lambda > 0.0 && is_symmetric(S)) {
    Eigen::SimplicialLDLT<SpMat> fact(S);
    if (fact.info() == Eigen::Success)
      return finish_solve(S, fact, rhs, lambda, true, info);
  }
  Eigen::SparseLU<SpMat> fact;
  fact.analyzePattern(S);
  fact.factorize(S);
  if (fact.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "solve_linear: factorization failed; lambda = " << lambda
        << " appears to lie in the discrete spectrum";
    throw Error(ErrorCode::spectrum_hit, msg.str());
  }
  return finish_solve(S, fact, rhs, lambda, false, info);
}

Vector solve_linear(const AssembledProblem& problem, LinearSolveInfo* info) {
  return solve_shifted(problem.K, problem.M, problem.lambda, problem.rhs, info);
}

EigenResult eig_pairs(const SpMat& K, const SpMat& M, int count, const EigOptions& opts) {
  const long n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n)
    throw Error(ErrorCode::invalid_argument, "eig_pairs: dimension mismatch");
  if (count < 1) throw Error(ErrorCode::invalid_argument, "eig_pairs: count must be >= 1");
  count = static_cast<int>(std::min<long>(count, n));
  if (!is_symmetric(K) || !is_symmetric(M))
    throw Error(ErrorCode::invalid_argument,
                "eig_pairs: K and M must be symmetric (1e-8 relative)");
  {
    Eigen::SimplicialLDLT<SpMat> mf(M);
    if (mf.info() != Eigen::Success || mf.vectorD().minCoeff() <= 0.0)
      throw Error(ErrorCode::singular_input, "eig_pairs: M must be positive definite");
  }

  Vector rho;
  Matrix V;
  if (n <= opts.dense_threshold) {
    const Matrix Kd(K), Md(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Kd, Md);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::numerical, "eig_pairs: dense eigensolver failed");
    rho = es.eigenvalues().head(count);
    V = es.eigenvectors().leftCols(count);
  } else {
    // shift-invert block subspace iteration with a small negative shift;
    // K + mu M stays definite because K is positive semidefinite
    double diagK = 0.0, diagM = 0.0;
    for (long i = 0; i < n; ++i) {
      diagK += K.coeff(i, i);
      diagM += M.coeff(i, i);
    }
    const double scale = diagM > 0.0 ? diagK / diagM : 1.0;
    double mu = std::max(1e-6 * scale, 1e-12);
    Eigen::SimplicialLDLT<SpMat> fact;
    for (int attempt = 0;; ++attempt) {
      SpMat S = K + mu * M;
      S.makeCompressed();
      fact.compute(S);
      if (fact.info() == Eigen::Success && fact.vectorD().minCoeff() > 0.0) break;
      if (attempt >= 4)
        throw Error(ErrorCode::numerical, "eig_pairs: shift factorization failed");
      mu *= 100.0;
    }
    const int b = static_cast<int>(std::min<long>(n, count + 8));
    Matrix X = seed_block(n, b, 0);
    const auto applyM = [&](const Matrix& Z) { return Matrix(M * Z); };
    orthonormalize(X, applyM);
    const double normK = inf_norm(K), normM = inf_norm(M);
    Vector theta = Vector::Zero(b);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations && !converged; ++it) {
      Matrix Y = fact.solve(M * X);
      const Matrix MY = M * Y;
      const Matrix KY = K * Y;
      const Matrix Hm = Y.transpose() * MY;
      const Matrix Hk = Y.transpose() * KY;
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> small(
          0.5 * (Hk + Hk.transpose()), 0.5 * (Hm + Hm.transpose()));
      if (small.info() != Eigen::Success)
        throw Error(ErrorCode::numerical, "eig_pairs: Rayleigh-Ritz step failed");
      theta = small.eigenvalues();
      X = Y * small.eigenvectors();
      converged = true;
      for (int j = 0; j < count && converged; ++j) {
        const Vector xj = X.col(j);
        const double r = (K * xj - theta[j] * (M * xj)).norm() /
                         ((normK + std::abs(theta[j]) * normM) * xj.norm());
        if (r > opts.tol) converged = false;
      }
    }
    if (!converged)
      throw Error(ErrorCode::numerical, "eig_pairs: subspace iteration did not converge");
    rho = theta.head(count);
    V = X.leftCols(count);
  }

  EigenResult result;
  result.sigma = -rho;
  result.vectors = V;
  result.residuals.resize(count);
  const double normK = inf_norm(K), normM = inf_norm(M);
  for (int j = 0; j < count; ++j) {
    const Vector xj = V.col(j);
    result.residuals[j] = (K * xj - rho[j] * (M * xj)).norm() /
                          ((normK + std::abs(rho[j]) * normM) * xj.norm());
    if (result.residuals[j] > 1e-7) {
      std::ostringstream msg;
      msg << "eig_pairs: residual " << result.residuals[j] << " of pair " << j
          << " exceeds 1e-7";
      throw Error(ErrorCode::numerical, msg.str());
    }
  }
  return result;
}

HarmonicBasis harmonic_basis(const SimplicialMesh& mesh, int k, BcKind bc, double c_tau,
                             AssemblyMode mode) {
  if (bc != BcKind::tangential && bc != BcKind::normal)
    throw Error(ErrorCode::invalid_argument,
                "harmonic_basis: boundary condition must be tangential or normal");
  const DofSpace space = build_space(mesh, k, bc);
  const auto A = OperatorField::identity(mesh.n, k + 1);
  const auto B = OperatorField::identity(mesh.n, k);
  const SpMat K = reduce(space, assemble_stiffness_full(space, A, B, mode));
  const SpMat M = reduce(space, assemble_mass_full(space, B, mode));
  const double h = mesh.mesh_size();
  HarmonicBasis basis;
  basis.tau = c_tau * h * h;

  int request = static_cast<int>(std::min<long>(space.free_dofs, 8));
  EigenResult eig;
  for (;;) {
    eig = eig_pairs(K, M, request);
    const Vector rho = -eig.sigma;
    if (rho[request - 1] > basis.tau || request == space.free_dofs) break;
    request = static_cast<int>(std::min<long>(space.free_dofs, 4L * request));
  }
  basis.rho = -eig.sigma;
  int dim = 0;
  for (Eigen::Index i = 0; i < basis.rho.size(); ++i)
    if (basis.rho[i] <= basis.tau) ++dim;
  basis.dimension = dim;
  basis.vectors = eig.vectors.leftCols(dim);
  basis.full_vectors = Matrix(space.P) * basis.vectors;
  for (Eigen::Index i = 0; i < basis.rho.size(); ++i)
    if (basis.rho[i] > basis.tau / 3.0 && basis.rho[i] <= 3.0 * basis.tau) {
      std::ostringstream msg;
      msg << "harmonic_basis: eigenvalue " << basis.rho[i]
          << " within a factor 3 of the threshold " << basis.tau;
      basis.warning = msg.str();
      break;
    }
  return basis;
}

RayleighMin rayleigh_min(const SpMat& Q, const SpMat& N, const Matrix& exclusion,
                         const EigOptions& opts) {
  const long n = Q.rows();
  if (Q.cols() != n || N.rows() != n || N.cols() != n)
    throw Error(ErrorCode::invalid_argument, "rayleigh_min: dimension mismatch");
  if (exclusion.size() != 0 && exclusion.rows() != n)
    throw Error(ErrorCode::invalid_argument, "rayleigh_min: exclusion rows mismatch");
  if (!is_symmetric(Q) || !is_symmetric(N))
    throw Error(ErrorCode::invalid_argument, "rayleigh_min: forms must be symmetric");
  const long e = exclusion.size() == 0 ? 0 : exclusion.cols();

  if (n <= opts.dense_threshold) {
    Matrix C;
    if (e == 0) {
      C = Matrix::Identity(n, n);
    } else {
      Eigen::ColPivHouseholderQR<Matrix> qr(exclusion);
      const long r = qr.rank();
      const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
      C = full.rightCols(n - r);
    }
    const Matrix Qc = C.transpose() * (Q * C).eval();
    const Matrix Nc = C.transpose() * (N * C).eval();
    Eigen::LLT<Matrix> llt(0.5 * (Nc + Nc.transpose()));
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_input,
                  "rayleigh_min: N singular on the working subspace");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (Qc + Qc.transpose()),
                                                        0.5 * (Nc + Nc.transpose()));
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::numerical, "rayleigh_min: dense eigensolver failed");
    RayleighMin out;
    out.value = es.eigenvalues()[0];
    out.minimizer = C * es.eigenvectors().col(0);
    return out;
  }

  // projected shift-invert iteration for large systems
  Matrix Eo;
  if (e > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(exclusion);
    Eo = Matrix(qr.householderQ() * Matrix::Identity(n, qr.rank()));
  }
  const auto project = [&](Matrix& X) {
    if (Eo.size() != 0) X -= Eo * (Eo.transpose() * X).eval();
  };
  double diagQ = 0.0, diagN = 0.0;
  for (long i = 0; i < n; ++i) {
    diagQ += Q.coeff(i, i);
    diagN += N.coeff(i, i);
  }
  const double scale = diagN > 0.0 ? diagQ / diagN : 1.0;
  double mu = std::max(1e-6 * scale, 1e-12);
  Eigen::SimplicialLDLT<SpMat> fact;
  for (int attempt = 0;; ++attempt) {
    SpMat S = Q + mu * N;
    S.makeCompressed();
    fact.compute(S);
    if (fact.info() == Eigen::Success) break;
    if (attempt >= 4)
      throw Error(ErrorCode::numerical, "rayleigh_min: shift factorization failed");
    mu *= 100.0;
  }
  const int b = static_cast<int>(std::min<long>(n, 6));
  Matrix X = seed_block(n, b, 1);
  project(X);
  const auto applyN = [&](const Matrix& Z) { return Matrix(N * Z); };
  orthonormalize(X, applyN);
  const double normQ = inf_norm(Q), normN = inf_norm(N);
  Vector theta = Vector::Zero(b);
  bool converged = false;
  for (int it = 0; it < opts.max_iterations && !converged; ++it) {
    Matrix Y = fact.solve(N * X);
    project(Y);
    const Matrix Hn = Y.transpose() * (N * Y).eval();
    const Matrix Hq = Y.transpose() * (Q * Y).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> small(0.5 * (Hq + Hq.transpose()),
                                                           0.5 * (Hn + Hn.transpose()));
    if (small.info() != Eigen::Success)
      throw Error(ErrorCode::numerical, "rayleigh_min: Rayleigh-Ritz step failed");
    theta = small.eigenvalues();
    X = Y * small.eigenvectors();
    Vector x0 = X.col(0);
    Vector res = Q * x0 - theta[0] * (N * x0);
    Matrix resm = res;
    project(resm);
    const double r =
        resm.norm() / ((normQ + std::abs(theta[0]) * normN) * x0.norm());
    converged = r <= opts.tol;
  }
  if (!converged)
    throw Error(ErrorCode::numerical, "rayleigh_min: iteration did not converge");
  RayleighMin out;
  out.value = theta[0];
  out.minimizer = X.col(0);
  return out;
}

}  // namespace hodge
