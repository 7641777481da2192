#pragma once

// Spatially varying coefficient maps A(x): Lambda^a -> Lambda^b and their
// pointwise analysis: Legendre / Legendre-Hadamard constants, the ellipticity
// constants c1, c2 of the normal-direction split, the gradient-form operator
// Atilde that turns  int <A du, dv> + int <delta(Bu), delta(Bv)>  into
// int <Atilde grad u, grad v>, and pullback conjugation.

#include <functional>

#include "hodgeforms/forms.hpp"

namespace hodge {

enum class Smoothness { constant, smooth };

/// Pointwise linear map Lambda^a -> Lambda^b over a domain in R^n, sampled
/// as a C(n,b) x C(n,a) matrix.
struct OperatorField {
  int n = 0;
  int degree_source = 0;
  int degree_target = 0;
  std::function<Matrix(const Vector&)> sample;
  Smoothness smoothness = Smoothness::smooth;

  static OperatorField constant(int n, int a, int b, Matrix M);
  static OperatorField identity(int n, int degree);
  /// scalar(x) * identity on Lambda^degree.
  static OperatorField scalar(int n, int degree,
                              std::function<double(const Vector&)> fn,
                              Smoothness smoothness = Smoothness::smooth);

  Matrix operator()(const Vector& x) const;
  long rows() const { return binomial(n, degree_target); }
  long cols() const { return binomial(n, degree_source); }
};

/// Checks finiteness of samples at the given points, and point-independence
/// when the field is tagged constant.
void validate_operator_field(const OperatorField& f, const std::vector<Vector>& points);

struct EllipticityReport {
  double gamma_legendre = 0.0;  // min eig of sym(A) on Lambda^{k+1}
  double gamma_lh = 0.0;        // Legendre-Hadamard constant (upper bound)
  double c1 = 0.0;
  double c2 = 0.0;
  Vector witness_legendre;  // Lambda^{k+1}
  Vector witness_lh_a;      // R^n
  Vector witness_lh_b;      // Lambda^k
  Vector witness_c1;        // Lambda^k
  Vector witness_c2;        // Lambda^k
  int lh_restarts = 0;
};

/// Minimum eigenvalue of (M + M^T)/2; positive iff M satisfies the Legendre
/// condition. Witness (optional) receives the minimizing unit vector.
double legendre_constant(const Matrix& M, Vector* witness = nullptr);

/// Best found value of  <A(a^b); a^b> / |a^b|^2  over unit a in R^n and
/// b in Lambda^k, by alternating eigen-minimization with random restarts.
/// An upper bound on the true infimum.
double legendre_hadamard_constant(const Matrix& A, int n, int k,
                                  Vector* witness_a = nullptr,
                                  Vector* witness_b = nullptr,
                                  int restarts = 48, double tol = 1e-10);

/// The constants of the normal-direction ellipticity bounds
///   gamma_A |e_n ^ xi|^2 + |e_n _| B xi|^2 >= c1 |xi|^2
///   gamma_A |e_n ^ B^{-1} xi|^2 + |e_n _| xi|^2 >= c2 |xi|^2,
/// as smallest eigenvalues of the assembled symmetric forms.
std::pair<double, double> ellipticity_constants(double gamma_A, const Matrix& B,
                                                int n, int k,
                                                Vector* witness_c1 = nullptr,
                                                Vector* witness_c2 = nullptr);

/// Matrix of Atilde on R^{C(n,k) * n} in the basis {e_p (x) e^I} (p-major
/// flattening: slot (p-1)*C(n,k) + position of I):
///   <Atilde(a1 (x) b1); a2 (x) b2> = <A(a1 ^ b1); a2 ^ b2> + <a1 _| B b1; a2 _| B b2>.
Matrix build_atilde(const Matrix& A, const Matrix& B, int n, int k);

/// Generalization used by the normal-condition substitution and the Gaffney
/// forms: wedge part composed with Bw, interior part with Bi:
///   <A(a1 ^ Bw b1); a2 ^ Bw b2> + <a1 _| Bi b1; a2 _| Bi b2>.
Matrix build_atilde_general(const Matrix& A, const Matrix& Bw, const Matrix& Bi,
                            int n, int k);

/// The C(n,k) x C(n,k) block Atilde^{pq} with
/// <Atilde^{pq} xi; eta> = <Atilde(e_p (x) xi); e_q (x) eta>, p, q 1-based.
Matrix atilde_block(const Matrix& atilde, int n, int k, int p, int q);

/// Coefficient transform under the substitution x = Ty: returns P^T A P where
/// P is the pullback matrix of T on Lambda^degree. Coincides with
/// (T^{-1})* o A o T* for orthogonal T and preserves the Legendre and
/// Legendre-Hadamard conditions for any invertible T (cond <= 1e12).
Matrix conjugate_pullback(const Matrix& A, const Matrix& T, int degree);

/// Full report for a coefficient pair at a point: Legendre and
/// Legendre-Hadamard constants of A, and c1, c2 computed from gamma_lh and B.
EllipticityReport ellipticity_report(const Matrix& A, const Matrix& B, int n, int k);

}  // namespace hodge
