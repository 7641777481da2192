#pragma once

// Exterior algebra over R^n with the Euclidean metric and the standard
// orientation. Degree-k alternating forms are stored by their coefficients
// on the lexicographically ordered basis {e^I : I increasing, |I| = k};
// the inner product makes that basis orthonormal.
//
// All sign bookkeeping (wedge, interior product, Hodge star) is precomputed
// once per (n, k) in a shared table; the tables are built lazily and the
// initialization is race-safe.

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "hodgeforms/errors.hpp"

namespace hodge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

long binomial(int n, int k);

/// Strictly increasing tuple of axis labels from {1, ..., n}. Immutable.
class MultiIndex {
public:
  MultiIndex() = default;
  MultiIndex(int n, std::vector<int> axes);

  int n() const { return n_; }
  int degree() const { return static_cast<int>(axes_.size()); }
  const std::vector<int>& axes() const { return axes_; }
  bool contains(int axis) const;
  std::uint64_t mask() const { return mask_; }

  bool operator==(const MultiIndex& other) const {
    return n_ == other.n_ && axes_ == other.axes_;
  }

private:
  int n_ = 0;
  std::vector<int> axes_;
  std::uint64_t mask_ = 0;
};

/// The lexicographically ordered degree-k basis of Lambda^k(R^n).
/// Empty when k < 0 or k > n.
const std::vector<MultiIndex>& multiindex_basis(int n, int k);

/// Position of a basis multi-index (by axis mask) in multiindex_basis(n, k).
int multiindex_position(int n, int k, std::uint64_t mask);

/// Alternating k-form on R^n. Out-of-range degrees are legal and denote the
/// canonical zero object of the empty-basis space. Immutable.
class Form {
public:
  /// Zero form of the given degree.
  Form(int n, int k);
  Form(int n, int k, Vector coeffs);

  int n() const { return n_; }
  int degree() const { return k_; }
  const Vector& coeffs() const { return coeffs_; }
  double operator[](int i) const { return coeffs_[i]; }
  long dim() const { return coeffs_.size(); }
  bool is_zero_object() const { return k_ < 0 || k_ > n_; }

private:
  int n_;
  int k_;
  Vector coeffs_;
};

Form wedge(const Form& xi, const Form& eta);
Form interior_product(const Vector& v, const Form& xi);
Form hodge_star(const Form& xi);
double inner(const Form& xi, const Form& eta);

/// Pullback by the linear map T: x -> Tx, i.e. (T* xi)(v_1,...,v_k)
/// = xi(T v_1, ..., T v_k). Coefficient action is the k-th compound
/// matrix of T^T.
Form pullback_linear(const Matrix& T, const Form& xi);

/// Splits xi into its parts along a unit vector nu:
/// first = nu ^ (nu _| xi)  (normal part),
/// second = nu _| (nu ^ xi) (tangential part), xi = first + second.
std::pair<Form, Form> split_along_normal(const Vector& nu, const Form& xi);

// Coefficient-level linear maps. Row/column counts follow the basis sizes,
// so maps into an out-of-range degree have zero rows.

/// Matrix of xi -> v ^ xi, Lambda^k -> Lambda^{k+1}.
Matrix wedge_matrix(int n, int k, const Vector& v);
/// Matrix of xi -> v _| xi, Lambda^k -> Lambda^{k-1}.
Matrix interior_matrix(int n, int k, const Vector& v);
/// Matrix of the Hodge star, Lambda^k -> Lambda^{n-k} (diagonal signs
/// composed with the complement reindexing).
Matrix star_matrix(int n, int k);
/// Matrix of pullback_linear(T, .) on Lambda^k.
Matrix pullback_matrix(const Matrix& T, int k);

}  // namespace hodge
