#include "hodgeforms/forms.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <mutex>

namespace hodge {

long binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

MultiIndex::MultiIndex(int n, std::vector<int> axes) : n_(n), axes_(std::move(axes)) {
  if (n < 1 || n > 62)
    throw Error(ErrorCode::invalid_argument, "MultiIndex: n out of range");
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i] < 1 || axes_[i] > n)
      throw Error(ErrorCode::invalid_argument, "MultiIndex: axis label out of range");
    if (i > 0 && axes_[i] <= axes_[i - 1])
      throw Error(ErrorCode::invalid_argument, "MultiIndex: axes not strictly increasing");
    mask_ |= std::uint64_t{1} << (axes_[i] - 1);
  }
}

bool MultiIndex::contains(int axis) const {
  return axis >= 1 && axis <= n_ && (mask_ >> (axis - 1)) & 1;
}

namespace {

// Permutation sign of sorting the concatenation (I, J) of two disjoint
// increasing tuples, given as bit masks.
int concat_sign(std::uint64_t mi, std::uint64_t mj) {
  int inversions = 0;
  while (mj) {
    const int b = std::countr_zero(mj);
    mj &= mj - 1;
    inversions += std::popcount(mi >> (b + 1));
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

// Lexicographically ordered increasing k-tuples over {1..n}, as axis lists.
std::vector<std::vector<int>> enumerate_tuples(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> axes(k);
  for (int i = 0; i < k; ++i) axes[i] = i + 1;
  while (true) {
    out.push_back(axes);
    int i = k - 1;
    while (i >= 0 && axes[i] == n - k + i + 1) --i;
    if (i < 0) break;
    ++axes[i];
    for (int j = i + 1; j < k; ++j) axes[j] = axes[j - 1] + 1;
  }
  return out;
}

std::uint64_t tuple_mask(const std::vector<int>& axes) {
  std::uint64_t m = 0;
  for (int a : axes) m |= std::uint64_t{1} << (a - 1);
  return m;
}

// mask -> lexicographic position, for one (n, k), sorted for binary search.
std::vector<std::pair<std::uint64_t, int>> mask_positions(int n, int k) {
  std::vector<std::pair<std::uint64_t, int>> v;
  auto tuples = enumerate_tuples(n, k);
  for (std::size_t i = 0; i < tuples.size(); ++i)
    v.emplace_back(tuple_mask(tuples[i]), static_cast<int>(i));
  std::sort(v.begin(), v.end());
  return v;
}

int lookup(const std::vector<std::pair<std::uint64_t, int>>& v, std::uint64_t mask) {
  auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(mask, -1));
  if (it == v.end() || it->first != mask) return -1;
  return it->second;
}

struct SignTable {
  int n = 0;
  int k = 0;
  std::vector<MultiIndex> basis;                       // lexicographic
  std::vector<std::pair<std::uint64_t, int>> by_mask;  // sorted for lookup
  // Per 0-based axis p and basis position i: position of e_p ^ e^I in the
  // degree k+1 basis (resp. e_p _| e^I in the degree k-1 basis), or -1,
  // together with the sign.
  std::vector<std::vector<int>> wedge_pos, wedge_sign;
  std::vector<std::vector<int>> int_pos, int_sign;
  std::vector<int> star_pos, star_sign;  // into the degree n-k basis
};

std::unique_ptr<SignTable> build_table(int n, int k) {
  auto t = std::make_unique<SignTable>();
  t->n = n;
  t->k = k;
  for (auto& axes : enumerate_tuples(n, k)) t->basis.emplace_back(n, axes);
  t->by_mask = mask_positions(n, k);

  const auto up = mask_positions(n, k + 1);
  const auto down = mask_positions(n, k - 1);
  const auto comp = mask_positions(n, n - k);
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;

  const std::size_t m = t->basis.size();
  t->wedge_pos.assign(n, std::vector<int>(m, -1));
  t->wedge_sign.assign(n, std::vector<int>(m, 0));
  t->int_pos.assign(n, std::vector<int>(m, -1));
  t->int_sign.assign(n, std::vector<int>(m, 0));
  t->star_pos.assign(m, -1);
  t->star_sign.assign(m, 0);

  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t mi = t->basis[i].mask();
    for (int p = 0; p < n; ++p) {
      const std::uint64_t mp = std::uint64_t{1} << p;
      if (!(mi & mp)) {
        t->wedge_pos[p][i] = lookup(up, mi | mp);
        t->wedge_sign[p][i] = concat_sign(mp, mi);
      } else {
        t->int_pos[p][i] = lookup(down, mi & ~mp);
        // e_p _| e^I = (-1)^{#axes of I below p} e^{I \ p}
        t->int_sign[p][i] = (std::popcount(mi & (mp - 1)) % 2 == 0) ? 1 : -1;
      }
    }
    const std::uint64_t mc = full & ~mi;
    t->star_pos[i] = lookup(comp, mc);
    t->star_sign[i] = concat_sign(mi, mc);
  }
  return t;
}

const SignTable& sign_table(int n, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<SignTable>> cache;
  if (n < 1 || n > 62)
    throw Error(ErrorCode::invalid_argument, "sign_table: n out of range");
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, k);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_table(n, k)).first;
  return *it->second;
}

}  // namespace

const std::vector<MultiIndex>& multiindex_basis(int n, int k) {
  return sign_table(n, k).basis;
}

int multiindex_position(int n, int k, std::uint64_t mask) {
  return lookup(sign_table(n, k).by_mask, mask);
}

Form::Form(int n, int k) : n_(n), k_(k), coeffs_(Vector::Zero(binomial(n, k))) {
  if (n < 1 || n > 62)
    throw Error(ErrorCode::invalid_argument, "Form: n out of range");
}

Form::Form(int n, int k, Vector coeffs) : n_(n), k_(k), coeffs_(std::move(coeffs)) {
  if (n < 1 || n > 62)
    throw Error(ErrorCode::invalid_argument, "Form: n out of range");
  if (coeffs_.size() != binomial(n, k))
    throw Error(ErrorCode::invalid_argument,
                "Form: coefficient count does not match basis size");
}

Form wedge(const Form& xi, const Form& eta) {
  if (xi.n() != eta.n())
    throw Error(ErrorCode::invalid_argument, "wedge: mismatched ambient dimension");
  const int n = xi.n();
  const int k = xi.degree() + eta.degree();
  Form out(n, k);
  if (xi.is_zero_object() || eta.is_zero_object() || k > n) return out;
  const auto& bx = multiindex_basis(n, xi.degree());
  const auto& be = multiindex_basis(n, eta.degree());
  const auto& bt = sign_table(n, k);
  Vector c = Vector::Zero(out.dim());
  for (std::size_t i = 0; i < bx.size(); ++i) {
    if (xi[i] == 0.0) continue;
    for (std::size_t j = 0; j < be.size(); ++j) {
      if (eta[j] == 0.0) continue;
      const std::uint64_t mi = bx[i].mask(), mj = be[j].mask();
      if (mi & mj) continue;
      c[lookup(bt.by_mask, mi | mj)] += concat_sign(mi, mj) * xi[i] * eta[j];
    }
  }
  return Form(n, k, std::move(c));
}

Form interior_product(const Vector& v, const Form& xi) {
  const int n = xi.n();
  if (v.size() != n)
    throw Error(ErrorCode::invalid_argument, "interior_product: vector dimension mismatch");
  const int k = xi.degree() - 1;
  Form out(n, k);
  if (xi.is_zero_object() || k < 0) return out;
  const auto& t = sign_table(n, xi.degree());
  Vector c = Vector::Zero(out.dim());
  for (long i = 0; i < xi.dim(); ++i) {
    if (xi[i] == 0.0) continue;
    for (int p = 0; p < n; ++p) {
      if (v[p] == 0.0) continue;
      const int pos = t.int_pos[p][i];
      if (pos >= 0) c[pos] += t.int_sign[p][i] * v[p] * xi[i];
    }
  }
  return Form(n, k, std::move(c));
}

Form hodge_star(const Form& xi) {
  const int n = xi.n();
  Form out(n, n - xi.degree());
  if (xi.is_zero_object()) return out;
  const auto& t = sign_table(n, xi.degree());
  Vector c = Vector::Zero(out.dim());
  for (long i = 0; i < xi.dim(); ++i)
    c[t.star_pos[i]] = t.star_sign[i] * xi[i];
  return Form(n, n - xi.degree(), std::move(c));
}

double inner(const Form& xi, const Form& eta) {
  if (xi.n() != eta.n() || xi.degree() != eta.degree())
    throw Error(ErrorCode::invalid_argument, "inner: mismatched (n, k)");
  return xi.coeffs().dot(eta.coeffs());
}

Form pullback_linear(const Matrix& T, const Form& xi) {
  if (T.rows() != xi.n() || T.cols() != xi.n())
    throw Error(ErrorCode::invalid_argument, "pullback_linear: T must be n x n");
  if (xi.is_zero_object()) return xi;
  return Form(xi.n(), xi.degree(), pullback_matrix(T, xi.degree()) * xi.coeffs());
}

std::pair<Form, Form> split_along_normal(const Vector& nu, const Form& xi) {
  if (nu.size() != xi.n())
    throw Error(ErrorCode::invalid_argument, "split_along_normal: dimension mismatch");
  Form nu1(xi.n(), 1, nu);
  Form normal_part = wedge(nu1, interior_product(nu, xi));
  Form tangential_part = interior_product(nu, wedge(nu1, xi));
  return {std::move(normal_part), std::move(tangential_part)};
}

Matrix wedge_matrix(int n, int k, const Vector& v) {
  if (v.size() != n)
    throw Error(ErrorCode::invalid_argument, "wedge_matrix: vector dimension mismatch");
  Matrix M = Matrix::Zero(binomial(n, k + 1), binomial(n, k));
  if (k < 0 || k > n) return M;
  const auto& t = sign_table(n, k);
  for (long i = 0; i < M.cols(); ++i)
    for (int p = 0; p < n; ++p) {
      const int pos = t.wedge_pos[p][i];
      if (pos >= 0) M(pos, i) += t.wedge_sign[p][i] * v[p];
    }
  return M;
}

Matrix interior_matrix(int n, int k, const Vector& v) {
  if (v.size() != n)
    throw Error(ErrorCode::invalid_argument, "interior_matrix: vector dimension mismatch");
  Matrix M = Matrix::Zero(binomial(n, k - 1), binomial(n, k));
  if (k < 1 || k > n) return M;
  const auto& t = sign_table(n, k);
  for (long i = 0; i < M.cols(); ++i)
    for (int p = 0; p < n; ++p) {
      const int pos = t.int_pos[p][i];
      if (pos >= 0) M(pos, i) += t.int_sign[p][i] * v[p];
    }
  return M;
}

Matrix star_matrix(int n, int k) {
  Matrix M = Matrix::Zero(binomial(n, n - k), binomial(n, k));
  if (k < 0 || k > n) return M;
  const auto& t = sign_table(n, k);
  for (long i = 0; i < M.cols(); ++i) M(t.star_pos[i], i) = t.star_sign[i];
  return M;
}

Matrix pullback_matrix(const Matrix& T, int k) {
  const int n = static_cast<int>(T.rows());
  if (T.cols() != n)
    throw Error(ErrorCode::invalid_argument, "pullback_matrix: T must be square");
  const long m = binomial(n, k);
  Matrix M = Matrix::Zero(m, m);
  if (k < 0 || k > n) return M;
  if (k == 0) {
    M(0, 0) = 1.0;
    return M;
  }
  const auto& basis = multiindex_basis(n, k);
  Matrix sub(k, k);
  // (T* xi)_I = sum_J xi_J det T[J, I], the k-th compound matrix of T^T.
  for (long row = 0; row < m; ++row) {
    const auto& I = basis[row].axes();
    for (long col = 0; col < m; ++col) {
      const auto& J = basis[col].axes();
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = T(J[r] - 1, I[c] - 1);
      M(row, col) = sub.determinant();
    }
  }
  return M;
}

}  // namespace hodge
