#include "hodgeforms/drivers.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hodgeforms/quadrature.hpp"

namespace hodge {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::string fmt_point(const Vector& x) {
  std::string out = "(";
  char buf[32];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.4g", i ? ", " : "", x[i]);
    out += buf;
  }
  return out + ")";
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct CellFrame {
  Matrix verts;  // (n+1) x n
  Matrix grads;  // (n+1) x n, row a is the gradient of hat function a
  Vector center;
  double volume = 0.0;
};

CellFrame cell_frame(const SimplicialMesh& mesh, int c) {
  CellFrame g;
  g.verts = mesh.cell_vertices(c);
  const int n = mesh.n;
  Matrix E(n, n);
  for (int i = 0; i < n; ++i) E.col(i) = (g.verts.row(i + 1) - g.verts.row(0)).transpose();
  const Matrix Einv = E.inverse();
  g.grads.resize(n + 1, n);
  for (int i = 1; i <= n; ++i) g.grads.row(i) = Einv.row(i - 1);
  g.grads.row(0) = -g.grads.middleRows(1, n).colwise().sum();
  g.volume = E.determinant() / factorial(n);
  g.center = g.verts.colwise().mean().transpose();
  return g;
}

OperatorField identity_or(const OperatorField& F, int n, int degree, const char* name) {
  if (!F.sample) return OperatorField::identity(n, degree);
  if (F.n != n || F.degree_source != degree || F.degree_target != degree)
    throw Error(ErrorCode::invalid_argument,
                std::string("coefficient ") + name + " must map Lambda^" +
                    std::to_string(degree) + " to itself on R^" + std::to_string(n));
  return F;
}

bool identity_valued(const OperatorField& F, const SimplicialMesh& mesh) {
  if (!F.sample) return true;
  const long m = F.rows();
  for (int c : {0, mesh.num_cells() / 2, mesh.num_cells() - 1}) {
    const Vector x = cell_frame(mesh, c).center;
    if ((F(x) - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-14) return false;
  }
  return true;
}

std::vector<Vector> sample_centroids(const SimplicialMesh& mesh, int count) {
  std::vector<Vector> pts;
  const int C = mesh.num_cells();
  const int take = std::min(C, count);
  for (int i = 0; i < take; ++i) pts.push_back(cell_frame(mesh, i * (C - 1) / std::max(1, take - 1)).center);
  return pts;
}

/// Ellipticity preconditions at sampled cell centroids. `a_mode` selects the
/// condition on A: 0 skip, 1 Legendre-Hadamard, 2 Legendre (with the
/// constant-coefficient Legendre-Hadamard escape when `lh_if_constant`).
void require_elliptic(const SimplicialMesh& mesh, const OperatorField& A,
                      const OperatorField& B, int k, int a_mode, int b_mode,
                      bool lh_if_constant = false) {
  const int n = mesh.n;
  const long ma = binomial(n, k + 1);
  const long mb = binomial(n, k);
  if (a_mode == 2 && lh_if_constant && A.smoothness == Smoothness::constant) a_mode = 1;
  for (const Vector& x : sample_centroids(mesh, 7)) {
    if (b_mode && mb > 0) {
      const Matrix Bx = B(x);
      Vector w;
      const double gB = legendre_constant(Bx, &w);
      if (!(gB > 1e-10 * (1.0 + Bx.norm())))
        throw Error(ErrorCode::singular_input,
                    "coefficient B fails the Legendre condition at " + fmt_point(x) +
                        " (min eig " + fmt_num(gB) + ")");
    }
    if (a_mode && ma > 0) {
      const Matrix Ax = A(x);
      if (a_mode == 2) {
        Vector w;
        const double gA = legendre_constant(Ax, &w);
        if (!(gA > 1e-10 * (1.0 + Ax.norm())))
          throw Error(ErrorCode::singular_input,
                      "coefficient A fails the Legendre condition at " + fmt_point(x) +
                          " (min eig " + fmt_num(gA) + ")");
      } else {
        const double gA = legendre_hadamard_constant(Ax, n, k, nullptr, nullptr);
        if (!(gA > 1e-10 * (1.0 + Ax.norm())))
          throw Error(ErrorCode::singular_input,
                      "coefficient A fails the Legendre-Hadamard condition at " +
                          fmt_point(x) + " (constant " + fmt_num(gA) + ")");
      }
    }
  }
}

void require_invertible(const SimplicialMesh& mesh, const OperatorField& F,
                        const char* name) {
  if (!F.sample || F.rows() == 0) return;
  for (const Vector& x : sample_centroids(mesh, 7)) {
    const Matrix Fx = F(x);
    Eigen::FullPivLU<Matrix> lu(Fx);
    if (lu.rank() < Fx.rows())
      throw Error(ErrorCode::singular_input, std::string("coefficient ") + name +
                                                 " is singular at " + fmt_point(x));
  }
}

double spec_data_scale(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  double s = 0.0;
  const int V = mesh.num_vertices();
  const int stride = std::max(1, V / 200);
  for (int v = 0; v < V; v += stride) {
    const Vector x = mesh.vertices.row(v).transpose();
    for (const FormField* f : {&spec.f, &spec.F, &spec.g, &spec.omega0})
      if (f->valid() && f->dim() > 0) s = std::max(s, (*f)(x).cwiseAbs().maxCoeff());
    if (spec.p0.valid() && spec.p0.dim() > 0) s = std::max(s, std::abs(spec.p0(x)[0]));
  }
  return s;
}

// ---------------------------------------------------------------------------
// face quadrature

template <typename Fn>
void for_each_boundary_qp(const SimplicialMesh& mesh, int order, Fn&& fn) {
  const auto& rule = simplex_rule(mesh.n - 1, order);
  const double fact = factorial(mesh.n - 1);
  for (int f = 0; f < mesh.num_boundary_faces(); ++f) {
    const Matrix fv = mesh.face_vertices(f);
    const double scale = simplex_measure(fv) * fact;
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Vector x = (rule.bary.row(q) * fv).transpose();
      fn(f, rule.bary.row(q), x, rule.weights[q] * scale);
    }
  }
}

Vector face_nodal_value(const SimplicialMesh& mesh, const Vector& full, long comp, int f,
                        const Eigen::RowVectorXd& bary) {
  Vector v = Vector::Zero(comp);
  for (int l = 0; l < mesh.n; ++l)
    v += bary[l] * full.segment(mesh.boundary_faces(f, l) * comp, comp);
  return v;
}

// ---------------------------------------------------------------------------
// weak test spaces and dual norms

struct WeakTest {
  DofSpace sp;
  SpMat gram;  // reduced H1 Gram (stiffness plus mass)
};

GradientFormSampler gradient_gram_sampler(int n, long comp) {
  const long d = comp * n;
  return [d](const Vector&) { return Matrix::Identity(d, d); };
}

WeakTest make_weak_test(const SimplicialMesh& mesh, int deg, BcKind bc) {
  if (deg == 0 && bc == BcKind::tangential) bc = BcKind::dirichlet;
  WeakTest t;
  t.sp = build_space(mesh, deg, bc);
  if (t.sp.free_dofs == 0) return t;
  const SpMat K = assemble_gradient_form_full(
      t.sp, gradient_gram_sampler(mesh.n, t.sp.comp), Smoothness::constant);
  const SpMat M = assemble_mass_full(t.sp, OperatorField::identity(mesh.n, deg));
  t.gram = reduce(t.sp, K) + reduce(t.sp, M);
  return t;
}

double dual_norm(const WeakTest& t, const Vector& load_full) {
  if (t.sp.free_dofs == 0) return 0.0;
  const Vector L = t.sp.to_free(load_full);
  Eigen::SimplicialLDLT<SpMat> ldlt(t.gram);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorCode::numerical, "dual norm Gram factorization failed");
  const Vector y = ldlt.solve(L);
  return std::sqrt(std::max(0.0, L.dot(y)));
}

// ---------------------------------------------------------------------------
// extra load assemblers

/// Entries int <data, delta phi_i> over a deg-form space; data is a
/// (deg-1)-form field. delta of a nodal hat is constant per cell.
Vector assemble_coload_full(const DofSpace& sp, const FormField& data) {
  Vector out = Vector::Zero(sp.full_dofs);
  if (!data.valid()) return out;
  const auto& mesh = *sp.mesh;
  const int n = mesh.n;
  const long mk = sp.comp;
  const auto& rule = simplex_rule(n, 4);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    std::vector<Matrix> Ia;
    for (int a = 0; a <= n; ++a)
      Ia.push_back(interior_matrix(n, sp.k, geo.grads.row(a).transpose()));
    const double fact = factorial(n);
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
      const double wq = rule.weights[q] * fact * geo.volume;
      const Vector dq = data(xq);
      for (int a = 0; a <= n; ++a)
        out.segment(mesh.cells(c, a) * mk, mk) -= wq * (Ia[a].transpose() * dq);
    }
  }
  return out;
}

/// Entries int <c_cell, phi_i> for a cellwise-constant field given row per
/// cell; exact because int of a hat over its cell is vol / (n + 1).
Vector cellwise_load(const DofSpace& sp, const Matrix& values) {
  const auto& mesh = *sp.mesh;
  const int n = mesh.n;
  const long mk = sp.comp;
  Vector out = Vector::Zero(sp.full_dofs);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double w = mesh.cell_volume(c) / (n + 1);
    for (int a = 0; a <= n; ++a)
      out.segment(mesh.cells(c, a) * mk, mk) += w * values.row(c).transpose();
  }
  return out;
}

/// Entries int <F, d(W theta_i)> with the weight W frozen at each
/// quadrature point; the normal-condition substitution assembles its
/// (k+1)-form load this way with W = B^{-1}.
Vector load_dtheta_weighted(const DofSpace& sp, const FormField& F,
                            const OperatorField& Wt) {
  Vector out = Vector::Zero(sp.full_dofs);
  if (!F.valid()) return out;
  const auto& mesh = *sp.mesh;
  const int n = mesh.n;
  const long mk = sp.comp;
  const auto& rule = simplex_rule(n, 4);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    std::vector<Matrix> Wa;
    for (int a = 0; a <= n; ++a)
      Wa.push_back(wedge_matrix(n, sp.k, geo.grads.row(a).transpose()));
    const double fact = factorial(n);
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
      const double wq = rule.weights[q] * fact * geo.volume;
      const Vector Fq = F(xq);
      const Matrix Wq = Wt(xq);
      for (int a = 0; a <= n; ++a)
        out.segment(mesh.cells(c, a) * mk, mk) += wq * (Wq * (Wa[a].transpose() * Fq));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// bordered saddle solves

Vector bordered_solve(const SpMat& S, const Matrix& C, const Vector& b, const Vector& c0,
                      const char* what) {
  const long m = S.rows();
  const long d = C.cols();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(S.nonZeros() + 2 * m * d);
  for (int j = 0; j < S.outerSize(); ++j)
    for (SpMat::InnerIterator it(S, j); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < m; ++i)
      if (C(i, j) != 0.0) {
        trips.emplace_back(i, m + j, C(i, j));
        trips.emplace_back(m + j, i, C(i, j));
      }
  SpMat big(m + d, m + d);
  big.setFromTriplets(trips.begin(), trips.end());
  big.makeCompressed();
  Eigen::SparseLU<SpMat> lu(big);
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCode::numerical, std::string(what) + ": bordered system is singular");
  Vector rhs(m + d);
  rhs.head(m) = b;
  rhs.tail(d) = c0;
  const Vector sol = lu.solve(rhs);
  const Vector x = sol.head(m);
  const Vector mu = sol.tail(d);
  const double r = (S * x + C * mu - b).norm() / (1.0 + b.norm());
  const double rc = (C.transpose() * x - c0).norm() / (1.0 + x.norm());
  if (!(r <= 1e-9) || !(rc <= 1e-8))
    throw Error(ErrorCode::numerical,
                std::string(what) + ": bordered solve residual " + fmt_num(std::max(r, rc)));
  return x;
}

// ---------------------------------------------------------------------------
// compatibility machinery

struct CompatBuilder {
  CompatibilityReport rep;
  double tol_weak = 0.0;
  double tol_moment = 0.0;
  double tol_trace = 0.0;

  void add(const std::string& name, double magnitude, double tolerance) {
    CompatibilityCheck c{name, magnitude, tolerance, magnitude <= tolerance};
    rep.all_pass = rep.all_pass && c.pass;
    rep.checks.push_back(std::move(c));
  }
  void weak(const std::string& name, double magnitude) { add(name, magnitude, tol_weak); }
  void moment(const std::string& name, double magnitude) { add(name, magnitude, tol_moment); }
  void trace(const std::string& name, double magnitude) { add(name, magnitude, tol_trace); }
};

struct MomentCheck {
  double magnitude = 0.0;
  int dim = 0;
};

/// max_j |int <vol_data, chi_j> + boundary(chi_j)| over a computed harmonic
/// basis; `boundary` receives the nodal basis column and may be empty.
MomentCheck harmonic_moments(const SimplicialMesh& mesh, int deg, BcKind bc,
                             const FormField& vol_data,
                             const std::function<double(const DofSpace&, const Vector&)>&
                                 boundary = {}) {
  MomentCheck out;
  if (deg < 0 || deg > mesh.n) return out;
  // tangential 0-form harmonics vanish on the boundary, hence everywhere
  if (deg == 0 && bc == BcKind::tangential) return out;
  const HarmonicBasis basis = harmonic_basis(mesh, deg, bc);
  out.dim = basis.dimension;
  if (basis.dimension == 0) return out;
  const DofSpace sp = build_space(mesh, deg, BcKind::none);
  const Vector load = vol_data.valid() ? assemble_load_full(sp, vol_data, FormField())
                                       : Vector::Zero(sp.full_dofs);
  for (int j = 0; j < basis.dimension; ++j) {
    double m = -basis.full_vectors.col(j).dot(load);  // = int <vol_data, chi_h>
    if (boundary) m += boundary(sp, basis.full_vectors.col(j));
    out.magnitude = std::max(out.magnitude, std::abs(m));
  }
  return out;
}

FormField fd_d_field(const FormField& w, double h = 1e-3) {
  return FormField::make(w.n, w.degree + 1,
                         [w, h](const Vector& y) { return fd_d(w, y, h); });
}

/// delta(A d omega0) as a field, nested finite differences.
FormField delta_ad_field(const FormField& omega0, const OperatorField& A, double h = 1e-3) {
  const FormField dw = fd_d_field(omega0, h);
  return FormField::make(omega0.n, omega0.degree,
                         [dw, A, h](const Vector& y) { return fd_delta_op(dw, A, y, h); });
}

void compat_maxwell(const SimplicialMesh& mesh, const ProblemSpec& spec, CompatBuilder& b,
                    bool normal) {
  const int n = mesh.n;
  const int k = spec.k;
  const int s = calibrated_sign().s;
  const OperatorField A = identity_or(spec.A, n, k + 1, "A");
  const OperatorField B = identity_or(spec.B, n, k, "B");

  // (C) weakly: int <f, d psi> + lambda int <g, psi> = 0 for tangential psi.
  if (k >= 1 && (spec.f.valid() || (spec.g.valid() && spec.lambda != 0.0))) {
    const WeakTest t = make_weak_test(mesh, k - 1, BcKind::tangential);
    FormField fg;
    if (spec.g.valid() && spec.lambda != 0.0) {
      const FormField g = spec.g;
      const double lam = spec.lambda;
      fg = FormField::make(n, k - 1, [g, lam](const Vector& y) { return (-lam * g(y)).eval(); });
    }
    const Vector L = assemble_load_full(t.sp, fg, spec.f);
    b.weak("delta_f_plus_lambda_g", dual_norm(t, L));
  } else if (k >= 1) {
    b.weak("delta_f_plus_lambda_g", 0.0);
  }

  // delta g = 0 weakly when a (k-2) test space exists.
  if (k >= 2 && spec.g.valid()) {
    const WeakTest t = make_weak_test(mesh, k - 2, BcKind::tangential);
    const Vector L = assemble_load_full(t.sp, FormField(), spec.g);
    b.weak("delta_g", dual_norm(t, L));
  }

  const BcKind hb = normal ? BcKind::normal : BcKind::tangential;

  if (!normal) {
    // g orthogonal to tangential harmonic (k-1)-fields.
    if (spec.g.valid())
      b.moment("g_harmonic_moments",
             harmonic_moments(mesh, k - 1, hb, spec.g).magnitude);
    // lambda = 0: f orthogonal to tangential harmonic k-fields.
    if (spec.lambda == 0.0 && spec.f.valid())
      b.moment("f_harmonic_moments", harmonic_moments(mesh, k, hb, spec.f).magnitude);
    return;
  }

  // Normal-condition trace compatibilities. delta(B omega0) and
  // delta(A d omega0) are finite-difference closures of the data.
  const bool has_w0 = spec.omega0.valid();
  if (spec.g.valid() || has_w0) {
    const FormField g = spec.g;
    const FormField w0 = spec.omega0;
    const OperatorField Bc = B;
    const double mag = std::sqrt(std::max(
        0.0, [&] {
          double acc = 0.0;
          for_each_boundary_qp(mesh, 4, [&](int f, const Eigen::RowVectorXd&,
                                            const Vector& x, double w) {
            Vector r = g.valid() ? g(x) : Vector::Zero(binomial(mesh.n, k - 1));
            if (has_w0) r -= fd_delta_op(w0, Bc, x);
            const Vector nu = mesh.face_normals.row(f).transpose();
            acc += w * (interior_matrix(mesh.n, k - 1, nu) * r).squaredNorm();
          });
          return acc;
        }()));
    b.trace("trace_nu_int_g", mag);
  }
  if (spec.f.valid() || has_w0) {
    const FormField fF = spec.f;
    const FormField w0 = spec.omega0;
    const FormField dad = has_w0 ? delta_ad_field(spec.omega0, A) : FormField();
    const double lam = spec.lambda;
    const OperatorField Bc = B;
    double acc = 0.0;
    for_each_boundary_qp(mesh, 4,
                         [&](int f, const Eigen::RowVectorXd&, const Vector& x, double w) {
                           Vector r = fF.valid() ? fF(x) : Vector::Zero(binomial(mesh.n, k));
                           if (has_w0) r -= (s * dad(x) - lam * (Bc(x) * w0(x))).eval();
                           const Vector nu = mesh.face_normals.row(f).transpose();
                           acc += w * (interior_matrix(mesh.n, k, nu) * r).squaredNorm();
                         });
    b.trace("trace_nu_int_f", std::sqrt(std::max(0.0, acc)));
  }

  // g moments against normal harmonic (k-1)-fields, with the boundary term
  // carried by the trace data.
  if (spec.g.valid() || has_w0) {
    const FormField w0 = spec.omega0;
    const OperatorField Bc = B;
    std::function<double(const DofSpace&, const Vector&)> bdry;
    if (has_w0)
      bdry = [&mesh, w0, Bc, k](const DofSpace& sp, const Vector& chi) {
        double acc = 0.0;
        for_each_boundary_qp(mesh, 4,
                             [&](int f, const Eigen::RowVectorXd& bary, const Vector& x,
                                 double w) {
                               const Vector nu = mesh.face_normals.row(f).transpose();
                               const Vector tr = interior_matrix(mesh.n, k, nu) * (Bc(x) * w0(x));
                               acc -= w * tr.dot(face_nodal_value(mesh, chi, sp.comp, f, bary));
                             });
        return acc;
      };
    b.moment("g_harmonic_moments",
           harmonic_moments(mesh, k - 1, BcKind::normal, spec.g, bdry).magnitude);
  }

  if (spec.lambda == 0.0 && (spec.f.valid() || has_w0)) {
    // int <f, d psi> + s int_bdry <nu ^ d psi, A d omega0> = 0 over
    // unconstrained (k-1)-form tests.
    const WeakTest t = make_weak_test(mesh, k - 1, BcKind::none);
    Vector L = assemble_load_full(t.sp, FormField(), spec.f);
    if (has_w0) {
      const FormField w0 = spec.omega0;
      const OperatorField Ac = A;
      const long mk1 = t.sp.comp;
      for_each_boundary_qp(
          mesh, 4, [&](int f, const Eigen::RowVectorXd&, const Vector& x, double w) {
            const int c = mesh.face_cell[f];
            const CellFrame geo = cell_frame(mesh, c);
            const Vector nu = mesh.face_normals.row(f).transpose();
            const Vector sig = (Ac(x) * fd_d(w0, x)).eval();
            const Matrix Wn = wedge_matrix(mesh.n, k, nu);
            for (int a = 0; a <= mesh.n; ++a) {
              const Matrix Wa = wedge_matrix(mesh.n, k - 1, geo.grads.row(a).transpose());
              L.segment(mesh.cells(c, a) * mk1, mk1) +=
                  s * w * (Wa.transpose() * (Wn.transpose() * sig));
            }
          });
    }
    b.weak("f_weak_coclosed", dual_norm(t, L));

    // f moments against normal harmonic k-fields with the natural trace term.
    std::function<double(const DofSpace&, const Vector&)> bdry;
    if (has_w0) {
      const FormField w0 = spec.omega0;
      const OperatorField Ac = A;
      bdry = [&mesh, w0, Ac, k, s](const DofSpace& sp, const Vector& chi) {
        double acc = 0.0;
        for_each_boundary_qp(mesh, 4,
                             [&](int f, const Eigen::RowVectorXd& bary, const Vector& x,
                                 double w) {
                               const Vector nu = mesh.face_normals.row(f).transpose();
                               const Vector tr =
                                   interior_matrix(mesh.n, k + 1, nu) * (Ac(x) * fd_d(w0, x));
                               acc += s * w *
                                      tr.dot(face_nodal_value(mesh, chi, sp.comp, f, bary));
                             });
        return acc;
      };
    }
    b.moment("f_harmonic_moments",
           harmonic_moments(mesh, k, BcKind::normal, spec.f, bdry).magnitude);
  }
}

void compat_divcurl(const SimplicialMesh& mesh, const ProblemSpec& spec, CompatBuilder& b,
                    bool normal) {
  const int n = mesh.n;
  const int k = spec.k;

  // d f = 0 weakly against normal (k+2)-form tests.
  if (k + 2 <= n && spec.f.valid()) {
    const WeakTest t = make_weak_test(mesh, k + 2, BcKind::normal);
    b.weak("d_f", dual_norm(t, assemble_coload_full(t.sp, spec.f)));
  }
  // delta g = 0 weakly against tangential (k-2)-form tests.
  if (k >= 2 && spec.g.valid()) {
    const WeakTest t = make_weak_test(mesh, k - 2, BcKind::tangential);
    b.weak("delta_g", dual_norm(t, assemble_load_full(t.sp, FormField(), spec.g)));
  }

  const bool has_w0 = spec.omega0.valid();
  if (!normal) {
    // nu ^ d omega0 = nu ^ f on the boundary.
    if ((spec.f.valid() || has_w0) && k + 2 <= n + 1) {
      const FormField fF = spec.f;
      const FormField w0 = spec.omega0;
      double acc = 0.0;
      for_each_boundary_qp(mesh, 4,
                           [&](int f, const Eigen::RowVectorXd&, const Vector& x, double w) {
                             Vector r = fF.valid() ? fF(x) : Vector::Zero(binomial(n, k + 1));
                             if (has_w0) r -= fd_d(w0, x);
                             const Vector nu = mesh.face_normals.row(f).transpose();
                             acc += w * (wedge_matrix(n, k + 1, nu) * r).squaredNorm();
                           });
      b.trace("trace_nu_wedge_f", std::sqrt(std::max(0.0, acc)));
    }
    // f moments against tangential harmonic (k+1)-fields; the boundary term
    // pairs with the prescribed tangential trace.
    if (spec.f.valid() || has_w0) {
      std::function<double(const DofSpace&, const Vector&)> bdry;
      if (has_w0) {
        const FormField w0 = spec.omega0;
        bdry = [&mesh, w0, k](const DofSpace& sp, const Vector& chi) {
          double acc = 0.0;
          for_each_boundary_qp(
              mesh, 4,
              [&](int f, const Eigen::RowVectorXd& bary, const Vector& x, double w) {
                const Vector nu = mesh.face_normals.row(f).transpose();
                const Vector tr = wedge_matrix(mesh.n, k, nu) * w0(x);
                acc -= w * tr.dot(face_nodal_value(mesh, chi, sp.comp, f, bary));
              });
          return acc;
        };
      }
      b.moment("f_harmonic_moments",
             harmonic_moments(mesh, k + 1, BcKind::tangential, spec.f, bdry).magnitude);
    }
    // g moments against tangential harmonic (k-1)-fields (boundary term
    // vanishes against tangential harmonic fields).
    if (spec.g.valid())
      b.moment("g_harmonic_moments",
             harmonic_moments(mesh, k - 1, BcKind::tangential, spec.g).magnitude);
    return;
  }

  // Normal variant: nu _| delta omega0 = nu _| g.
  if ((spec.g.valid() || has_w0) && k >= 1) {
    const FormField g = spec.g;
    const FormField w0 = spec.omega0;
    double acc = 0.0;
    for_each_boundary_qp(mesh, 4,
                         [&](int f, const Eigen::RowVectorXd&, const Vector& x, double w) {
                           Vector r = g.valid() ? g(x) : Vector::Zero(binomial(n, k - 1));
                           if (has_w0) r -= fd_delta(w0, x);
                           const Vector nu = mesh.face_normals.row(f).transpose();
                           acc += w * (interior_matrix(n, k - 1, nu) * r).squaredNorm();
                         });
    b.trace("trace_nu_int_g", std::sqrt(std::max(0.0, acc)));
  }
  if (spec.f.valid())
    b.moment("f_harmonic_moments",
           harmonic_moments(mesh, k + 1, BcKind::normal, spec.f).magnitude);
  if (spec.g.valid() || has_w0) {
    std::function<double(const DofSpace&, const Vector&)> bdry;
    if (has_w0) {
      const FormField w0 = spec.omega0;
      bdry = [&mesh, w0, k](const DofSpace& sp, const Vector& chi) {
        double acc = 0.0;
        for_each_boundary_qp(
            mesh, 4, [&](int f, const Eigen::RowVectorXd& bary, const Vector& x, double w) {
              const Vector nu = mesh.face_normals.row(f).transpose();
              const Vector tr = interior_matrix(mesh.n, k, nu) * w0(x);
              acc += w * tr.dot(face_nodal_value(mesh, chi, sp.comp, f, bary));
            });
        return acc;
      };
    }
    b.moment("g_harmonic_moments",
           harmonic_moments(mesh, k - 1, BcKind::normal, spec.g, bdry).magnitude);
  }
}

void require_compatible(const CompatibilityReport& rep) {
  if (const CompatibilityCheck* c = rep.failed())
    throw Error(ErrorCode::data_incompatible,
                "compatibility check failed: " + c->name + " (magnitude " +
                    fmt_num(c->magnitude) + ", tolerance " + fmt_num(c->tolerance) + ")");
}

// ---------------------------------------------------------------------------
// div-curl least squares core

struct DivCurlOut {
  DofSpace space;
  Vector subst_full;   // eta (tangential) or zeta (normal)
  Vector omega_full;   // back-substituted solution
  int nullspace_dim = 0;
  double res_d = 0.0;
  double res_delta = 0.0;
  double eq_residual = 0.0;
  std::string notes;
};

Matrix fd_partial_op(const std::function<Matrix(const Vector&)>& C, const Vector& x, int p) {
  const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
  Vector e = Vector::Zero(x.size());
  e[p] = 1.0;
  return (C(x + h * e) - C(x - h * e)) / (2.0 * h);
}

DivCurlOut divcurl_core(const SimplicialMesh& mesh, int k, const OperatorField& A,
                        const OperatorField& B, const FormField& f, const FormField& g,
                        const FormField& omega0, bool tangential) {
  const int n = mesh.n;
  const long mk = binomial(n, k);
  const long mkp = binomial(n, k + 1);
  const long mkm = binomial(n, k - 1);

  DivCurlOut out;
  out.space = build_space(mesh, k, tangential ? BcKind::tangential : BcKind::normal);
  const DofSpace& sp = out.space;
  if (!sp.warning.empty()) out.notes = sp.warning;

  // Tangential: unknown eta = A omega with d eta = f, delta(B A^{-1} eta) = g.
  // Normal: unknown zeta = B omega with d(A B^{-1} zeta) = f, delta zeta = g.
  const bool coef_const =
      A.smoothness == Smoothness::constant && B.smoothness == Smoothness::constant;
  std::function<Matrix(const Vector&)> wcoef, icoef;
  if (tangential)
    icoef = [A, B](const Vector& x) { return (B(x) * A(x).inverse()).eval(); };
  else
    wcoef = [A, B](const Vector& x) { return (A(x) * B(x).inverse()).eval(); };

  std::vector<Matrix> Wp, Ip;
  for (int p = 0; p < n; ++p) {
    Vector e = Vector::Zero(n);
    e[p] = 1.0;
    Wp.push_back(wedge_matrix(n, k, e));
    Ip.push_back(interior_matrix(n, k, e));
  }

  const auto& rule2 = simplex_rule(n, 2);
  const int C = mesh.num_cells();
  struct CellBlocks {
    Matrix S;
    Vector rhs;
    Matrix Dloc, Gloc;
  };
  std::vector<CellBlocks> blocks(C);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < C; ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    const Vector& xc = geo.center;
    Matrix Wc, Ic;
    std::vector<Matrix> dW, dI;
    if (wcoef) {
      Wc = wcoef(xc);
      if (!coef_const)
        for (int p = 0; p < n; ++p) dW.push_back(fd_partial_op(wcoef, xc, p));
    }
    if (icoef) {
      Ic = icoef(xc);
      if (!coef_const)
        for (int p = 0; p < n; ++p) dI.push_back(fd_partial_op(icoef, xc, p));
    }
    Matrix Dloc = Matrix::Zero(mkp, (n + 1) * mk);
    Matrix Gloc = Matrix::Zero(mkm, (n + 1) * mk);
    for (int a = 0; a <= n; ++a) {
      const Matrix Wa = wedge_matrix(n, k, geo.grads.row(a).transpose());
      const Matrix Ia = interior_matrix(n, k, geo.grads.row(a).transpose());
      Matrix dblk = wcoef ? (Wa * Wc).eval() : Wa;
      Matrix gblk = icoef ? (-(Ia * Ic)).eval() : (-Ia).eval();
      if (!coef_const)
        for (int p = 0; p < n; ++p) {
          if (wcoef) dblk += (1.0 / (n + 1)) * (Wp[p] * dW[p]);
          if (icoef) gblk -= (1.0 / (n + 1)) * (Ip[p] * dI[p]);
        }
      Dloc.middleCols(a * mk, mk) = dblk;
      Gloc.middleCols(a * mk, mk) = gblk;
    }
    // order-2 cell averages of the data
    Vector fbar = Vector::Zero(mkp);
    Vector gbar = Vector::Zero(mkm);
    const double fact = factorial(n);
    for (Eigen::Index q = 0; q < rule2.weights.size(); ++q) {
      const Vector xq = (rule2.bary.row(q) * geo.verts).transpose();
      if (f.valid()) fbar += rule2.weights[q] * fact * f(xq);
      if (g.valid()) gbar += rule2.weights[q] * fact * g(xq);
    }
    CellBlocks& cb = blocks[c];
    cb.S = geo.volume * (Dloc.transpose() * Dloc + Gloc.transpose() * Gloc);
    cb.rhs = geo.volume * (Dloc.transpose() * fbar + Gloc.transpose() * gbar);
    cb.Dloc = std::move(Dloc);
    cb.Gloc = std::move(Gloc);
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(C) * (n + 1) * (n + 1) * mk * mk);
  Vector rhs_full = Vector::Zero(sp.full_dofs);
  for (int c = 0; c < C; ++c) {
    for (int a = 0; a <= n; ++a) {
      rhs_full.segment(mesh.cells(c, a) * mk, mk) += blocks[c].rhs.segment(a * mk, mk);
      for (int blk = 0; blk <= n; ++blk)
        for (long i = 0; i < mk; ++i)
          for (long j = 0; j < mk; ++j) {
            const double v = blocks[c].S(a * mk + i, blk * mk + j);
            if (v != 0.0)
              trips.emplace_back(mesh.cells(c, a) * mk + i, mesh.cells(c, blk) * mk + j, v);
          }
    }
  }
  SpMat S_full(sp.full_dofs, sp.full_dofs);
  S_full.setFromTriplets(trips.begin(), trips.end());
  S_full.makeCompressed();

  const Vector lift = omega0.valid() ? interpolate(sp, omega0) : Vector::Zero(sp.full_dofs);
  const SpMat S = reduce(sp, S_full);
  const Vector rhs = sp.to_free(rhs_full - S_full * lift);

  const HarmonicBasis basis =
      harmonic_basis(mesh, k, tangential ? BcKind::tangential : BcKind::normal);
  out.nullspace_dim = basis.dimension;
  if (!basis.warning.empty())
    out.notes += (out.notes.empty() ? "" : "; ") + basis.warning;

  Vector x;
  if (basis.dimension > 0) {
    const SpMat M_full = assemble_mass_full(sp, OperatorField::identity(n, k));
    const Matrix Cmat = sp.P.transpose() * (M_full * basis.full_vectors);
    const Vector c0 = -(basis.full_vectors.transpose() * (M_full * lift));
    x = bordered_solve(S, Cmat, rhs, c0, "div-curl");
  } else {
    Eigen::SimplicialLDLT<SpMat> ldlt(S);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::numerical,
                  "div-curl normal equations indefinite on the working subspace");
    const Vector D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    if (D.minCoeff() < -1e-10 * dmax)
      throw Error(ErrorCode::numerical,
                  "div-curl normal equations indefinite on the working subspace");
    x = ldlt.solve(rhs);
    const double r = (S * x - rhs).norm() / (1.0 + rhs.norm());
    if (!(r <= 1e-8))
      throw Error(ErrorCode::numerical, "div-curl solve residual " + fmt_num(r));
  }
  out.subst_full = sp.to_full(x) + lift;
  out.eq_residual = (S * x - rhs).norm() / (1.0 + rhs.norm());

  // back substitution at the vertices
  out.omega_full = out.subst_full;
  const OperatorField& back = tangential ? A : B;
  if (back.sample)
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Vector xv = mesh.vertices.row(v).transpose();
      out.omega_full.segment(v * mk, mk) =
          back(xv).partialPivLu().solve(out.subst_full.segment(v * mk, mk));
    }

  // first-order residuals by direct quadrature
  const auto& rule4 = simplex_rule(n, 4);
  double acc_d = 0.0, acc_g = 0.0;
  for (int c = 0; c < C; ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    Matrix nodal((n + 1), mk);
    for (int a = 0; a <= n; ++a)
      nodal.row(a) = out.subst_full.segment(mesh.cells(c, a) * mk, mk).transpose();
    // constant part of the elementwise derivative
    Matrix partials(n, mk);  // row p = d_p u on the cell
    partials = geo.grads.transpose() * nodal;
    const double fact = factorial(n);
    for (Eigen::Index q = 0; q < rule4.weights.size(); ++q) {
      const Vector xq = (rule4.bary.row(q) * geo.verts).transpose();
      const double wq = rule4.weights[q] * fact * geo.volume;
      Vector uq = Vector::Zero(mk);
      for (int a = 0; a <= n; ++a) uq += rule4.bary(q, a) * nodal.row(a).transpose();
      if (mkp > 0) {
        Vector dv = Vector::Zero(mkp);
        if (wcoef) {
          const Matrix Wq = wcoef(xq);
          for (int p = 0; p < n; ++p) {
            dv += Wp[p] * (Wq * partials.row(p).transpose());
            if (!coef_const) dv += Wp[p] * (fd_partial_op(wcoef, xq, p) * uq);
          }
        } else {
          for (int p = 0; p < n; ++p) dv += Wp[p] * partials.row(p).transpose();
        }
        if (f.valid()) dv -= f(xq);
        acc_d += wq * dv.squaredNorm();
      }
      if (mkm > 0) {
        Vector gv = Vector::Zero(mkm);
        if (icoef) {
          const Matrix Iq = icoef(xq);
          for (int p = 0; p < n; ++p) {
            gv -= Ip[p] * (Iq * partials.row(p).transpose());
            if (!coef_const) gv -= Ip[p] * (fd_partial_op(icoef, xq, p) * uq);
          }
        } else {
          for (int p = 0; p < n; ++p) gv -= Ip[p] * partials.row(p).transpose();
        }
        if (g.valid()) gv -= g(xq);
        acc_g += wq * gv.squaredNorm();
      }
    }
  }
  out.res_d = std::sqrt(std::max(0.0, acc_d));
  out.res_delta = std::sqrt(std::max(0.0, acc_g));
  return out;
}

// ---------------------------------------------------------------------------
// shared report plumbing

void common_report_fields(SolveReport& rep, const ProblemSpec& spec) {
  rep.kind = spec.kind;
  rep.n = spec.n;
  rep.k = spec.k;
  rep.lambda = spec.lambda;
  rep.sign = calibrated_sign().s;
}

void append_note(std::string& notes, const std::string& extra) {
  if (extra.empty()) return;
  if (!notes.empty()) notes += "; ";
  notes += extra;
}

double constraint_delta_residual(const DofSpace& sp, const Vector& full,
                                 const OperatorField& B, const FormField& g) {
  const CellDerivatives cd = cell_derivatives(sp, full, B);
  const auto& mesh = *sp.mesh;
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Vector r = cd.delta.row(c).transpose();
    if (g.valid()) r -= g(cell_frame(mesh, c).center);
    acc += mesh.cell_volume(c) * r.squaredNorm();
  }
  return std::sqrt(std::max(0.0, acc));
}

void validate_fields(const SimplicialMesh& mesh, const ProblemSpec& spec, int f_deg) {
  if (spec.n != mesh.n)
    throw Error(ErrorCode::invalid_argument, "problem dimension does not match the mesh");
  if (spec.k < 0 || spec.k > mesh.n)
    throw Error(ErrorCode::invalid_argument, "form degree out of range for the mesh");
  const auto check = [&](const FormField& fld, int deg, const char* name) {
    if (!fld.valid()) return;
    if (fld.n != mesh.n || fld.degree != deg)
      throw Error(ErrorCode::invalid_argument,
                  std::string("data field ") + name + " must be a " + std::to_string(deg) +
                      "-form on R^" + std::to_string(mesh.n));
  };
  check(spec.f, f_deg, "f");
  check(spec.F, spec.k + 1, "F");
  check(spec.g, spec.k - 1, "g");
  check(spec.omega0, spec.k, "omega0");
  check(spec.p0, 0, "p0");
}

// Maxwell constructive solve; `extra_load_full` is added to the assembled
// load (the Stokes driver feeds the cellwise d phi term through it).
SolveReport maxwell_core(const SimplicialMesh& mesh, const ProblemSpec& spec,
                         const Vector* extra_load_full, bool run_compat) {
  const int n = mesh.n;
  const int k = spec.k;
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "maxwell systems need k >= 1");
  validate_fields(mesh, spec, k);
  const bool normal = spec.kind == "maxwell_n";
  const OperatorField A = identity_or(spec.A, n, k + 1, "A");
  const OperatorField B = identity_or(spec.B, n, k, "B");
  require_elliptic(mesh, A, B, k, normal ? 2 : 1, 1);

  SolveReport rep;
  common_report_fields(rep, spec);
  if (run_compat) {
    rep.compatibility = check_compatibility(mesh, spec);
    require_compatible(rep.compatibility);
  }
  const int s = rep.sign;

  const DofSpace space = build_space(mesh, k, normal ? BcKind::normal : BcKind::tangential);
  append_note(rep.notes, space.warning);
  const long mk = space.comp;

  // Step 1: the divergence carrier G with d G = 0, delta(B G) = g - delta(B w0),
  // and vanishing essential trace, via the div-curl driver.
  const bool need_G = spec.g.valid() || spec.omega0.valid();
  Vector G_full = Vector::Zero(space.full_dofs);
  Vector BG_full = Vector::Zero(space.full_dofs);
  if (need_G) {
    ProblemSpec sub;
    sub.kind = normal ? "divcurl_n" : "divcurl_t";
    sub.n = n;
    sub.k = k;
    sub.B = B;
    if (spec.omega0.valid()) {
      const FormField g = spec.g;
      const FormField w0 = spec.omega0;
      const OperatorField Bc = B;
      const long mg = binomial(n, k - 1);
      sub.g = FormField::make(n, k - 1, [g, w0, Bc, mg](const Vector& y) {
        Vector v = g.valid() ? g(y) : Vector::Zero(mg);
        return (v - fd_delta_op(w0, Bc, y)).eval();
      });
    } else {
      sub.g = spec.g;
    }
    SolveReport grep = solve_divcurl(mesh, sub);
    G_full = grep.solution;
    rep.nullspace_dim = std::max(rep.nullspace_dim, grep.nullspace_dim);
    append_note(rep.notes, grep.notes);
    BG_full = G_full;
    if (B.sample)
      for (int v = 0; v < mesh.num_vertices(); ++v)
        BG_full.segment(v * mk, mk) =
            B(mesh.vertices.row(v).transpose()) * G_full.segment(v * mk, mk);
  }

  // Step 2: the Hodge solve for u with the modified load.
  FormField ftilde = spec.f;
  if (spec.omega0.valid()) {
    const FormField f = spec.f;
    const FormField w0 = spec.omega0;
    const FormField dad = delta_ad_field(spec.omega0, A);
    const OperatorField Bc = B;
    const double lam = spec.lambda;
    const long md = binomial(n, k);
    ftilde = FormField::make(n, k, [f, w0, dad, Bc, lam, s, md](const Vector& y) {
      Vector v = f.valid() ? f(y) : Vector::Zero(md);
      v += lam * (Bc(y) * w0(y));
      v -= s * dad(y);
      return v;
    });
  }

  AssembledProblem prob;
  if (!normal) {
    prob = assemble_problem(space, A, B, spec.lambda, ftilde, spec.F, FormField());
  } else {
    const OperatorField Binvt{
        n, k, k,
        [B](const Vector& x) { return B(x).inverse().transpose().eval(); },
        B.smoothness};
    const long d = mk * n;
    GradientFormSampler Gs = [A, B, n, k, d](const Vector& x) {
      return build_atilde_general(A(x), B(x).inverse(), Matrix::Identity(d / n, d / n), n, k);
    };
    const Smoothness sm =
        (A.smoothness == Smoothness::constant && B.smoothness == Smoothness::constant)
            ? Smoothness::constant
            : Smoothness::smooth;
    FormField fbeta;
    if (ftilde.valid()) {
      const FormField ft = ftilde;
      const OperatorField Bc = B;
      fbeta = FormField::make(n, k, [ft, Bc](const Vector& y) {
        return (Bc(y).transpose().partialPivLu().solve(ft(y))).eval();
      });
    }
    prob = assemble_problem_with_form(space, Gs, sm, Binvt, spec.lambda, fbeta, FormField(),
                                      FormField());
    if (spec.F.valid()) {
      const OperatorField BinvtF = Binvt;
      prob.rhs += space.to_free(load_dtheta_weighted(space, spec.F, BinvtF));
    }
  }
  if (need_G && spec.lambda != 0.0)
    prob.rhs -= spec.lambda * space.to_free(prob.M_full * (normal ? BG_full : G_full));
  if (extra_load_full) prob.rhs += space.to_free(*extra_load_full);

  Vector x;
  HarmonicBasis hb;
  if (spec.lambda == 0.0) {
    hb = harmonic_basis(mesh, k, normal ? BcKind::normal : BcKind::tangential);
    rep.nullspace_dim = std::max(rep.nullspace_dim, hb.dimension);
    append_note(rep.notes, hb.warning);
  }
  if (spec.lambda == 0.0 && hb.dimension > 0) {
    const Matrix Cmat = space.P.transpose() * (prob.M_full * hb.full_vectors);
    x = bordered_solve(prob.K, Cmat, prob.rhs, Vector::Zero(hb.dimension), "maxwell");
  } else {
    LinearSolveInfo info;
    x = solve_linear(prob, &info);
  }

  const Vector u_full = space.to_full(x);
  Vector sol = u_full + G_full;
  if (spec.omega0.valid()) sol += interpolate(space, spec.omega0);
  rep.solution = sol;

  // Step 4: projection cross-check for identity B, nonzero lambda, pure f data.
  if (spec.lambda != 0.0 && !need_G && identity_valued(B, mesh)) {
    AssembledProblem p2 = assemble_problem(space, A, B, spec.lambda, ftilde, spec.F,
                                           FormField());
    if (extra_load_full) p2.rhs += space.to_free(*extra_load_full);
    LinearSolveInfo info2;
    const Vector proj = space.to_full(solve_linear(p2, &info2));
    // The projection omega - (1/lambda) d delta omega drops nothing here:
    // delta omega_h is constant per cell, so its elementwise d vanishes.
    const Vector diff = proj - rep.solution;
    rep.projection_gap = std::sqrt(std::max(0.0, l2_inner(space, diff, diff)));
  }

  // residuals recomputed from the returned solution
  Vector x_re = space.to_free(rep.solution - G_full);
  if (spec.omega0.valid()) x_re -= space.to_free(interpolate(space, spec.omega0));
  const Vector resid = prob.K * x_re + spec.lambda * (prob.M * x_re) - prob.rhs;
  rep.equation_residual = resid.norm() / (1.0 + prob.rhs.norm());
  rep.constraint_residual = constraint_delta_residual(space, rep.solution, B, spec.g);
  rep.boundary = boundary_residuals(space, rep.solution, A, B, spec.omega0);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------

const CompatibilityCheck* CompatibilityReport::failed() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

ProblemSpec spec_from_case(const ManufacturedCase& c) {
  ProblemSpec spec;
  spec.kind = c.kind;
  spec.n = c.n;
  spec.k = c.k;
  spec.lambda = c.lambda;
  spec.A = c.A;
  spec.B = c.B;
  spec.f = c.f;
  spec.F = c.F;
  spec.g = c.g;
  spec.omega0 = c.omega0;
  spec.p0 = c.p0;
  return spec;
}

CompatibilityReport check_compatibility(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  CompatBuilder b;
  const double h = mesh.mesh_size();
  const double scale = spec_data_scale(mesh, spec);
  // Weak (dual-norm) checks cancel exactly against discrete test functions, so
  // compatible data leaves only quadrature error; a flat absolute tier keeps
  // genuine O(1) violations visible on coarse meshes.  Moment checks must absorb
  // the O(h^2) consistency error of discretely computed harmonic representatives
  // and discrete-trace boundary data.  Trace checks on curved boundaries see the
  // O(h) mismatch between chord normals and the true normal.
  b.tol_weak = 1e-4 * (1.0 + scale);
  b.tol_moment = 10.0 * h * h * (1.0 + scale);
  b.tol_trace = 1.5 * h * (1.0 + scale);

  const std::string& kind = spec.kind;
  if (kind == "maxwell_t" || kind == "maxwell_n") {
    compat_maxwell(mesh, spec, b, kind == "maxwell_n");
  } else if (kind == "divcurl_t" || kind == "divcurl_n") {
    compat_divcurl(mesh, spec, b, kind == "divcurl_n");
  } else if (kind == "dirichlet") {
    const int k = spec.k;
    if (k >= 1 && spec.f.valid()) {
      const WeakTest t = make_weak_test(mesh, k - 1, BcKind::tangential);
      b.weak("delta_f", dual_norm(t, assemble_load_full(t.sp, FormField(), spec.f)));
      b.moment("f_harmonic_moments",
             harmonic_moments(mesh, k, BcKind::tangential, spec.f).magnitude);
    }
  } else if (kind == "stokes_t") {
    if (spec.p0.valid()) {
      const FormField p0 = spec.p0;
      double acc = 0.0;
      for_each_boundary_qp(mesh, 4,
                           [&](int f, const Eigen::RowVectorXd&, const Vector& x, double w) {
                             const Matrix gr = fd_gradient(p0.eval, x, 1e-3);
                             const Vector dp = gr.transpose().col(0);
                             const Vector nu = mesh.face_normals.row(f).transpose();
                             acc += w * (wedge_matrix(mesh.n, 1, nu) * dp).squaredNorm();
                           });
      b.trace("nu_wedge_dp0", std::sqrt(std::max(0.0, acc)));
    }
  }
  // hodge and stokes_n impose no data compatibility conditions.
  return b.rep;
}

SolveReport solve_hodge(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  const int n = mesh.n;
  const int k = spec.k;
  const bool normal = spec.kind == "hodge_n";
  if (!normal && spec.kind != "hodge_t")
    throw Error(ErrorCode::invalid_argument, "solve_hodge handles hodge_t and hodge_n");
  validate_fields(mesh, spec, k);
  const OperatorField A = identity_or(spec.A, n, k + 1, "A");
  const OperatorField B = identity_or(spec.B, n, k, "B");
  require_elliptic(mesh, A, B, k, normal ? 2 : 1, 1);

  SolveReport rep;
  common_report_fields(rep, spec);
  rep.compatibility = check_compatibility(mesh, spec);

  if (!normal) {
    const DofSpace space = build_space(mesh, k, BcKind::tangential);
    append_note(rep.notes, space.warning);
    const AssembledProblem prob =
        assemble_problem(space, A, B, spec.lambda, spec.f, spec.F, spec.omega0);
    LinearSolveInfo info;
    const Vector x = solve_linear(prob, &info);
    rep.solution = space.to_full(x) + prob.lift;

    const Vector x_re = space.to_free(rep.solution - prob.lift);
    const Vector resid = prob.K * x_re + spec.lambda * (prob.M * x_re) - prob.rhs;
    rep.equation_residual = resid.norm() / (1.0 + prob.rhs.norm());
    rep.boundary = boundary_residuals(space, rep.solution, A, B, spec.omega0);
    return rep;
  }

  // Normal conditions: substitute beta = B omega, solve for beta on the
  // plain normal space, map back through B at the vertices.
  const DofSpace space = build_space(mesh, k, BcKind::normal);
  append_note(rep.notes, space.warning);
  const long mk = space.comp;

  const OperatorField Binvt{
      n, k, k, [B](const Vector& x) { return B(x).inverse().transpose().eval(); },
      B.smoothness};
  const long d = mk * n;
  GradientFormSampler Gs = [A, B, n, k, d](const Vector& x) {
    return build_atilde_general(A(x), B(x).inverse(), Matrix::Identity(d / n, d / n), n, k);
  };
  const Smoothness sm =
      (A.smoothness == Smoothness::constant && B.smoothness == Smoothness::constant)
          ? Smoothness::constant
          : Smoothness::smooth;

  FormField fbeta;
  if (spec.f.valid()) {
    const FormField f = spec.f;
    const OperatorField Bc = B;
    fbeta = FormField::make(n, k, [f, Bc](const Vector& y) {
      return (Bc(y).transpose().partialPivLu().solve(f(y))).eval();
    });
  }
  FormField beta0;
  if (spec.omega0.valid()) {
    const FormField w0 = spec.omega0;
    const OperatorField Bc = B;
    beta0 = FormField::make(n, k, [w0, Bc](const Vector& y) { return (Bc(y) * w0(y)).eval(); });
  }

  AssembledProblem prob = assemble_problem_with_form(space, Gs, sm, Binvt, spec.lambda,
                                                     fbeta, FormField(), beta0);
  if (spec.F.valid()) prob.rhs += space.to_free(load_dtheta_weighted(space, spec.F, Binvt));

  LinearSolveInfo info;
  const Vector x = solve_linear(prob, &info);
  const Vector beta_full = space.to_full(x) + prob.lift;

  rep.solution = beta_full;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    rep.solution.segment(v * mk, mk) = B(mesh.vertices.row(v).transpose())
                                           .partialPivLu()
                                           .solve(beta_full.segment(v * mk, mk));

  const Vector x_re = space.to_free(beta_full - prob.lift);
  const Vector resid = prob.K * x_re + spec.lambda * (prob.M * x_re) - prob.rhs;
  rep.equation_residual = resid.norm() / (1.0 + prob.rhs.norm());
  rep.boundary = boundary_residuals(space, rep.solution, A, B, spec.omega0);
  return rep;
}

SolveReport solve_maxwell(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  if (spec.kind != "maxwell_t" && spec.kind != "maxwell_n")
    throw Error(ErrorCode::invalid_argument, "solve_maxwell handles maxwell_t and maxwell_n");
  return maxwell_core(mesh, spec, nullptr, true);
}

SolveReport solve_stokes(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  const int n = mesh.n;
  const bool normal = spec.kind == "stokes_n";
  if (!normal && spec.kind != "stokes_t")
    throw Error(ErrorCode::invalid_argument, "solve_stokes handles stokes_t and stokes_n");
  if (spec.k != 1)
    throw Error(ErrorCode::invalid_argument, "unsupported degree: stokes drivers need k = 1");
  validate_fields(mesh, spec, 1);

  SolveReport rep;
  common_report_fields(rep, spec);
  rep.compatibility = check_compatibility(mesh, spec);
  require_compatible(rep.compatibility);
  if (normal && spec.p0.valid())
    append_note(rep.notes, "p0 ignored for the normal variant (mean-zero gauge)");

  // Step 1: the 0-form potential phi with int <d phi, d theta> = int <f, d theta>.
  const DofSpace sp0 =
      build_space(mesh, 0, normal ? BcKind::none : BcKind::dirichlet);
  const SpMat K0_full = assemble_gradient_form_full(sp0, gradient_gram_sampler(n, 1),
                                                    Smoothness::constant);
  const SpMat K0 = reduce(sp0, K0_full);
  const Vector rhs0_full = assemble_load_full(sp0, FormField(), spec.f);
  const Vector rhs0 = sp0.to_free(rhs0_full);
  Vector phi_red;
  if (normal) {
    Matrix pin = Matrix::Zero(sp0.free_dofs, 1);
    pin(0, 0) = 1.0;
    phi_red = bordered_solve(K0, pin, rhs0, Vector::Zero(1), "stokes potential");
  } else {
    const SpMat M0 = reduce(sp0, assemble_mass_full(sp0, OperatorField::identity(n, 0)));
    LinearSolveInfo info0;
    phi_red = solve_shifted(K0, M0, 0.0, rhs0, &info0);
  }
  const Vector phi_full = sp0.to_full(phi_red);
  const double phi_resid = (K0 * phi_red - rhs0).norm() / (1.0 + rhs0.norm());

  // By Galerkin orthogonality the remainder f - d phi_h is weakly co-closed
  // against the same test space; record the discrete magnitude.
  {
    CompatibilityCheck c{"ftilde_coclosed", phi_resid, 1e-8, phi_resid <= 1e-8};
    rep.compatibility.all_pass = rep.compatibility.all_pass && c.pass;
    rep.compatibility.checks.push_back(std::move(c));
  }

  // Step 2: Maxwell solve for the velocity with load f - d phi_h; the d phi
  // term enters as a cellwise-constant load correction.
  const int C = mesh.num_cells();
  Matrix dphi(C, n);
  for (int c = 0; c < C; ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    Vector g = Vector::Zero(n);
    for (int a = 0; a <= n; ++a) g += phi_full[mesh.cells(c, a)] * geo.grads.row(a).transpose();
    dphi.row(c) = g.transpose();
  }
  ProblemSpec msub = spec;
  msub.kind = normal ? "maxwell_n" : "maxwell_t";
  msub.g = FormField();
  msub.omega0 = FormField();
  msub.p0 = FormField();
  const DofSpace sp1 = build_space(mesh, 1, normal ? BcKind::normal : BcKind::tangential);
  const Vector extra = cellwise_load(sp1, dphi);
  SolveReport mrep = maxwell_core(mesh, msub, &extra, false);

  rep.solution = mrep.solution;
  rep.nullspace_dim = mrep.nullspace_dim;
  rep.equation_residual = mrep.equation_residual;
  rep.constraint_residual = mrep.constraint_residual;
  rep.boundary = mrep.boundary;
  rep.projection_gap = mrep.projection_gap;
  append_note(rep.notes, mrep.notes);
  for (auto& c : mrep.compatibility.checks) {
    rep.compatibility.all_pass = rep.compatibility.all_pass && c.pass;
    rep.compatibility.checks.push_back(std::move(c));
  }

  // Step 3: pressure reconstruction.
  if (!normal) {
    rep.pressure = -phi_full;
    if (spec.p0.valid()) rep.pressure += interpolate(sp0, spec.p0);
    // anchor: match p0 at the first boundary vertex (phi vanishes there, so
    // the correction is zero up to roundoff; keep the literal computation)
    int anchor = -1;
    for (int v = 0; v < mesh.num_vertices() && anchor < 0; ++v)
      if (mesh.is_boundary_vertex(v)) anchor = v;
    if (anchor >= 0 && spec.p0.valid()) {
      const double c =
          spec.p0(mesh.vertices.row(anchor).transpose())[0] - rep.pressure[anchor];
      rep.pressure.array() += c;
    }
  } else {
    const SpMat M0_full = assemble_mass_full(sp0, OperatorField::identity(n, 0));
    const double mean = (M0_full * phi_full).sum() / mesh.total_volume();
    rep.pressure = Vector::Constant(phi_full.size(), mean) - phi_full;
  }
  return rep;
}

SolveReport solve_dirichlet(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  const int n = mesh.n;
  const int k = spec.k;
  if (spec.kind != "dirichlet")
    throw Error(ErrorCode::invalid_argument, "solve_dirichlet handles kind dirichlet");
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "dirichlet driver needs k >= 1");
  validate_fields(mesh, spec, k);
  const OperatorField A = identity_or(spec.A, n, k + 1, "A");
  require_elliptic(mesh, A, OperatorField::identity(n, k), k, 2, 0, true);

  SolveReport rep;
  common_report_fields(rep, spec);
  rep.compatibility = check_compatibility(mesh, spec);
  require_compatible(rep.compatibility);
  const int s = rep.sign;

  // Step 1: tangential Maxwell solve for omega_bar with load f - s delta(A d w0).
  ProblemSpec msub;
  msub.kind = "maxwell_t";
  msub.n = n;
  msub.k = k;
  msub.lambda = 0.0;
  msub.A = A;
  if (spec.omega0.valid()) {
    const FormField f = spec.f;
    const FormField dad = delta_ad_field(spec.omega0, A);
    const long md = binomial(n, k);
    msub.f = FormField::make(n, k, [f, dad, s, md](const Vector& y) {
      Vector v = f.valid() ? f(y) : Vector::Zero(md);
      return (v - double(s) * dad(y)).eval();
    });
  } else {
    msub.f = spec.f;
  }
  const SolveReport mrep = maxwell_core(mesh, msub, nullptr, false);
  const Vector wbar = mrep.solution;
  rep.nullspace_dim = mrep.nullspace_dim;
  rep.equation_residual = mrep.equation_residual;
  append_note(rep.notes, mrep.notes);

  // Step 2: correction potential v minimizing the boundary trace defect of
  // omega_bar + dv, with a small gradient regularizer and pinned constants.
  const DofSpace spv = build_space(mesh, k - 1, BcKind::none);
  const long mv = spv.comp;
  const long mk = binomial(n, k);
  const double h = mesh.mesh_size();
  const double eps = 1e-6 * h * h;

  std::vector<Eigen::Triplet<double>> trips;
  Vector rhs = Vector::Zero(spv.full_dofs);
  const auto& frule = simplex_rule(n - 1, 4);
  const double ffact = factorial(n - 1);
  for (int bf = 0; bf < mesh.num_boundary_faces(); ++bf) {
    const int c = mesh.face_cell[bf];
    const CellFrame geo = cell_frame(mesh, c);
    Matrix Dloc(mk, (n + 1) * mv);
    for (int a = 0; a <= n; ++a)
      Dloc.middleCols(a * mv, mv) = wedge_matrix(n, k - 1, geo.grads.row(a).transpose());
    const Matrix fv = mesh.face_vertices(bf);
    const double area = simplex_measure(fv) * ffact;
    const Matrix Sloc = simplex_measure(fv) * (Dloc.transpose() * Dloc);
    Vector wint = Vector::Zero(mk);  // int_F omega_bar dS
    for (Eigen::Index q = 0; q < frule.weights.size(); ++q) {
      Vector wq = Vector::Zero(mk);
      for (int l = 0; l < n; ++l)
        wq += frule.bary(q, l) * wbar.segment(mesh.boundary_faces(bf, l) * mk, mk);
      wint += frule.weights[q] * area * wq;
    }
    const Vector rloc = -(Dloc.transpose() * wint);
    for (int a = 0; a <= n; ++a) {
      rhs.segment(mesh.cells(c, a) * mv, mv) += rloc.segment(a * mv, mv);
      for (int bb = 0; bb <= n; ++bb)
        for (long i = 0; i < mv; ++i)
          for (long j = 0; j < mv; ++j) {
            const double val = Sloc(a * mv + i, bb * mv + j);
            if (val != 0.0)
              trips.emplace_back(mesh.cells(c, a) * mv + i, mesh.cells(c, bb) * mv + j, val);
          }
    }
  }
  SpMat Sface(spv.full_dofs, spv.full_dofs);
  Sface.setFromTriplets(trips.begin(), trips.end());
  const SpMat Kreg =
      assemble_gradient_form_full(spv, gradient_gram_sampler(n, mv), Smoothness::constant);
  SpMat Sv = Sface + eps * Kreg;
  Sv.makeCompressed();
  Matrix pins = Matrix::Zero(spv.full_dofs, mv);
  for (long j = 0; j < mv; ++j) pins(j, j) = 1.0;  // all components at vertex 0
  const Vector v_full = bordered_solve(Sv, pins, rhs, Vector::Zero(mv), "dirichlet correction");

  rep.cell_correction = Matrix::Zero(mesh.num_cells(), mk);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame geo = cell_frame(mesh, c);
    Vector dv = Vector::Zero(mk);
    for (int a = 0; a <= n; ++a)
      dv += wedge_matrix(n, k - 1, geo.grads.row(a).transpose()) *
            v_full.segment(mesh.cells(c, a) * mv, mv);
    rep.cell_correction.row(c) = dv.transpose();
  }

  const DofSpace spk = build_space(mesh, k, BcKind::tangential);
  rep.solution = wbar;
  if (spec.omega0.valid()) rep.solution += interpolate(spk, spec.omega0);

  // Dirichlet trace residual of the combined field against omega0.
  {
    const FormField w0 = spec.omega0;
    double acc = 0.0;
    for_each_boundary_qp(mesh, 4,
                         [&](int f, const Eigen::RowVectorXd& bary, const Vector& x, double w) {
                           Vector val = face_nodal_value(mesh, rep.solution, mk, f, bary);
                           val += rep.cell_correction.row(mesh.face_cell[f]).transpose();
                           if (w0.valid()) val -= w0(x);
                           acc += w * val.squaredNorm();
                         });
    rep.trace_residual = std::sqrt(std::max(0.0, acc));
  }
  rep.boundary = boundary_residuals(spk, rep.solution, A, OperatorField::identity(n, k),
                                    spec.omega0);
  return rep;
}

SolveReport solve_divcurl(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  const int n = mesh.n;
  const int k = spec.k;
  const bool normal = spec.kind == "divcurl_n";
  if (!normal && spec.kind != "divcurl_t")
    throw Error(ErrorCode::invalid_argument, "solve_divcurl handles divcurl_t and divcurl_n");
  validate_fields(mesh, spec, k + 1);
  const OperatorField A = identity_or(spec.A, n, k, "A");
  const OperatorField B = identity_or(spec.B, n, k, "B");
  require_invertible(mesh, A, "A");
  require_invertible(mesh, B, "B");

  SolveReport rep;
  common_report_fields(rep, spec);
  rep.compatibility = check_compatibility(mesh, spec);
  require_compatible(rep.compatibility);

  DivCurlOut out = divcurl_core(mesh, k, A, B, spec.f, spec.g, spec.omega0, !normal);
  rep.solution = out.omega_full;
  rep.nullspace_dim = out.nullspace_dim;
  rep.res_d = out.res_d;
  rep.res_delta = out.res_delta;
  rep.equation_residual = out.eq_residual;
  append_note(rep.notes, out.notes);
  rep.boundary = boundary_residuals(out.space, out.subst_full,
                                    OperatorField::identity(n, k + 1),
                                    OperatorField::identity(n, k), spec.omega0);
  return rep;
}

SolveReport solve_problem(const SimplicialMesh& mesh, const ProblemSpec& spec) {
  const std::string& kind = spec.kind;
  if (kind == "hodge_t" || kind == "hodge_n") return solve_hodge(mesh, spec);
  if (kind == "maxwell_t" || kind == "maxwell_n") return solve_maxwell(mesh, spec);
  if (kind == "stokes_t" || kind == "stokes_n") return solve_stokes(mesh, spec);
  if (kind == "dirichlet") return solve_dirichlet(mesh, spec);
  if (kind == "divcurl_t" || kind == "divcurl_n") return solve_divcurl(mesh, spec);
  throw Error(ErrorCode::invalid_argument,
              "unknown problem kind '" + kind +
                  "' (expected hodge_t, hodge_n, maxwell_t, maxwell_n, stokes_t, stokes_n, "
                  "dirichlet, divcurl_t or divcurl_n)");
}

GaffneyReport gaffney_constant(const SimplicialMesh& mesh, int k, const OperatorField& B,
                               BcKind bc) {
  const int n = mesh.n;
  if (k < 0 || k > n)
    throw Error(ErrorCode::invalid_argument, "gaffney_constant: degree out of range");
  if (bc != BcKind::tangential && bc != BcKind::normal)
    throw Error(ErrorCode::invalid_argument,
                "gaffney_constant: boundary condition must be tangential or normal");
  const OperatorField Bf = identity_or(B, n, k, "B");
  require_elliptic(mesh, OperatorField::identity(n, k + 1), Bf, k, 0, 1);

  const DofSpace space = build_space(mesh, k, bc);
  if (space.free_dofs == 0)
    throw Error(ErrorCode::invalid_argument, "gaffney_constant: empty constrained space");
  const long mk = space.comp;
  const long mkp = binomial(n, k + 1);

  // Numerator: ||du||^2 + ||delta(Bu)||^2 tangential, ||d(Bu)||^2 + ||delta u||^2
  // normal. Denominator: the full gradient form.
  GradientFormSampler Qs;
  if (bc == BcKind::tangential)
    Qs = [Bf, n, k, mkp](const Vector& x) {
      return build_atilde_general(Matrix::Identity(mkp, mkp), Matrix::Identity(Bf.rows(), Bf.rows()),
                                  Bf(x), n, k);
    };
  else
    Qs = [Bf, n, k, mkp](const Vector& x) {
      return build_atilde_general(Matrix::Identity(mkp, mkp), Bf(x),
                                  Matrix::Identity(Bf.rows(), Bf.rows()), n, k);
    };
  const Smoothness sm = Bf.smoothness;
  const SpMat Q = reduce(space, assemble_gradient_form_full(space, Qs, sm));
  const SpMat N = reduce(space, assemble_gradient_form_full(
                                    space, gradient_gram_sampler(n, mk), Smoothness::constant));

  GaffneyReport out;
  const HarmonicBasis basis = harmonic_basis(mesh, k, bc);
  append_note(out.notes, basis.warning);
  std::vector<Vector> excl;
  for (int j = 0; j < basis.dimension; ++j) excl.push_back(basis.vectors.col(j));
  for (long e = 0; e < mk; ++e) {
    Vector c_full = Vector::Zero(space.full_dofs);
    for (int v = 0; v < mesh.num_vertices(); ++v) c_full[v * mk + e] = 1.0;
    const Vector c_red = space.to_free(c_full);
    if ((space.to_full(c_red) - c_full).norm() <= 1e-10 * c_full.norm())
      excl.push_back(c_red);
  }
  Matrix exclusion(space.free_dofs, static_cast<long>(excl.size()));
  for (size_t j = 0; j < excl.size(); ++j) exclusion.col(static_cast<long>(j)) = excl[j];
  out.excluded_dim = static_cast<int>(excl.size());

  const RayleighMin rm = rayleigh_min(Q, N, exclusion);
  if (!(rm.value > 0.0))
    throw Error(ErrorCode::numerical,
                "gaffney_constant: nonpositive Rayleigh minimum " + fmt_num(rm.value));
  out.rayleigh = rm.value;
  out.constant = 1.0 / rm.value;
  out.minimizer = space.to_full(rm.minimizer);
  return out;
}

Vector dirichlet_interior_residual(const SimplicialMesh& mesh, const ProblemSpec& spec,
                                   const Vector& nodal_full, const Matrix& cell_correction) {
  const int n = mesh.n;
  const int k = spec.k;
  const OperatorField A = identity_or(spec.A, n, k + 1, "A");
  const DofSpace sp = build_space(mesh, k, BcKind::none);
  const long mk = sp.comp;
  if (nodal_full.size() != sp.full_dofs)
    throw Error(ErrorCode::invalid_argument, "dirichlet_interior_residual: size mismatch");
  (void)cell_correction;  // d of a cellwise-constant field vanishes elementwise

  const long d = mk * n;
  GradientFormSampler As = [A, n, k, d](const Vector& x) {
    return build_atilde_general(A(x), Matrix::Identity(d / n, d / n),
                                Matrix::Zero(d / n, d / n), n, k);
  };
  const SpMat SA = assemble_gradient_form_full(
      sp, As, A.smoothness == Smoothness::constant ? Smoothness::constant : Smoothness::smooth);
  const Vector load = assemble_load_full(sp, spec.f, FormField());
  Vector R = SA * nodal_full - load;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v)) R.segment(v * mk, mk).setZero();
  return R;
}

ConvergenceTable convergence_study(const ManufacturedCase& problem,
                                   const std::vector<int>& levels_in) {
  const std::vector<int>& levels = levels_in.empty() ? problem.levels : levels_in;
  if (levels.empty())
    throw Error(ErrorCode::invalid_argument, "convergence_study: no refinement levels");
  if (!problem.mesh)
    throw Error(ErrorCode::invalid_argument, "convergence_study: case has no mesh family");

  const std::string& kind = problem.kind;
  const bool has_exact = problem.exact.valid();
  std::vector<std::string> cols;
  if (kind == "dirichlet") {
    cols = {"res_interior", "res_trace"};
  } else if (kind == "divcurl_t" || kind == "divcurl_n") {
    if (has_exact) cols.push_back("err_L2");
    cols.push_back("res_d");
    cols.push_back("res_delta");
  } else if (kind == "stokes_t" || kind == "stokes_n") {
    cols = {"err_L2", "err_H1"};
    if (problem.pressure) cols.push_back("err_p");
    cols.push_back("res_delta");
  } else {
    if (has_exact) {
      cols.push_back("err_L2");
      cols.push_back("err_H1");
    }
    if (kind == "maxwell_t" || kind == "maxwell_n") cols.push_back("res_delta");
  }
  if (cols.empty())
    throw Error(ErrorCode::invalid_argument,
                "convergence_study: nothing to tabulate for this case");

  std::vector<double> hs;
  std::vector<int> dofs;
  Matrix errors(static_cast<long>(levels.size()), static_cast<long>(cols.size()));
  const ProblemSpec spec = spec_from_case(problem);

  for (size_t li = 0; li < levels.size(); ++li) {
    const SimplicialMesh mesh = problem.mesh(levels[li]);
    SolveReport rep;
    try {
      rep = solve_problem(mesh, spec);
    } catch (const Error& e) {
      throw Error(e.code(), "level " + std::to_string(levels[li]) + ": " + e.what());
    }
    const DofSpace space = build_space(mesh, spec.k, problem.bc);
    hs.push_back(mesh.mesh_size());
    dofs.push_back(static_cast<int>(space.free_dofs));

    ErrorNorms en;
    if (has_exact) {
      const std::function<Matrix(const Vector&)>* eg =
          problem.exact_grad ? &problem.exact_grad : nullptr;
      en = error_norms(space, rep.solution, problem.exact, eg);
    }
    for (size_t j = 0; j < cols.size(); ++j) {
      const std::string& c = cols[j];
      double v = 0.0;
      if (c == "err_L2") {
        v = en.l2;
      } else if (c == "err_H1") {
        v = en.h1_semi;
      } else if (c == "err_p") {
        // pressure error modulo constants, order-4 quadrature
        const auto& rule = simplex_rule(mesh.n, 4);
        const double fact = factorial(mesh.n);
        double s1 = 0.0, s2 = 0.0;
        for (int cc = 0; cc < mesh.num_cells(); ++cc) {
          const CellFrame geo = cell_frame(mesh, cc);
          for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
            const double wq = rule.weights[q] * fact * geo.volume;
            double ph = 0.0;
            for (int a = 0; a <= mesh.n; ++a)
              ph += rule.bary(q, a) * rep.pressure[mesh.cells(cc, a)];
            const double dd = ph - problem.pressure(xq);
            s1 += wq * dd;
            s2 += wq * dd * dd;
          }
        }
        v = std::sqrt(std::max(0.0, s2 - s1 * s1 / mesh.total_volume()));
      } else if (c == "res_d") {
        v = rep.res_d;
      } else if (c == "res_delta") {
        v = (kind == "divcurl_t" || kind == "divcurl_n") ? rep.res_delta
                                                         : rep.constraint_residual;
      } else if (c == "res_interior") {
        const Vector R =
            dirichlet_interior_residual(mesh, spec, rep.solution, rep.cell_correction);
        const WeakTest t = make_weak_test(mesh, spec.k, BcKind::dirichlet);
        v = dual_norm(t, R);
      } else if (c == "res_trace") {
        v = rep.trace_residual;
      }
      errors(static_cast<long>(li), static_cast<long>(j)) = v;
    }
  }
  return make_convergence_table(std::move(hs), std::move(dofs), cols, std::move(errors));
}

}  // namespace hodge
