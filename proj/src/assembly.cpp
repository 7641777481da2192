#include "hodgeforms/assembly.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Dense>

namespace hodge {

namespace {

struct CellGeometry {
  Matrix verts;  // (n+1) x n
  Matrix grads;  // (n+1) x n, row a is the gradient of the a-th hat function
  double volume = 0.0;
};

CellGeometry cell_geometry(const SimplicialMesh& mesh, int c) {
  CellGeometry g;
  g.verts = mesh.cell_vertices(c);
  const int n = mesh.n;
  Matrix E(n, n);
  for (int i = 0; i < n; ++i) E.col(i) = (g.verts.row(i + 1) - g.verts.row(0)).transpose();
  const Matrix Einv = E.inverse();
  g.grads.resize(n + 1, n);
  for (int i = 1; i <= n; ++i) g.grads.row(i) = Einv.row(i - 1);
  g.grads.row(0) = -g.grads.middleRows(1, n).colwise().sum();
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  g.volume = E.determinant() / fact;
  return g;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Matrix fd_partial_mat(const OperatorField& B, const Vector& x, int p, double h) {
  Vector e = Vector::Zero(x.size());
  e[p] = 1.0;
  return (-B(x + 2 * h * e) + 8.0 * B(x + h * e) - 8.0 * B(x - h * e) + B(x - 2 * h * e)) /
         (12.0 * h);
}

Matrix element_gradient_form(const DofSpace& sp, const CellGeometry& geo,
                             const GradientFormSampler& G, const QuadratureRule& rule) {
  const int n = sp.n();
  const long mk = sp.comp;
  Matrix out = Matrix::Zero((n + 1) * mk, (n + 1) * mk);
  const double fact = factorial(n);
  for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
    const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
    const double wq = rule.weights[q] * fact * geo.volume;
    const Matrix Gq = G(xq);
    if (Gq.rows() != mk * n || Gq.cols() != mk * n)
      throw Error(ErrorCode::invalid_argument,
                  "assemble_gradient_form: sampler returned wrong size");
    for (int a = 0; a <= n; ++a) {
      Matrix Ta = Matrix::Zero(mk, mk * n);
      for (int r = 0; r < n; ++r)
        if (geo.grads(a, r) != 0.0) Ta += geo.grads(a, r) * Gq.middleRows(r * mk, mk);
      for (int b = 0; b <= n; ++b) {
        Matrix S = Matrix::Zero(mk, mk);
        for (int p = 0; p < n; ++p)
          if (geo.grads(b, p) != 0.0) S += geo.grads(b, p) * Ta.middleCols(p * mk, mk);
        out.block(a * mk, b * mk, mk, mk) += wq * S;
      }
    }
  }
  return out;
}

Matrix element_mass(const DofSpace& sp, const CellGeometry& geo, const OperatorField& B,
                    const QuadratureRule& rule) {
  const int n = sp.n();
  const long mk = sp.comp;
  Matrix out = Matrix::Zero((n + 1) * mk, (n + 1) * mk);
  const double fact = factorial(n);
  for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
    const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
    const double wq = rule.weights[q] * fact * geo.volume;
    const Matrix Bq = B(xq);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b)
        out.block(a * mk, b * mk, mk, mk) += wq * rule.bary(q, a) * rule.bary(q, b) * Bq;
  }
  return out;
}

Vector element_load(const DofSpace& sp, const CellGeometry& geo, const FormField& f,
                    const FormField& F, const QuadratureRule& rule) {
  const int n = sp.n();
  const long mk = sp.comp;
  Vector out = Vector::Zero((n + 1) * mk);
  const double fact = factorial(n);
  std::vector<Matrix> Wa;
  if (F.valid()) {
    Wa.reserve(n + 1);
    for (int a = 0; a <= n; ++a)
      Wa.push_back(wedge_matrix(n, sp.k, geo.grads.row(a).transpose()));
  }
  for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
    const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
    const double wq = rule.weights[q] * fact * geo.volume;
    Vector fq, Fq;
    if (f.valid()) fq = f(xq);
    if (F.valid()) Fq = F(xq);
    for (int a = 0; a <= n; ++a) {
      auto seg = out.segment(a * mk, mk);
      if (f.valid()) seg -= wq * rule.bary(q, a) * fq;
      if (F.valid()) seg += wq * (Wa[a].transpose() * Fq);
    }
  }
  return out;
}

// Two-pass assembly: element blocks in parallel, then a serial scatter in
// cell order. The scatter order fixes the floating-point sums, so thread
// count cannot change the result.
template <typename ElementFn>
SpMat assemble_matrix(const DofSpace& space, AssemblyMode mode, ElementFn&& element) {
  const auto& mesh = *space.mesh;
  const int C = mesh.num_cells();
  const int n = mesh.n;
  const long mk = space.comp;
  std::vector<Matrix> blocks(C);
  if (mode == AssemblyMode::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < C; ++c) blocks[c] = element(c);
  } else {
    for (int c = 0; c < C; ++c) blocks[c] = element(c);
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(C) * (n + 1) * (n + 1) * mk * mk);
  for (int c = 0; c < C; ++c)
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b)
        for (long i = 0; i < mk; ++i)
          for (long j = 0; j < mk; ++j) {
            const double v = blocks[c](a * mk + i, b * mk + j);
            if (v != 0.0)
              trips.emplace_back(mesh.cells(c, a) * mk + i, mesh.cells(c, b) * mk + j, v);
          }
  SpMat out(space.full_dofs, space.full_dofs);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace

SpMat assemble_gradient_form_full(const DofSpace& space, const GradientFormSampler& G,
                                  Smoothness smoothness, AssemblyMode mode) {
  const auto& rule =
      simplex_rule(space.n(), smoothness == Smoothness::constant ? 1 : 2);
  const auto& mesh = *space.mesh;
  return assemble_matrix(space, mode, [&](int c) {
    return element_gradient_form(space, cell_geometry(mesh, c), G, rule);
  });
}

SpMat assemble_stiffness_full(const DofSpace& space, const OperatorField& A,
                              const OperatorField& B, AssemblyMode mode) {
  const int n = space.n(), k = space.k;
  if (A.degree_source != k + 1 || A.degree_target != k + 1)
    throw Error(ErrorCode::invalid_argument, "assemble_stiffness: A must act on degree k+1");
  if (B.degree_source != k || B.degree_target != k)
    throw Error(ErrorCode::invalid_argument, "assemble_stiffness: B must act on degree k");
  const Smoothness sm = (A.smoothness == Smoothness::constant &&
                         B.smoothness == Smoothness::constant)
                            ? Smoothness::constant
                            : Smoothness::smooth;
  GradientFormSampler G = [&A, &B, n, k](const Vector& x) {
    return build_atilde(A(x), B(x), n, k);
  };
  return assemble_gradient_form_full(space, G, sm, mode);
}

SpMat assemble_mass_full(const DofSpace& space, const OperatorField& B, AssemblyMode mode) {
  if (B.degree_source != space.k || B.degree_target != space.k)
    throw Error(ErrorCode::invalid_argument, "assemble_mass: B must act on degree k");
  const auto& rule =
      simplex_rule(space.n(), B.smoothness == Smoothness::constant ? 2 : 4);
  const auto& mesh = *space.mesh;
  return assemble_matrix(space, mode, [&](int c) {
    return element_mass(space, cell_geometry(mesh, c), B, rule);
  });
}

Vector assemble_load_full(const DofSpace& space, const FormField& f, const FormField& F,
                          AssemblyMode mode) {
  Vector out = Vector::Zero(space.full_dofs);
  if (!f.valid() && !F.valid()) return out;
  if (f.valid() && (f.n != space.n() || f.degree != space.k))
    throw Error(ErrorCode::invalid_argument, "assemble_load: f must be a k-form field");
  if (F.valid() && (F.n != space.n() || F.degree != space.k + 1))
    throw Error(ErrorCode::invalid_argument, "assemble_load: F must be a (k+1)-form field");
  const auto& rule = simplex_rule(space.n(), 4);
  const auto& mesh = *space.mesh;
  const int C = mesh.num_cells();
  const int n = mesh.n;
  const long mk = space.comp;
  std::vector<Vector> blocks(C);
  if (mode == AssemblyMode::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < C; ++c)
      blocks[c] = element_load(space, cell_geometry(mesh, c), f, F, rule);
  } else {
    for (int c = 0; c < C; ++c)
      blocks[c] = element_load(space, cell_geometry(mesh, c), f, F, rule);
  }
  for (int c = 0; c < C; ++c)
    for (int a = 0; a <= n; ++a)
      out.segment(mesh.cells(c, a) * mk, mk) += blocks[c].segment(a * mk, mk);
  return out;
}

SpMat reduce(const DofSpace& space, const SpMat& full) {
  SpMat red = space.P.transpose() * full * space.P;
  red.makeCompressed();
  return red;
}

AssembledProblem assemble_problem_with_form(const DofSpace& space,
                                            const GradientFormSampler& G,
                                            Smoothness smoothness, const OperatorField& B,
                                            double lambda, const FormField& f,
                                            const FormField& F, const FormField& omega0,
                                            AssemblyMode mode) {
  AssembledProblem prob;
  prob.lambda = lambda;
  prob.K_full = assemble_gradient_form_full(space, G, smoothness, mode);
  prob.M_full = assemble_mass_full(space, B, mode);
  prob.K = reduce(space, prob.K_full);
  prob.M = reduce(space, prob.M_full);
  const Vector load = assemble_load_full(space, f, F, mode);
  if (omega0.valid()) {
    prob.lift = interpolate(space, omega0);
    prob.rhs = space.to_free(load - prob.K_full * prob.lift -
                             lambda * (prob.M_full * prob.lift));
  } else {
    prob.lift = Vector::Zero(space.full_dofs);
    prob.rhs = space.to_free(load);
  }
  return prob;
}

AssembledProblem assemble_problem(const DofSpace& space, const OperatorField& A,
                                  const OperatorField& B, double lambda, const FormField& f,
                                  const FormField& F, const FormField& omega0,
                                  AssemblyMode mode) {
  const int n = space.n(), k = space.k;
  if (A.degree_source != k + 1 || A.degree_target != k + 1)
    throw Error(ErrorCode::invalid_argument, "assemble_problem: A must act on degree k+1");
  const Smoothness sm = (A.smoothness == Smoothness::constant &&
                         B.smoothness == Smoothness::constant)
                            ? Smoothness::constant
                            : Smoothness::smooth;
  GradientFormSampler G = [&A, &B, n, k](const Vector& x) {
    return build_atilde(A(x), B(x), n, k);
  };
  return assemble_problem_with_form(space, G, sm, B, lambda, f, F, omega0, mode);
}

CellDerivatives cell_derivatives(const DofSpace& space, const Vector& full,
                                 const OperatorField& B) {
  const auto& mesh = *space.mesh;
  const int n = mesh.n, k = space.k;
  const long mk = space.comp;
  const long mk1 = binomial(n, k + 1), mkm = binomial(n, k - 1);
  CellDerivatives out;
  out.d = Matrix::Zero(mesh.num_cells(), mk1);
  out.delta = Matrix::Zero(mesh.num_cells(), mkm);
  std::vector<Matrix> Ip;
  Ip.reserve(n);
  for (int p = 0; p < n; ++p) Ip.push_back(interior_matrix(n, k, Vector::Unit(n, p)));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    Vector centroid = Vector::Zero(n);
    for (int a = 0; a <= n; ++a) centroid += geo.verts.row(a).transpose();
    centroid /= n + 1;
    const Matrix Bc = B(centroid);
    Vector uc = Vector::Zero(mk);
    Matrix du = Matrix::Zero(mk, n);  // column p = partial_p of the field
    for (int a = 0; a <= n; ++a) {
      const Vector ua = full.segment(mesh.cells(c, a) * mk, mk);
      uc += ua / (n + 1);
      for (int p = 0; p < n; ++p) du.col(p) += geo.grads(a, p) * ua;
    }
    Vector d = Vector::Zero(mk1), delta = Vector::Zero(mkm);
    for (int p = 0; p < n; ++p) {
      d += wedge_matrix(n, k, Vector::Unit(n, p)) * du.col(p);
      Vector dpbu = Bc * du.col(p);
      if (B.smoothness == Smoothness::smooth)
        dpbu += fd_partial_mat(B, centroid, p, 1e-6 * std::max(1.0, centroid.norm())) * uc;
      delta -= Ip[p] * dpbu;
    }
    out.d.row(c) = d.transpose();
    out.delta.row(c) = delta.transpose();
  }
  return out;
}

ErrorNorms error_norms(const DofSpace& space, const Vector& full, const FormField& exact,
                       const std::function<Matrix(const Vector&)>* exact_grad) {
  if (!exact.valid())
    throw Error(ErrorCode::invalid_argument, "error_norms: exact field required");
  const auto& mesh = *space.mesh;
  const int n = mesh.n;
  const long mk = space.comp;
  const auto& rule = simplex_rule(n, 6);
  const double fact = factorial(n);
  ErrorNorms out;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    Matrix grad_h = Matrix::Zero(mk, n);
    for (int a = 0; a <= n; ++a) {
      const Vector ua = full.segment(mesh.cells(c, a) * mk, mk);
      for (int p = 0; p < n; ++p) grad_h.col(p) += geo.grads(a, p) * ua;
    }
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Vector xq = (rule.bary.row(q) * geo.verts).transpose();
      const double wq = rule.weights[q] * fact * geo.volume;
      Vector uh = Vector::Zero(mk);
      for (int a = 0; a <= n; ++a)
        uh += rule.bary(q, a) * full.segment(mesh.cells(c, a) * mk, mk);
      const Vector ux = exact(xq);
      out.l2 += wq * (uh - ux).squaredNorm();
      out.l2_exact += wq * ux.squaredNorm();
      const Matrix gx = exact_grad != nullptr && *exact_grad
                            ? (*exact_grad)(xq)
                            : fd_gradient(exact.eval, xq, 1e-3);
      out.h1_semi += wq * (grad_h - gx).squaredNorm();
      out.h1_semi_exact += wq * gx.squaredNorm();
    }
  }
  out.l2 = std::sqrt(out.l2);
  out.h1_semi = std::sqrt(out.h1_semi);
  out.l2_exact = std::sqrt(out.l2_exact);
  out.h1_semi_exact = std::sqrt(out.h1_semi_exact);
  return out;
}

BoundaryResiduals boundary_residuals(const DofSpace& space, const Vector& full,
                                     const OperatorField& A, const OperatorField& B,
                                     const FormField& omega0) {
  const auto& mesh = *space.mesh;
  const int n = mesh.n, k = space.k;
  const long mk = space.comp;
  const auto& rule = simplex_rule(n - 1, 4);
  const double fact = factorial(n - 1);
  const CellDerivatives der = cell_derivatives(space, full, B);
  const double fd_h = 1e-3;
  BoundaryResiduals out;
  std::vector<Matrix> Ip;
  for (int p = 0; p < n; ++p) Ip.push_back(interior_matrix(n, k, Vector::Unit(n, p)));
  for (int f = 0; f < mesh.num_boundary_faces(); ++f) {
    const int c = mesh.face_cell[f];
    if (c < 0) continue;
    const Matrix fv = mesh.face_vertices(f);
    const Vector nu = mesh.face_normals.row(f).transpose();
    const double area = simplex_measure(fv);
    const Matrix Wk = wedge_matrix(n, k, nu);
    const Matrix Wkm = wedge_matrix(n, k - 1, nu);
    const Matrix Ik = interior_matrix(n, k, nu);
    const Matrix Ik1 = interior_matrix(n, k + 1, nu);
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Vector xq = (rule.bary.row(q) * fv).transpose();
      const double wq = rule.weights[q] * fact * area;
      Vector uh = Vector::Zero(mk);
      for (int l = 0; l < n; ++l)
        uh += rule.bary(q, l) * full.segment(mesh.boundary_faces(f, l) * mk, mk);
      Vector diff = uh;
      if (omega0.valid()) diff -= omega0(xq);
      out.wedge_trace += wq * (Wk * diff).squaredNorm();
      out.int_trace += wq * (Ik * (B(xq) * diff)).squaredNorm();

      Vector delta_h = der.delta.row(c).transpose();
      Vector d_h = der.d.row(c).transpose();
      if (omega0.valid()) {
        // data traces by finite differences of B w0 and w0
        const auto bw0 = [&](const Vector& y) { return Vector(B(y) * omega0(y)); };
        Vector delta0 = Vector::Zero(binomial(n, k - 1));
        Vector d0 = Vector::Zero(binomial(n, k + 1));
        for (int p = 0; p < n; ++p) {
          delta0 -= Ip[p] * fd_partial(bw0, xq, p, fd_h);
          d0 += wedge_matrix(n, k, Vector::Unit(n, p)) * fd_partial(omega0.eval, xq, p, fd_h);
        }
        delta_h -= delta0;
        d_h = d_h - d0;
        out.int_ad += wq * (Ik1 * (A(xq) * d_h)).squaredNorm();
      } else {
        out.int_ad += wq * (Ik1 * (A(xq) * d_h)).squaredNorm();
      }
      out.wedge_delta += wq * (Wkm * delta_h).squaredNorm();
    }
  }
  return out;
}

double l2_inner(const DofSpace& space, const Vector& full_a, const Vector& full_b) {
  const auto& mesh = *space.mesh;
  const int n = mesh.n;
  const long mk = space.comp;
  const auto& rule = simplex_rule(n, 2);
  const double fact = factorial(n);
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const double wq = rule.weights[q] * fact * geo.volume;
      Vector ua = Vector::Zero(mk), ub = Vector::Zero(mk);
      for (int a = 0; a <= n; ++a) {
        ua += rule.bary(q, a) * full_a.segment(mesh.cells(c, a) * mk, mk);
        ub += rule.bary(q, a) * full_b.segment(mesh.cells(c, a) * mk, mk);
      }
      acc += wq * ua.dot(ub);
    }
  }
  return acc;
}

}  // namespace hodge
