// Times the parallel assembly kernels against the serial reference on a
// sequence of meshes and verifies that both produce identical matrices.

#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hodgeforms/assembly.hpp"

using namespace hodge;

namespace {

double now() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return 0.0;
#endif
}

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = 3;
  std::vector<int> sizes = {16, 32, 48, 64};
  if (argc > 1) {
    sizes.clear();
    for (int i = 1; i < argc; ++i) sizes.push_back(std::atoi(argv[i]));
  }

  const auto A = OperatorField::scalar(2, 2, [](const Vector& x) {
    return 1.0 + 0.5 * std::sin(x[0]) * std::sin(x[1]);
  });
  const auto B = OperatorField::identity(2, 1);
  const auto f = FormField::make(2, 1, [](const Vector& x) {
    return Vector(Eigen::Vector2d(std::cos(x[0]) * std::sin(x[1]),
                                  std::sin(x[0]) * std::cos(x[1])));
  });

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%6s %9s %12s %12s %9s %12s\n", "m", "dofs", "serial [s]",
              "parallel [s]", "speedup", "max |diff|");

  for (const int m : sizes) {
    const SimplicialMesh mesh = generate_square(0.0, 3.141592653589793, m);
    const DofSpace space = build_space(mesh, 1, BcKind::tangential);

    SpMat ks, kp;
    Vector ls, lp;
    const double ts = time_best_of(reps, [&] {
      ks = assemble_stiffness_full(space, A, B, AssemblyMode::serial);
      ls = assemble_load_full(space, f, {}, AssemblyMode::serial);
    });
    const double tp = time_best_of(reps, [&] {
      kp = assemble_stiffness_full(space, A, B, AssemblyMode::parallel);
      lp = assemble_load_full(space, f, {}, AssemblyMode::parallel);
    });

    double diff = (ls - lp).cwiseAbs().maxCoeff();
    const SpMat delta = (ks - kp).pruned();
    for (int o = 0; o < delta.outerSize(); ++o)
      for (SpMat::InnerIterator it(delta, o); it; ++it)
        diff = std::max(diff, std::abs(it.value()));

    std::printf("%6d %9ld %12.4f %12.4f %9.2f %12.3e\n", m,
                static_cast<long>(space.full_dofs), ts, tp, ts / std::max(tp, 1e-12),
                diff);
    if (diff != 0.0) {
      std::printf("serial and parallel assembly disagree\n");
      return 1;
    }
  }
  return 0;
}
