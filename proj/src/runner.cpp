#include "hodgeforms/runner.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "hodgeforms/assembly.hpp"
#include "hodgeforms/config.hpp"
#include "hodgeforms/report.hpp"
#include "hodgeforms/solver.hpp"

namespace hodge {

namespace {

struct Flags {
  std::string command;
  std::string config_path;
  std::string mesh_path;
  std::string out_dir;
  int count = 0;   ///< eig: overrides solver.eig_count when positive
  int levels = 0;  ///< convergence: run the first `levels` entries
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::data_incompatible: return 2;
    case ErrorCode::spectrum_hit: return 3;
    case ErrorCode::config: return 4;
    default: return 1;
  }
}

void apply_thread_env() {
  const char* env = std::getenv("HODGE_FORMS_THREADS");
  if (!env) return;
  int v = 0;
  const auto [end, ec] = std::from_chars(env, env + std::string(env).size(), v);
  if (ec != std::errc() || *end != '\0' || v < 1) {
    std::cerr << "ignoring HODGE_FORMS_THREADS='" << env << "'\n";
    return;
  }
#ifdef _OPENMP
  omp_set_num_threads(v);
#else
  (void)v;
#endif
}

std::string join_out(const std::string& dir, const std::string& path) {
  if (dir.empty() || path.empty() || path.front() == '/') return path;
  return dir + "/" + path;
}

BcKind bc_of_kind(const std::string& kind) {
  if (kind == "dirichlet") return BcKind::dirichlet;
  if (kind.size() >= 2 && kind.compare(kind.size() - 2, 2, "_n") == 0)
    return BcKind::normal;
  return BcKind::tangential;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// report documents

void emit_timings(JsonWriter& w, double elapsed) {
  w.key("timings").begin_object();
  w.key("total_seconds").value(elapsed);
  w.end_object();
}

void emit_compatibility(JsonWriter& w, const CompatibilityReport& rep) {
  w.key("compatibility").begin_array();
  for (const auto& c : rep.checks) {
    w.begin_object();
    w.key("name").value(c.name);
    w.key("magnitude").value(c.magnitude);
    w.key("tolerance").value(c.tolerance);
    w.key("pass").value(c.pass);
    w.end_object();
  }
  w.end_array();
}

std::string solve_document(const Config& cfg, const SolveReport& rep, double elapsed) {
  const bool maxwell = rep.kind.rfind("maxwell", 0) == 0;
  const bool stokes = rep.kind.rfind("stokes", 0) == 0;
  const bool divcurl = rep.kind.rfind("divcurl", 0) == 0;

  JsonWriter w;
  w.begin_object();
  w.key("spec_echo").value(dump_config(cfg));
  w.key("sign_convention").value(rep.sign);
  w.key("residuals").begin_object();
  w.key("equation").value(rep.equation_residual);
  if (maxwell || stokes) w.key("constraint").value(rep.constraint_residual);
  if (divcurl) {
    w.key("d").value(rep.res_d);
    w.key("delta").value(rep.res_delta);
  }
  if (rep.kind == "dirichlet") w.key("trace").value(rep.trace_residual);
  if (maxwell) w.key("projection_gap").value(rep.projection_gap);
  w.end_object();
  w.key("boundary_residuals").begin_object();
  w.key("wedge_trace").value(rep.boundary.wedge_trace);
  w.key("wedge_delta").value(rep.boundary.wedge_delta);
  w.key("int_trace").value(rep.boundary.int_trace);
  w.key("int_ad").value(rep.boundary.int_ad);
  w.end_object();
  emit_compatibility(w, rep.compatibility);
  w.key("nullspace_dim").value(rep.nullspace_dim);
  emit_timings(w, elapsed);
  w.end_object();
  return w.str();
}

std::string error_document(const Config* cfg, const Error& err, double elapsed) {
  JsonWriter w;
  w.begin_object();
  if (cfg) w.key("spec_echo").value(dump_config(*cfg));
  w.key("error").begin_object();
  w.key("code").value(error_code_name(err.code()));
  w.key("message").value(err.what());
  w.end_object();
  emit_timings(w, elapsed);
  w.end_object();
  return w.str();
}

// ---------------------------------------------------------------------------
// subcommands

OperatorField coefficient_or_identity(const OperatorField& F, int n, int degree) {
  return F.sample ? F : OperatorField::identity(n, degree);
}

int run_solve(const Config& cfg, const ReportPaths& paths) {
  const auto start = std::chrono::steady_clock::now();
  const SimplicialMesh mesh = mesh_from_config(cfg.mesh);
  const ProblemSpec spec = spec_from_config(cfg);
  const SolveReport rep = solve_problem(mesh, spec);
  if (!rep.notes.empty()) std::cerr << rep.notes << "\n";
  write_report(solve_document(cfg, rep, seconds_since(start)), "", paths);
  return 0;
}

int run_eig(const Config& cfg, const Flags& flags, const ReportPaths& paths) {
  const auto start = std::chrono::steady_clock::now();
  const SimplicialMesh mesh = mesh_from_config(cfg.mesh);
  const ProblemSpec spec = spec_from_config(cfg);
  BcKind bc = bc_of_kind(cfg.kind);
  if (bc == BcKind::normal && spec.B.sample) bc = BcKind::normal_b;
  const DofSpace space =
      build_space(mesh, cfg.k, bc, spec.B.sample ? &spec.B : nullptr);
  const OperatorField A = coefficient_or_identity(spec.A, cfg.n, cfg.k + 1);
  const OperatorField B = coefficient_or_identity(spec.B, cfg.n, cfg.k);
  const SpMat K = reduce(space, assemble_stiffness_full(space, A, B));
  const SpMat M = reduce(space, assemble_mass_full(space, B));
  EigOptions opts;
  opts.dense_threshold = cfg.solver.dense_threshold;
  opts.max_iterations = cfg.solver.max_iterations;
  opts.tol = cfg.solver.eig_tol;
  const int count = flags.count > 0 ? flags.count : cfg.solver.eig_count;
  const EigenResult res = eig_pairs(K, M, count, opts);

  JsonWriter w;
  w.begin_object();
  w.key("spec_echo").value(dump_config(cfg));
  w.key("sign_convention").value(calibrated_sign().s);
  w.key("spectrum").begin_object();
  w.key("convention").value(res.sign_convention);
  w.key("sigma").begin_array();
  for (long i = 0; i < res.sigma.size(); ++i) w.value(res.sigma[i]);
  w.end_array();
  w.key("residuals").begin_array();
  for (long i = 0; i < res.residuals.size(); ++i) w.value(res.residuals[i]);
  w.end_array();
  w.end_object();
  emit_timings(w, seconds_since(start));
  w.end_object();
  write_report(w.str(), "", paths);
  return 0;
}

int run_gaffney(const Config& cfg, const ReportPaths& paths) {
  const auto start = std::chrono::steady_clock::now();
  const BcKind bc = bc_of_kind(cfg.kind);
  if (bc == BcKind::dirichlet)
    throw Error(ErrorCode::config, "gaffney needs a tangential or normal kind");
  const SimplicialMesh mesh = mesh_from_config(cfg.mesh);
  const ProblemSpec spec = spec_from_config(cfg);
  const OperatorField B = coefficient_or_identity(spec.B, cfg.n, cfg.k);
  const GaffneyReport rep = gaffney_constant(mesh, cfg.k, B, bc);
  if (!rep.notes.empty()) std::cerr << rep.notes << "\n";

  JsonWriter w;
  w.begin_object();
  w.key("spec_echo").value(dump_config(cfg));
  w.key("sign_convention").value(calibrated_sign().s);
  w.key("gaffney").begin_object();
  w.key("constant").value(rep.constant);
  w.key("rayleigh").value(rep.rayleigh);
  w.key("excluded_dim").value(rep.excluded_dim);
  w.end_object();
  emit_timings(w, seconds_since(start));
  w.end_object();
  write_report(w.str(), "", paths);
  return 0;
}

int run_harmonics(const Config& cfg, const ReportPaths& paths) {
  const auto start = std::chrono::steady_clock::now();
  const BcKind bc = bc_of_kind(cfg.kind);
  if (bc == BcKind::dirichlet)
    throw Error(ErrorCode::config, "harmonics needs a tangential or normal kind");
  const SimplicialMesh mesh = mesh_from_config(cfg.mesh);
  const HarmonicBasis hb = harmonic_basis(mesh, cfg.k, bc, cfg.solver.c_tau);
  if (!hb.warning.empty()) std::cerr << hb.warning << "\n";
  std::cerr << "harmonic dimension " << hb.dimension << ", threshold tau = " << hb.tau;
  if (hb.rho.size() > hb.dimension)
    std::cerr << ", first rejected quotient " << hb.rho[hb.dimension];
  std::cerr << "\n";

  JsonWriter w;
  w.begin_object();
  w.key("spec_echo").value(dump_config(cfg));
  w.key("sign_convention").value(calibrated_sign().s);
  w.key("nullspace_dim").value(hb.dimension);
  emit_timings(w, seconds_since(start));
  w.end_object();
  write_report(w.str(), "", paths);
  return 0;
}

int run_convergence(const Config& cfg, const Flags& flags, ReportPaths paths) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.levels.empty())
    throw Error(ErrorCode::config, "convergence needs [convergence] levels");
  if (cfg.mesh.type == "file")
    throw Error(ErrorCode::config, "convergence needs a generated mesh family");
  std::vector<int> levels = cfg.levels;
  if (flags.levels > 0) {
    if (flags.levels < 2)
      throw Error(ErrorCode::config, "--levels needs at least 2");
    if (flags.levels > static_cast<int>(levels.size()))
      throw Error(ErrorCode::config,
                  "--levels asks for " + std::to_string(flags.levels) +
                      " levels but the config provides " +
                      std::to_string(levels.size()));
    levels.resize(flags.levels);
  }
  const ProblemSpec spec = spec_from_config(cfg);

  ManufacturedCase mc;
  mc.name = "config";
  mc.kind = cfg.kind;
  mc.n = cfg.n;
  mc.k = cfg.k;
  mc.bc = bc_of_kind(cfg.kind);
  mc.lambda = cfg.lambda;
  mc.A = spec.A;
  mc.B = spec.B;
  mc.f = spec.f;
  mc.F = spec.F;
  mc.g = spec.g;
  mc.omega0 = spec.omega0;
  mc.p0 = spec.p0;
  mc.exact = exact_from_config(cfg);
  if (mc.exact.valid())
    mc.exact_grad = [ev = mc.exact.eval](const Vector& x) {
      return fd_gradient(ev, x, 1e-4);
    };
  const MeshConfig base = cfg.mesh;
  mc.mesh = [base](int level) {
    MeshConfig scaled = base;
    scaled.m = level;
    return mesh_from_config(scaled);
  };
  mc.levels = levels;
  const ConvergenceTable table = convergence_study(mc);

  if (paths.csv.empty()) paths.csv = join_out(flags.out_dir, "convergence.csv");
  JsonWriter w;
  w.begin_object();
  w.key("spec_echo").value(dump_config(cfg));
  w.key("sign_convention").value(calibrated_sign().s);
  emit_timings(w, seconds_since(start));
  w.end_object();
  write_report(w.str(), to_csv(table), paths);
  return 0;
}

int run_check_ellipticity(const Config& cfg) {
  const SimplicialMesh mesh = mesh_from_config(cfg.mesh);
  const ProblemSpec spec = spec_from_config(cfg);
  const OperatorField A = coefficient_or_identity(spec.A, cfg.n, cfg.k + 1);
  const OperatorField B = coefficient_or_identity(spec.B, cfg.n, cfg.k);

  std::vector<Vector> samples;
  const int C = mesh.num_cells();
  const bool pointwise =
      A.smoothness == Smoothness::smooth || B.smoothness == Smoothness::smooth;
  const int wanted = pointwise ? 25 : 1;
  const int stride = std::max(1, C / wanted);
  for (int c = 0; c < C; c += stride) {
    const Matrix verts = mesh.cell_vertices(c);
    samples.push_back(verts.colwise().mean());
  }

  double a_min = std::numeric_limits<double>::infinity();
  double b_min = std::numeric_limits<double>::infinity();
  double norm = 0.0;
  for (const Vector& x : samples) {
    const Matrix Ax = A.sample(x);
    const Matrix Bx = B.sample(x);
    a_min = std::min(a_min, legendre_hadamard_constant(Ax, cfg.n, cfg.k));
    b_min = std::min(b_min, legendre_constant(Bx));
    norm = std::max({norm, Ax.norm(), Bx.norm()});
  }
  const double threshold = 1e-10 * (1.0 + norm);
  const bool a_ok = a_min > threshold;
  const bool b_ok = b_min > threshold;
  std::cout << "A: legendre_hadamard constant = " << format_g17(a_min) << " ("
            << (a_ok ? "pass" : "FAIL") << ")\n";
  std::cout << "B: legendre constant = " << format_g17(b_min) << " ("
            << (b_ok ? "pass" : "FAIL") << ")\n";
  return a_ok && b_ok ? 0 : 1;
}

int run_mesh_info(const Config* cfg, const Flags& flags) {
  SimplicialMesh mesh;
  if (!flags.mesh_path.empty())
    mesh = load_mesh(flags.mesh_path);
  else if (cfg)
    mesh = mesh_from_config(cfg->mesh);
  else
    throw Error(ErrorCode::config, "mesh-info needs --config or --mesh");

  const int n = mesh.n;
  std::set<std::vector<int>> edges, triangles;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::vector<int> v(n + 1);
    for (int a = 0; a <= n; ++a) v[a] = mesh.cells(c, a);
    std::sort(v.begin(), v.end());
    for (int a = 0; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b) {
        edges.insert({v[a], v[b]});
        if (n == 3)
          for (int d = b + 1; d <= n; ++d) triangles.insert({v[a], v[b], v[d]});
      }
  }
  long euler = mesh.num_vertices() - static_cast<long>(edges.size());
  euler += n == 2 ? mesh.num_cells()
                  : static_cast<long>(triangles.size()) - mesh.num_cells();

  std::cout << "n = " << n << "\n";
  std::cout << "vertices = " << mesh.num_vertices() << "\n";
  std::cout << "cells = " << mesh.num_cells() << "\n";
  std::cout << "boundary_faces = " << mesh.num_boundary_faces() << "\n";
  std::cout << "h = " << format_g17(mesh.mesh_size()) << "\n";
  std::cout << "volume = " << format_g17(mesh.total_volume()) << "\n";
  std::cout << "euler_characteristic = " << euler << "\n";
  const MeshDiagnostics diag = validate_mesh(mesh);
  for (const auto& check : diag.checks) {
    std::cout << "validate " << check.name << ": " << (check.pass ? "pass" : "FAIL");
    if (!check.pass && !check.detail.empty()) std::cout << " (" << check.detail << ")";
    std::cout << "\n";
  }
  return diag.all_pass() ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  Flags flags;
  CLI::App app{"Hodge-type boundary value problems on simplicial meshes"};
  app.require_subcommand(1);

  const std::vector<std::string> names = {"solve",       "eig",
                                          "gaffney",     "divcurl",
                                          "harmonics",   "convergence",
                                          "check-ellipticity", "mesh-info"};
  const std::vector<std::string> blurbs = {
      "solve the configured boundary value problem",
      "smallest eigenvalues sigma of the configured form",
      "discrete Gaffney constant of the configured space",
      "solve the configured div-curl system",
      "dimension of the discrete harmonic space",
      "refinement study over the configured levels",
      "sample the coefficient ellipticity constants",
      "mesh statistics and validation",
  };
  for (size_t i = 0; i < names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", flags.config_path, "config file");
    sub->add_option("--mesh", flags.mesh_path, "mesh file, overrides [mesh]");
    sub->add_option("--out", flags.out_dir, "directory for report paths");
    if (names[i] == "eig")
      sub->add_option("--count", flags.count, "eigenvalue count");
    if (names[i] == "convergence")
      sub->add_option("--levels", flags.levels, "run the first N levels");
  }

  std::vector<const char*> argv;
  argv.push_back("hodge");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  }
  flags.command = app.get_subcommands().front()->get_name();

  apply_thread_env();

  const auto start = std::chrono::steady_clock::now();
  Config cfg;
  bool have_cfg = false;
  ReportPaths paths;
  try {
    if (!flags.config_path.empty()) {
      cfg = load_config(flags.config_path);
      have_cfg = true;
    } else if (flags.command != "mesh-info") {
      throw Error(ErrorCode::config, flags.command + " needs --config");
    }
    if (!flags.mesh_path.empty() && flags.command != "mesh-info") {
      cfg.mesh = MeshConfig{};
      cfg.mesh.type = "file";
      cfg.mesh.path = flags.mesh_path;
    }
    if (flags.count > 0) cfg.solver.eig_count = flags.count;
    paths.json = join_out(flags.out_dir, cfg.output.json);
    paths.csv = join_out(flags.out_dir, cfg.output.csv);

    if (flags.command == "solve") return run_solve(cfg, paths);
    if (flags.command == "divcurl") {
      if (cfg.kind.rfind("divcurl", 0) != 0)
        throw Error(ErrorCode::config, "divcurl needs kind divcurl_t or divcurl_n");
      return run_solve(cfg, paths);
    }
    if (flags.command == "eig") return run_eig(cfg, flags, paths);
    if (flags.command == "gaffney") return run_gaffney(cfg, paths);
    if (flags.command == "harmonics") return run_harmonics(cfg, paths);
    if (flags.command == "convergence") return run_convergence(cfg, flags, paths);
    if (flags.command == "check-ellipticity") return run_check_ellipticity(cfg);
    return run_mesh_info(have_cfg ? &cfg : nullptr, flags);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    try {
      write_report(
          error_document(have_cfg ? &cfg : nullptr, e, seconds_since(start)), "",
          paths);
    } catch (const std::exception& io) {
      std::cerr << "report not written: " << io.what() << "\n";
    }
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hodge
