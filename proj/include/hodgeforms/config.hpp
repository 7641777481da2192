#pragma once

// The config file format of the command line tool: flat `key = value` lines
// under bracketed section headers, with quoted expression values for
// coefficients and data fields. See the README for the full schema.

#include <string>
#include <vector>

#include "hodgeforms/drivers.hpp"
#include "hodgeforms/expression.hpp"

namespace hodge {

struct MeshConfig {
  std::string type;  ///< square | disk | annulus | cube | file
  double a = 0.0, b = 0.0;
  double r = 0.0, r0 = 0.0, r1 = 0.0;
  int m = 0;
  std::string path;
};

/// One coefficient entry `A[rows][cols] = "expr"`. Multi-indices are written
/// as ascending digit strings ("12" for dx1^dx2), empty for 0-forms.
struct MatrixEntry {
  std::string row, col;
  Expression expr;
  int line = 0;
};

/// One data component `f[comps] = "expr"`.
struct FieldEntry {
  std::string comp;
  Expression expr;
  int line = 0;
};

struct SolverConfig {
  int eig_count = 6;
  double eig_tol = 1e-10;
  int max_iterations = 600;
  int dense_threshold = 2000;
  double c_tau = 0.5;
};

struct OutputConfig {
  std::string json;  ///< report path; stdout when empty
  std::string csv;   ///< table path; derived from json when empty
};

/// A parsed config file. Coefficient and data blocks hold raw entries; the
/// degree checks happen in spec_from_config once kind, n and k are known.
struct Config {
  std::string kind = "hodge_t";
  int n = 2;
  int k = 1;
  double lambda = 0.0;
  MeshConfig mesh;
  std::vector<MatrixEntry> A, B;
  std::vector<FieldEntry> f, F, g, omega0, p0;
  std::vector<FieldEntry> exact;  ///< known solution, for convergence studies
  SolverConfig solver;
  std::vector<int> levels;  ///< convergence mesh parameters
  OutputConfig output;
};

/// Parses and schema-validates config text; unknown sections and keys are
/// config errors naming the line.
Config parse_config(const std::string& text);

Config load_config(const std::string& path);

/// Canonical text form: fixed section and key order, 17 significant digits,
/// entries sorted by index. parse_config(dump_config(c)) reproduces c.
std::string dump_config(const Config& cfg);

/// Runs the configured generator or loads the mesh file.
SimplicialMesh mesh_from_config(const MeshConfig& mesh);

/// Builds the ProblemSpec: coefficient matrices from entries (identity
/// default), data fields with the component degrees the kind dictates, and
/// variable counts checked against n.
ProblemSpec spec_from_config(const Config& cfg);

/// The configured [exact] solution as a k-form field; invalid when absent.
FormField exact_from_config(const Config& cfg);

}  // namespace hodge
