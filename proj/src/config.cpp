#include "hodgeforms/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hodgeforms/report.hpp"

namespace hodge {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(ErrorCode::config, "line " + std::to_string(line) + ": " + what);
}

struct RawEntry {
  std::string section;
  std::string key;
  std::string value;
  bool quoted = false;
  int line = 0;
};

// 'name', 'name[12]', 'name[12][13]'. Brackets may be empty (0-forms).
struct KeyParts {
  std::string base;
  std::vector<std::string> brackets;
};

KeyParts split_key(const std::string& key, int line) {
  KeyParts parts;
  size_t pos = 0;
  while (pos < key.size() && key[pos] != '[') ++pos;
  parts.base = key.substr(0, pos);
  while (pos < key.size()) {
    if (key[pos] != '[') fail(line, "malformed key '" + key + "'");
    const size_t close = key.find(']', pos);
    if (close == std::string::npos) fail(line, "malformed key '" + key + "'");
    parts.brackets.push_back(key.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return parts;
}

void check_index_string(const std::string& s, int line) {
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] < '1' || s[i] > '9')
      fail(line, "multi-index '" + s + "' must be digits 1..9");
    if (i > 0 && s[i] <= s[i - 1])
      fail(line, "multi-index '" + s + "' must be strictly increasing");
  }
}

int to_int(const RawEntry& e) {
  int v = 0;
  const auto [end, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || end != e.value.data() + e.value.size())
    fail(e.line, "key '" + e.key + "' needs an integer, got '" + e.value + "'");
  return v;
}

double to_double(const RawEntry& e) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || end != e.value.data() + e.value.size())
    fail(e.line, "key '" + e.key + "' needs a number, got '" + e.value + "'");
  return v;
}

Expression to_expression(const RawEntry& e) {
  try {
    return parse_expression(e.value);
  } catch (const Error& err) {
    fail(e.line, "key '" + e.key + "': " + err.what());
  }
}

std::vector<int> to_int_list(const RawEntry& e) {
  std::vector<int> out;
  std::istringstream in(e.value);
  std::string token;
  while (in >> token) {
    int v = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || end != token.data() + token.size())
      fail(e.line, "key '" + e.key + "' needs integers, got '" + token + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(e.line, "key '" + e.key + "' needs at least one integer");
  return out;
}

// One physical line -> optional section header or key/value pair.
void scan_line(const std::string& line, int number, std::string& section,
               std::vector<RawEntry>& out) {
  std::string text;
  bool in_quotes = false;
  for (const char c : line) {
    if (c == '"') in_quotes = !in_quotes;
    if (c == '#' && !in_quotes) break;
    text.push_back(c);
  }
  if (in_quotes) fail(number, "unterminated quote");

  const auto first = text.find_first_not_of(" \t");
  if (first == std::string::npos) return;
  const auto last = text.find_last_not_of(" \t");
  text = text.substr(first, last - first + 1);

  if (text.front() == '[') {
    if (text.back() != ']') fail(number, "malformed section header");
    section = text.substr(1, text.size() - 2);
    if (section.empty()) fail(number, "empty section name");
    return;
  }

  const auto eq = text.find('=');
  if (eq == std::string::npos) fail(number, "expected 'key = value'");
  RawEntry e;
  e.section = section;
  e.line = number;
  const auto key_end = text.find_last_not_of(" \t", eq == 0 ? 0 : eq - 1);
  if (eq == 0 || key_end == std::string::npos) fail(number, "missing key");
  e.key = text.substr(0, key_end + 1);
  auto val_begin = text.find_first_not_of(" \t", eq + 1);
  if (val_begin == std::string::npos) fail(number, "missing value for '" + e.key + "'");
  std::string value = text.substr(val_begin);
  if (value.front() == '"') {
    if (value.size() < 2 || value.back() != '"')
      fail(number, "malformed quoted value");
    value = value.substr(1, value.size() - 2);
    e.quoted = true;
  }
  e.value = value;
  if (section.empty()) fail(number, "key '" + e.key + "' outside any section");
  out.push_back(e);
}

void apply_matrix_entry(const RawEntry& e, const std::string& section,
                        std::vector<MatrixEntry>& out) {
  const KeyParts parts = split_key(e.key, e.line);
  if (parts.base != section || parts.brackets.size() != 2)
    fail(e.line, "section [" + section + "] takes keys of the form " + section +
                     "[rows][cols]");
  check_index_string(parts.brackets[0], e.line);
  check_index_string(parts.brackets[1], e.line);
  for (const auto& prev : out)
    if (prev.row == parts.brackets[0] && prev.col == parts.brackets[1])
      fail(e.line, "duplicate entry '" + e.key + "'");
  out.push_back({parts.brackets[0], parts.brackets[1], to_expression(e), e.line});
}

void apply_field_entry(const RawEntry& e, const std::string& section,
                       std::vector<FieldEntry>& out) {
  const KeyParts parts = split_key(e.key, e.line);
  if (parts.base != section || parts.brackets.size() != 1)
    fail(e.line, "section [" + section + "] takes keys of the form " + section +
                     "[components]");
  check_index_string(parts.brackets[0], e.line);
  for (const auto& prev : out)
    if (prev.comp == parts.brackets[0])
      fail(e.line, "duplicate entry '" + e.key + "'");
  out.push_back({parts.brackets[0], to_expression(e), e.line});
}

const std::set<std::string> kKinds = {"hodge_t",  "hodge_n",  "maxwell_t",
                                      "maxwell_n", "stokes_t", "stokes_n",
                                      "dirichlet", "divcurl_t", "divcurl_n"};

void check_mesh(const Config& cfg, const std::set<std::string>& seen, int line) {
  const std::string& type = cfg.mesh.type;
  std::vector<std::string> needed;
  if (type == "square")
    needed = {"a", "b", "m"};
  else if (type == "disk")
    needed = {"r", "m"};
  else if (type == "annulus")
    needed = {"r0", "r1", "m"};
  else if (type == "cube")
    needed = {"a", "m"};
  else if (type == "file")
    needed = {"path"};
  else
    fail(line, "unknown mesh type '" + type + "'");
  for (const auto& key : needed)
    if (!seen.count(key))
      fail(line, "mesh type '" + type + "' needs key '" + key + "'");
  for (const auto& key : seen)
    if (key != "type" && std::find(needed.begin(), needed.end(), key) == needed.end())
      fail(line, "key '" + key + "' is not used by mesh type '" + type + "'");
}

}  // namespace

Config parse_config(const std::string& text) {
  std::vector<RawEntry> raw;
  {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) scan_line(line, ++number, section, raw);
  }

  Config cfg;
  std::set<std::string> mesh_seen;
  int mesh_line = 0;
  std::set<std::string> scalar_seen;

  const auto once = [&](const RawEntry& e) {
    const std::string tag = e.section + "." + e.key;
    if (!scalar_seen.insert(tag).second) fail(e.line, "duplicate key '" + e.key + "'");
  };

  for (const auto& e : raw) {
    if (e.section == "problem") {
      once(e);
      if (e.key == "kind") {
        if (!kKinds.count(e.value)) fail(e.line, "unknown kind '" + e.value + "'");
        cfg.kind = e.value;
      } else if (e.key == "n") {
        cfg.n = to_int(e);
      } else if (e.key == "k") {
        cfg.k = to_int(e);
      } else if (e.key == "lambda") {
        cfg.lambda = to_double(e);
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [problem]");
      }
    } else if (e.section == "mesh") {
      once(e);
      mesh_seen.insert(e.key);
      mesh_line = e.line;
      if (e.key == "type")
        cfg.mesh.type = e.value;
      else if (e.key == "a")
        cfg.mesh.a = to_double(e);
      else if (e.key == "b")
        cfg.mesh.b = to_double(e);
      else if (e.key == "r")
        cfg.mesh.r = to_double(e);
      else if (e.key == "r0")
        cfg.mesh.r0 = to_double(e);
      else if (e.key == "r1")
        cfg.mesh.r1 = to_double(e);
      else if (e.key == "m")
        cfg.mesh.m = to_int(e);
      else if (e.key == "path")
        cfg.mesh.path = e.value;
      else
        fail(e.line, "unknown key '" + e.key + "' in [mesh]");
    } else if (e.section == "A") {
      apply_matrix_entry(e, "A", cfg.A);
    } else if (e.section == "B") {
      apply_matrix_entry(e, "B", cfg.B);
    } else if (e.section == "f") {
      apply_field_entry(e, "f", cfg.f);
    } else if (e.section == "F") {
      apply_field_entry(e, "F", cfg.F);
    } else if (e.section == "g") {
      apply_field_entry(e, "g", cfg.g);
    } else if (e.section == "omega0") {
      apply_field_entry(e, "omega0", cfg.omega0);
    } else if (e.section == "p0") {
      apply_field_entry(e, "p0", cfg.p0);
    } else if (e.section == "exact") {
      apply_field_entry(e, "exact", cfg.exact);
    } else if (e.section == "solver") {
      once(e);
      if (e.key == "eig_count")
        cfg.solver.eig_count = to_int(e);
      else if (e.key == "eig_tol")
        cfg.solver.eig_tol = to_double(e);
      else if (e.key == "max_iterations")
        cfg.solver.max_iterations = to_int(e);
      else if (e.key == "dense_threshold")
        cfg.solver.dense_threshold = to_int(e);
      else if (e.key == "c_tau")
        cfg.solver.c_tau = to_double(e);
      else
        fail(e.line, "unknown key '" + e.key + "' in [solver]");
    } else if (e.section == "convergence") {
      once(e);
      if (e.key == "levels")
        cfg.levels = to_int_list(e);
      else
        fail(e.line, "unknown key '" + e.key + "' in [convergence]");
    } else if (e.section == "output") {
      once(e);
      if (e.key == "json")
        cfg.output.json = e.value;
      else if (e.key == "csv")
        cfg.output.csv = e.value;
      else
        fail(e.line, "unknown key '" + e.key + "' in [output]");
    } else {
      fail(e.line, "unknown section [" + e.section + "]");
    }
  }

  if (!mesh_seen.empty() || !cfg.mesh.type.empty()) {
    if (!mesh_seen.count("type")) fail(mesh_line ? mesh_line : 1, "mesh needs a type");
    check_mesh(cfg, mesh_seen, mesh_line);
  }
  for (const int level : cfg.levels)
    if (level < 2) fail(1, "convergence levels must be at least 2");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::config) throw;
    throw Error(ErrorCode::config, path + ": " + e.what());
  }
}

namespace {

void dump_entries(std::ostringstream& out, const std::string& name,
                  std::vector<MatrixEntry> entries) {
  if (entries.empty()) return;
  std::sort(entries.begin(), entries.end(), [](const MatrixEntry& x, const MatrixEntry& y) {
    return std::tie(x.row, x.col) < std::tie(y.row, y.col);
  });
  out << "\n[" << name << "]\n";
  for (const auto& e : entries)
    out << name << "[" << e.row << "][" << e.col << "] = \"" << e.expr.text() << "\"\n";
}

void dump_entries(std::ostringstream& out, const std::string& name,
                  std::vector<FieldEntry> entries) {
  if (entries.empty()) return;
  std::sort(entries.begin(), entries.end(),
            [](const FieldEntry& x, const FieldEntry& y) { return x.comp < y.comp; });
  out << "\n[" << name << "]\n";
  for (const auto& e : entries)
    out << name << "[" << e.comp << "] = \"" << e.expr.text() << "\"\n";
}

}  // namespace

std::string dump_config(const Config& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "kind = " << cfg.kind << "\n";
  out << "n = " << cfg.n << "\n";
  out << "k = " << cfg.k << "\n";
  out << "lambda = " << format_g17(cfg.lambda) << "\n";

  if (!cfg.mesh.type.empty()) {
    out << "\n[mesh]\n";
    out << "type = " << cfg.mesh.type << "\n";
    if (cfg.mesh.type == "square") {
      out << "a = " << format_g17(cfg.mesh.a) << "\n";
      out << "b = " << format_g17(cfg.mesh.b) << "\n";
      out << "m = " << cfg.mesh.m << "\n";
    } else if (cfg.mesh.type == "disk") {
      out << "r = " << format_g17(cfg.mesh.r) << "\n";
      out << "m = " << cfg.mesh.m << "\n";
    } else if (cfg.mesh.type == "annulus") {
      out << "r0 = " << format_g17(cfg.mesh.r0) << "\n";
      out << "r1 = " << format_g17(cfg.mesh.r1) << "\n";
      out << "m = " << cfg.mesh.m << "\n";
    } else if (cfg.mesh.type == "cube") {
      out << "a = " << format_g17(cfg.mesh.a) << "\n";
      out << "m = " << cfg.mesh.m << "\n";
    } else {
      out << "path = \"" << cfg.mesh.path << "\"\n";
    }
  }

  dump_entries(out, "A", cfg.A);
  dump_entries(out, "B", cfg.B);
  dump_entries(out, "f", cfg.f);
  dump_entries(out, "F", cfg.F);
  dump_entries(out, "g", cfg.g);
  dump_entries(out, "omega0", cfg.omega0);
  dump_entries(out, "p0", cfg.p0);
  dump_entries(out, "exact", cfg.exact);

  out << "\n[solver]\n";
  out << "eig_count = " << cfg.solver.eig_count << "\n";
  out << "eig_tol = " << format_g17(cfg.solver.eig_tol) << "\n";
  out << "max_iterations = " << cfg.solver.max_iterations << "\n";
  out << "dense_threshold = " << cfg.solver.dense_threshold << "\n";
  out << "c_tau = " << format_g17(cfg.solver.c_tau) << "\n";

  if (!cfg.levels.empty()) {
    out << "\n[convergence]\n";
    out << "levels =";
    for (const int level : cfg.levels) out << " " << level;
    out << "\n";
  }

  if (!cfg.output.json.empty() || !cfg.output.csv.empty()) {
    out << "\n[output]\n";
    if (!cfg.output.json.empty()) out << "json = \"" << cfg.output.json << "\"\n";
    if (!cfg.output.csv.empty()) out << "csv = \"" << cfg.output.csv << "\"\n";
  }
  return out.str();
}

SimplicialMesh mesh_from_config(const MeshConfig& mesh) {
  try {
    if (mesh.type == "square") return generate_square(mesh.a, mesh.b, mesh.m);
    if (mesh.type == "disk") return generate_disk(mesh.r, mesh.m);
    if (mesh.type == "annulus") return generate_annulus(mesh.r0, mesh.r1, mesh.m);
    if (mesh.type == "cube") return generate_cube(mesh.a, mesh.m);
    if (mesh.type == "file") return load_mesh(mesh.path);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::invalid_argument) throw;
    throw Error(ErrorCode::config, std::string("mesh: ") + e.what());
  }
  throw Error(ErrorCode::config, "config has no mesh");
}

namespace {

// Multi-index string -> position in the lexicographic degree basis.
int entry_position(const std::string& index, int n, int degree, const std::string& name,
                   int line) {
  if (static_cast<int>(index.size()) != degree)
    fail(line, name + " index '" + index + "' must have " + std::to_string(degree) +
                   (degree == 1 ? " axis" : " axes"));
  std::uint64_t mask = 0;
  for (const char c : index) {
    const int axis = c - '0';
    if (axis > n) fail(line, name + " index '" + index + "' uses axis " +
                                 std::to_string(axis) + " but n = " + std::to_string(n));
    mask |= std::uint64_t{1} << (axis - 1);
  }
  return multiindex_position(n, degree, mask);
}

void check_variables(const Expression& expr, int n, const std::string& name, int line) {
  if (expr.max_variable() > n)
    fail(line, name + " uses x" + std::to_string(expr.max_variable()) + " but n = " +
                   std::to_string(n));
}

OperatorField operator_from_entries(const std::vector<MatrixEntry>& entries, int n,
                                    int degree, const std::string& name) {
  if (entries.empty()) return {};
  const long m = binomial(n, degree);
  if (m == 0)
    fail(entries.front().line,
         name + " has no components at this degree (n = " + std::to_string(n) +
             ", acting on " + std::to_string(degree) + "-forms)");
  struct Resolved {
    int row, col;
    Expression expr;
  };
  std::vector<Resolved> resolved;
  bool variable = false;
  for (const auto& e : entries) {
    check_variables(e.expr, n, name + "[" + e.row + "][" + e.col + "]", e.line);
    variable = variable || e.expr.max_variable() > 0;
    resolved.push_back({entry_position(e.row, n, degree, name, e.line),
                        entry_position(e.col, n, degree, name, e.line), e.expr});
  }
  OperatorField out;
  out.n = n;
  out.degree_source = degree;
  out.degree_target = degree;
  out.smoothness = variable ? Smoothness::smooth : Smoothness::constant;
  out.sample = [resolved, m](const Vector& x) {
    Matrix M = Matrix::Identity(m, m);
    for (const auto& r : resolved) M(r.row, r.col) = r.expr.eval(x);
    return M;
  };
  return out;
}

FormField field_from_entries(const std::vector<FieldEntry>& entries, int n, int degree,
                             const std::string& name) {
  if (entries.empty()) return {};
  if (degree < 0 || degree > n)
    fail(entries.front().line,
         name + " has no components at this degree (n = " + std::to_string(n) + ")");
  const long m = binomial(n, degree);
  struct Resolved {
    int pos;
    Expression expr;
  };
  std::vector<Resolved> resolved;
  for (const auto& e : entries) {
    check_variables(e.expr, n, name + "[" + e.comp + "]", e.line);
    resolved.push_back({entry_position(e.comp, n, degree, name, e.line), e.expr});
  }
  return FormField::make(n, degree, [resolved, m](const Vector& x) {
    Vector v = Vector::Zero(m);
    for (const auto& r : resolved) v[r.pos] = r.expr.eval(x);
    return v;
  });
}

}  // namespace

ProblemSpec spec_from_config(const Config& cfg) {
  if (cfg.n < 1 || cfg.n > 9)
    throw Error(ErrorCode::config, "n = " + std::to_string(cfg.n) + " out of range");
  if (cfg.k < 0 || cfg.k > cfg.n)
    throw Error(ErrorCode::config, "k = " + std::to_string(cfg.k) +
                                       " out of range for n = " + std::to_string(cfg.n));
  ProblemSpec spec;
  spec.kind = cfg.kind;
  spec.n = cfg.n;
  spec.k = cfg.k;
  spec.lambda = cfg.lambda;
  spec.A = operator_from_entries(cfg.A, cfg.n, cfg.k + 1, "A");
  spec.B = operator_from_entries(cfg.B, cfg.n, cfg.k, "B");
  const bool divcurl = cfg.kind == "divcurl_t" || cfg.kind == "divcurl_n";
  spec.f = field_from_entries(cfg.f, cfg.n, divcurl ? cfg.k + 1 : cfg.k, "f");
  spec.F = field_from_entries(cfg.F, cfg.n, cfg.k + 1, "F");
  spec.g = field_from_entries(cfg.g, cfg.n, cfg.k - 1, "g");
  spec.omega0 = field_from_entries(cfg.omega0, cfg.n, cfg.k, "omega0");
  spec.p0 = field_from_entries(cfg.p0, cfg.n, 0, "p0");
  return spec;
}

FormField exact_from_config(const Config& cfg) {
  return field_from_entries(cfg.exact, cfg.n, cfg.k, "exact");
}

}  // namespace hodge
