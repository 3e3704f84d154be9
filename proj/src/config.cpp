#include "mkv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace mkv {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct KeyDecl {
  const char* section;
  const char* key;
  ValueType type;
};

// clang-format off
constexpr KeyDecl kSchema[] = {
    {"model", "kind", ValueType::Text},          {"model", "name", ValueType::Text},
    {"model", "chi", ValueType::Real},           {"model", "radius", ValueType::Real},
    {"model", "epsilon", ValueType::Real},       {"model", "custom_field", ValueType::Text},
    {"model", "beta", ValueType::Real},          {"model", "p", ValueType::Real},
    {"model", "q", ValueType::Real},             {"model", "r", ValueType::Real},
    {"model", "has_div_bound", ValueType::Bool},
    {"noise", "alpha", ValueType::Real},         {"noise", "diffusivity", ValueType::Real},
    {"noise", "measure", ValueType::Text},       {"noise", "atoms", ValueType::List},
    {"grid", "d", ValueType::Integer},           {"grid", "N", ValueType::Integer},
    {"grid", "L", ValueType::Real},
    {"initial", "kind", ValueType::Text},        {"initial", "mean", ValueType::List},
    {"initial", "sigma", ValueType::Real},       {"initial", "file", ValueType::Text},
    {"initial", "beta0", ValueType::Real},       {"initial", "p0", ValueType::Real},
    {"initial", "q0", ValueType::Real},
    {"solver", "t_start", ValueType::Real},      {"solver", "horizon", ValueType::Real},
    {"solver", "mesh", ValueType::Integer},      {"solver", "grading", ValueType::Real},
    {"solver", "picard_tol", ValueType::Real},   {"solver", "picard_max", ValueType::Integer},
    {"solver", "eta", ValueType::Real},          {"solver", "vartheta", ValueType::Real},
    {"solver", "blowup_threshold", ValueType::Real}, {"solver", "mass_tolerance", ValueType::Real},
    {"solver", "norm_nodes", ValueType::Integer}, {"solver", "max_refinements", ValueType::Integer},
    {"solver", "snapshots", ValueType::Integer}, {"solver", "kernel", ValueType::Text},
    {"particles", "n", ValueType::Integer},      {"particles", "dt", ValueType::Real},
    {"particles", "seed", ValueType::Integer},   {"particles", "bandwidth", ValueType::Real},
    {"particles", "snapshots", ValueType::Integer}, {"particles", "direct_max", ValueType::Integer},
    {"particles", "kernel", ValueType::Text},    {"particles", "pde_dir", ValueType::Text},
    {"output", "dir", ValueType::Text},
};
// clang-format on

constexpr const char* kSectionOrder[] = {"model", "noise", "grid", "initial", "solver", "particles", "output"};

bool known_section(const std::string& s) {
  return std::any_of(std::begin(kSectionOrder), std::end(kSectionOrder), [&](const char* n) { return s == n; });
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::Real: return "real";
    case ValueType::Integer: return "integer";
    case ValueType::Text: return "text";
    case ValueType::Bool: return "bool";
    case ValueType::List: return "list of reals";
  }
  return "?";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_real(const std::string& s, double& out) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "inf" || t == "+inf" || t == "infinity") {
    out = kInfinity;
    return true;
  }
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !std::isnan(out) && first != last;
}

bool parse_integer(const std::string& s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool type_matches(const ConfigValue& v, ValueType t) {
  switch (t) {
    case ValueType::Real: return std::holds_alternative<double>(v);
    case ValueType::Integer: return std::holds_alternative<std::int64_t>(v);
    case ValueType::Text: return std::holds_alternative<std::string>(v);
    case ValueType::Bool: return std::holds_alternative<bool>(v);
    case ValueType::List: return std::holds_alternative<std::vector<double>>(v);
  }
  return false;
}

ConfigValue parse_value(const std::string& raw, ValueType type, const std::string& section, const std::string& key,
                        int line) {
  auto mismatch = [&](const std::string& what) {
    return ConfigError(ConfigError::Kind::TypeMismatch, section, key, line,
                       "expected " + std::string(type_name(type)) + ", got '" + what + "'");
  };
  switch (type) {
    case ValueType::Real: {
      double v;
      if (!parse_real(raw, v)) throw mismatch(raw);
      return v;
    }
    case ValueType::Integer: {
      std::int64_t v;
      if (!parse_integer(raw, v)) throw mismatch(raw);
      return v;
    }
    case ValueType::Bool:
      if (raw == "true") return true;
      if (raw == "false") return false;
      throw mismatch(raw);
    case ValueType::Text:
      return raw;
    case ValueType::List: {
      std::vector<double> out;
      if (raw.empty()) return out;
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_real(trim(item), v)) throw mismatch(raw);
        out.push_back(v);
      }
      if (raw.back() == ',') throw mismatch(raw);
      return out;
    }
  }
  throw mismatch(raw);
}

std::string format_value(const ConfigValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_real(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* l = std::get_if<std::vector<double>>(&v)) {
    std::string out;
    for (std::size_t k = 0; k < l->size(); ++k) out += (k ? ", " : "") + format_real((*l)[k]);
    return out;
  }
  const auto& s = std::get<std::string>(v);
  const bool quote = s.empty() || s.find('#') != std::string::npos || s.find(';') != std::string::npos ||
                     s.front() == ' ' || s.back() == ' ' || s.front() == '"';
  return quote ? "\"" + s + "\"" : s;
}

ConfigError invalid(const std::string& section, const std::string& key, const std::string& reason) {
  return ConfigError(ConfigError::Kind::Invalid, section, key, 0, reason);
}

struct ModelDefaults {
  KernelKind kind;
  double beta;
  double p;
  bool div_bound;
};

ModelDefaults model_defaults(const std::string& kind, int d) {
  if (kind == "zero") return {KernelKind::Zero, 0.0, kInfinity, false};
  if (kind == "burgers") return {KernelKind::BurgersDirac, 0.0, 1.0, false};
  // b in L^{2-e} for every e > 0, so b in B^{-1}_{p,inf} with p = (4 - 2e)/e; e = 0.01
  if (kind == "vortex") return {KernelKind::BiotSavart2D, -1.0, 398.0, true};
  if (kind == "keller-segel") return {KernelKind::KellerSegel, -1.0, d > 1 ? d / (d - 1.0) : 1.0, true};
  if (kind == "custom") return {KernelKind::Custom, 0.0, kInfinity, false};
  throw invalid("model", "kind", "unknown model '" + kind + "' (zero, burgers, vortex, keller-segel, custom)");
}

template <class F>
void guarded(const std::string& section, const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw invalid(section, key, e.what());
  }
}

}  // namespace

ConfigError::ConfigError(Kind kind, std::string section, std::string key, int line, const std::string& reason)
    : ParameterError([&] {
        std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
        if (!section.empty()) where += "[" + section + "]" + (key.empty() ? "" : " " + key) + ": ";
        return where + reason;
      }()),
      kind(kind),
      section(std::move(section)),
      key(std::move(key)),
      line(line) {}

const char* to_string(ConfigError::Kind kind) {
  switch (kind) {
    case ConfigError::Kind::Parse: return "parse error";
    case ConfigError::Kind::UnknownKey: return "unknown key";
    case ConfigError::Kind::TypeMismatch: return "type mismatch";
    case ConfigError::Kind::UnresolvedReference: return "unresolved reference";
    case ConfigError::Kind::Invalid: return "invalid value";
  }
  return "?";
}

ValueType key_type(const std::string& section, const std::string& key) {
  for (const auto& decl : kSchema)
    if (section == decl.section && key == decl.key) return decl.type;
  if (!known_section(section))
    throw ConfigError(ConfigError::Kind::UnknownKey, section, "", 0, "unknown section");
  throw ConfigError(ConfigError::Kind::UnknownKey, section, key, 0, "unknown key");
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

double ExperimentConfig::real(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? std::get<double>(sections.at(section).at(key)) : fallback;
}

std::int64_t ExperimentConfig::integer(const std::string& section, const std::string& key,
                                       std::int64_t fallback) const {
  return has(section, key) ? std::get<std::int64_t>(sections.at(section).at(key)) : fallback;
}

std::string ExperimentConfig::text(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? std::get<std::string>(sections.at(section).at(key)) : fallback;
}

bool ExperimentConfig::flag(const std::string& section, const std::string& key, bool fallback) const {
  return has(section, key) ? std::get<bool>(sections.at(section).at(key)) : fallback;
}

std::vector<double> ExperimentConfig::list(const std::string& section, const std::string& key) const {
  return has(section, key) ? std::get<std::vector<double>>(sections.at(section).at(key)) : std::vector<double>{};
}

std::filesystem::path ExperimentConfig::path(const std::string& section, const std::string& key) const {
  std::filesystem::path p = text(section, key, "");
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void ExperimentConfig::set(const std::string& section, const std::string& key, ConfigValue value) {
  const ValueType t = key_type(section, key);
  if (!type_matches(value, t))
    throw ConfigError(ConfigError::Kind::TypeMismatch, section, key, 0, std::string("expected ") + type_name(t));
  if (const auto* s = std::get_if<std::string>(&value); s && (s->find('"') != std::string::npos ||
                                                             s->find('\n') != std::string::npos))
    throw invalid(section, key, "text values cannot contain quotes or newlines");
  sections[section][key] = std::move(value);
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == ';') {
      if (end == text.size()) break;
      continue;
    }
    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos || trim(line.substr(close + 1)).size() > 0)
        throw ConfigError(ConfigError::Kind::Parse, "", "", line_no, "malformed section header");
      section = trim(line.substr(1, close - 1));
      if (!known_section(section))
        throw ConfigError(ConfigError::Kind::UnknownKey, section, "", line_no, "unknown section");
      cfg.sections[section];
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::Parse, section, "", line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(ConfigError::Kind::Parse, section, "", line_no, "empty key");
    if (section.empty())
      throw ConfigError(ConfigError::Kind::Parse, "", key, line_no, "key outside of any section");
    std::string raw = trim(line.substr(eq + 1));
    if (!raw.empty() && raw[0] == '"') {
      const auto close = raw.find('"', 1);
      if (close == std::string::npos)
        throw ConfigError(ConfigError::Kind::Parse, section, key, line_no, "unterminated quote");
      const std::string rest = trim(raw.substr(close + 1));
      if (!rest.empty() && rest[0] != '#')
        throw ConfigError(ConfigError::Kind::Parse, section, key, line_no, "text after closing quote");
      raw = raw.substr(1, close - 1);
    } else {
      raw = trim(raw.substr(0, raw.find('#')));
    }
    ValueType type;
    try {
      type = key_type(section, key);
    } catch (const ConfigError& e) {
      throw ConfigError(e.kind, section, key, line_no, "unknown key");
    }
    if (cfg.has(section, key))
      throw ConfigError(ConfigError::Kind::Parse, section, key, line_no, "duplicate key");
    cfg.sections[section][key] = parse_value(raw, type, section, key, line_no);
    if (end == text.size()) break;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string serialize(const ExperimentConfig& config) {
  std::ostringstream os;
  bool first = true;
  for (const char* name : kSectionOrder) {
    auto it = config.sections.find(name);
    if (it == config.sections.end()) continue;
    if (!first) os << "\n";
    first = false;
    os << "[" << name << "]\n";
    for (const auto& decl : kSchema) {
      if (std::string(decl.section) != name) continue;
      auto kv = it->second.find(decl.key);
      if (kv != it->second.end()) os << decl.key << " = " << format_value(kv->second) << "\n";
    }
  }
  return os.str();
}

void validate(ExperimentConfig& cfg) {
  cfg.warnings.clear();
  if (!cfg.has("model", "kind")) throw invalid("model", "kind", "missing (zero, burgers, vortex, keller-segel, custom)");
  const std::string kind = cfg.text("model", "kind", "");

  const double alpha = cfg.real("noise", "alpha", 2.0);
  if (!(alpha > 1.0 && alpha <= 2.0)) throw invalid("noise", "alpha", "alpha must lie in (1, 2]");
  if (!(cfg.real("noise", "diffusivity", 0.5) > 0.0)) throw invalid("noise", "diffusivity", "must be > 0");

  GridSpec grid;
  guarded("grid", "", [&] { grid = grid_from(cfg); });
  const int d = grid.d;
  model_defaults(kind, d);
  if (kind == "burgers" && d != 1) throw invalid("model", "kind", "the burgers model needs grid d = 1");
  if (kind == "vortex" && d != 2) throw invalid("model", "kind", "the vortex model needs grid d = 2");
  if (kind == "keller-segel" && d < 2) throw invalid("model", "kind", "the keller-segel model needs grid d = 2 or 3");
  if (kind == "custom" && !cfg.has("model", "custom_field"))
    throw ConfigError(ConfigError::Kind::UnresolvedReference, "model", "custom_field", 0,
                      "a custom model needs a vector field file");
  if (cfg.has("model", "chi") && !(cfg.real("model", "chi", 1.0) > 0.0)) throw invalid("model", "chi", "must be > 0");
  if (cfg.has("model", "radius") && !(cfg.real("model", "radius", 2.0) > 0.0))
    throw invalid("model", "radius", "must be > 0");
  if (cfg.has("model", "radius") && (kind == "vortex" || kind == "keller-segel") &&
      !(cfg.real("model", "radius", 2.0) + 1.0 < grid.half_width))
    throw invalid("model", "radius", "cutoff support R + 1 must lie inside the box half-width L");
  if (cfg.real("model", "epsilon", 0.0) < 0.0) throw invalid("model", "epsilon", "must be >= 0");

  guarded("noise", "measure", [&] { noise_from(cfg); });
  guarded("model", "", [&] { indices_from(cfg); });

  const std::string init = cfg.text("initial", "kind", "gaussian");
  if (init != "gaussian" && init != "file") throw invalid("initial", "kind", "unknown initial law '" + init + "' (gaussian, file)");
  if (init == "file" && !cfg.has("initial", "file"))
    throw ConfigError(ConfigError::Kind::UnresolvedReference, "initial", "file", 0, "initial kind 'file' needs a file");
  if (init == "gaussian") {
    if (!(cfg.real("initial", "sigma", 1.0) > 0.0)) throw invalid("initial", "sigma", "must be > 0");
    const auto mean = cfg.list("initial", "mean");
    if (!mean.empty() && static_cast<int>(mean.size()) != d)
      throw invalid("initial", "mean", "needs one entry per dimension");
  }

  const double t0 = cfg.real("solver", "t_start", 0.0);
  if (!std::isfinite(t0)) throw invalid("solver", "t_start", "must be finite");
  const double horizon = cfg.real("solver", "horizon", 1.0);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw invalid("solver", "horizon", "must be > 0");
  if (cfg.integer("solver", "mesh", 64) < 8) throw invalid("solver", "mesh", "must be >= 8");
  if (!(cfg.real("solver", "grading", 1.0) >= 1.0)) throw invalid("solver", "grading", "must be >= 1");
  if (!(cfg.real("solver", "picard_tol", 1e-6) > 0.0)) throw invalid("solver", "picard_tol", "must be > 0");
  if (cfg.integer("solver", "picard_max", 60) < 1) throw invalid("solver", "picard_max", "must be >= 1");
  const double vt = cfg.real("solver", "vartheta", 0.9);
  if (!(vt > 0.0 && vt < 1.0)) throw invalid("solver", "vartheta", "must lie in (0, 1)");
  if (cfg.real("solver", "blowup_threshold", 0.0) < 0.0) throw invalid("solver", "blowup_threshold", "must be >= 0");
  if (!(cfg.real("solver", "mass_tolerance", 0.01) > 0.0)) throw invalid("solver", "mass_tolerance", "must be > 0");
  if (cfg.integer("solver", "norm_nodes", 64) < 8) throw invalid("solver", "norm_nodes", "must be >= 8");
  if (cfg.integer("solver", "max_refinements", 16) < 0) throw invalid("solver", "max_refinements", "must be >= 0");
  if (cfg.integer("solver", "snapshots", 4) < 1) throw invalid("solver", "snapshots", "must be >= 1");

  const std::string name = cfg.text("model", "name", "model");
  for (const char* sec : {"solver", "particles"})
    if (cfg.has(sec, "kernel") && cfg.text(sec, "kernel", "") != name)
      throw ConfigError(ConfigError::Kind::UnresolvedReference, sec, "kernel", 0,
                        "no model named '" + cfg.text(sec, "kernel", "") + "' (the model is '" + name + "')");

  if (cfg.sections.count("particles")) {
    guarded("particles", "", [&] {
      ParticleConfig pc;
      pc.n_particles = cfg.integer("particles", "n", 1000);
      pc.horizon = horizon;
      pc.dt = cfg.real("particles", "dt", horizon / 50.0);
      pc.kde_bandwidth = cfg.real("particles", "bandwidth", 0.0);
      pc.snapshots = static_cast<int>(cfg.integer("particles", "snapshots", 1));
      pc.mu0 = ScalarField(grid);
      pc.mu0.values.setConstant(1.0);
      pc.kernel.kind = KernelKind::Zero;
      pc.validate();
    });
    if (cfg.integer("particles", "seed", 1) < 0) throw invalid("particles", "seed", "must be >= 0");
    if (cfg.integer("particles", "direct_max", 10000) < 0) throw invalid("particles", "direct_max", "must be >= 0");
  }

  if (kind == "custom" && cfg.real("model", "beta", 0.0) == -1.0 && !cfg.flag("model", "has_div_bound", false))
    cfg.warnings.push_back(
        "[model] beta = -1 without has_div_bound = true: condition c2 unavailable (missing div(b) structure condition)");
}

GridSpec grid_from(const ExperimentConfig& cfg) {
  const std::int64_t d = cfg.integer("grid", "d", 1);
  const std::int64_t n = cfg.integer("grid", "N", 256);
  if (d < 1 || d > 3) throw invalid("grid", "d", "dimension must be 1, 2 or 3");
  if (n < 16 || n > (std::int64_t{1} << 26)) throw invalid("grid", "N", "N must be a power of two >= 16");
  GridSpec g(static_cast<int>(d), cfg.real("grid", "L", 8.0), static_cast<int>(n));
  g.validate();
  return g;
}

StableParams noise_from(const ExperimentConfig& cfg) {
  const double alpha = cfg.real("noise", "alpha", 2.0);
  const double c = cfg.real("noise", "diffusivity", 0.5);
  const std::string measure = cfg.text("noise", "measure", "isotropic");
  const int d = static_cast<int>(cfg.integer("grid", "d", 1));
  if (measure == "isotropic") return StableParams::isotropic(alpha, c);
  if (measure == "cylindrical") return StableParams::cylindrical(alpha, d, c);
  if (measure == "atoms") {
    const auto flat = cfg.list("noise", "atoms");
    if (flat.empty() || flat.size() % static_cast<std::size_t>(d + 1) != 0)
      throw invalid("noise", "atoms", "atoms are groups of d direction entries followed by a weight");
    std::vector<StableAtom> atoms;
    for (std::size_t k = 0; k < flat.size(); k += static_cast<std::size_t>(d + 1)) {
      StableAtom a;
      a.direction = Eigen::Map<const Eigen::VectorXd>(flat.data() + k, d);
      a.weight = flat[k + static_cast<std::size_t>(d)];
      atoms.push_back(std::move(a));
    }
    return StableParams::atoms(alpha, std::move(atoms), c);
  }
  throw invalid("noise", "measure", "unknown measure '" + measure + "' (isotropic, cylindrical, atoms)");
}

LebesgueBesovIndices indices_from(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("grid", "d", 1));
  const ModelDefaults def = model_defaults(cfg.text("model", "kind", ""), d);
  LebesgueBesovIndices idx;
  idx.d = d;
  idx.alpha = cfg.real("noise", "alpha", 2.0);
  idx.beta = cfg.real("model", "beta", def.beta);
  idx.p = cfg.real("model", "p", def.p);
  idx.q = cfg.real("model", "q", kInfinity);
  idx.r = cfg.real("model", "r", kInfinity);
  idx.has_div_bound = cfg.flag("model", "has_div_bound", def.div_bound);
  idx.beta0 = cfg.real("initial", "beta0", 0.0);
  idx.p0 = cfg.real("initial", "p0", 1.0);
  idx.q0 = cfg.real("initial", "q0", kInfinity);
  idx.eta = cfg.real("solver", "eta", 0.01);
  idx.validate();
  return idx;
}

KernelSpec kernel_from(const ExperimentConfig& cfg) {
  const GridSpec grid = grid_from(cfg);
  KernelSpec spec;
  spec.kind = model_defaults(cfg.text("model", "kind", ""), grid.d).kind;
  spec.radius = cfg.real("model", "radius", std::min(2.0, 0.5 * grid.half_width - 0.5));
  spec.chi = cfg.real("model", "chi", 1.0);
  spec.epsilon = cfg.real("model", "epsilon", 0.0);
  if (spec.kind == KernelKind::Custom) {
    VectorField f = read_vector_csv(cfg.path("model", "custom_field"));
    require_same_grid(f.grid, grid, "custom kernel field");
    spec.custom = std::move(f);
  }
  spec.validate();
  return spec;
}

ScalarField initial_from(const ExperimentConfig& cfg) {
  const GridSpec grid = grid_from(cfg);
  ScalarField mu;
  if (cfg.text("initial", "kind", "gaussian") == "file") {
    mu = read_scalar_csv(cfg.path("initial", "file"));
    require_same_grid(mu.grid, grid, "initial density");
    if (mu.values.minCoeff() < 0.0) throw invalid("initial", "file", "initial density must be non-negative");
  } else {
    const double sigma = cfg.real("initial", "sigma", 1.0);
    std::vector<double> mean = cfg.list("initial", "mean");
    mean.resize(static_cast<std::size_t>(grid.d), 0.0);
    const Eigen::ArrayXXd xs = grid.coordinates();
    Eigen::ArrayXd r2 = Eigen::ArrayXd::Zero(grid.size());
    for (int a = 0; a < grid.d; ++a) r2 += (xs.col(a) - mean[static_cast<std::size_t>(a)]).square();
    mu = ScalarField(grid, (-0.5 * r2 / (sigma * sigma)).exp());
  }
  const double mass = mu.integral();
  if (!(mass > 0.0)) throw invalid("initial", "", "initial density has no mass on the grid");
  mu.values /= mass;
  return mu;
}

SolverConfig solver_from(const ExperimentConfig& cfg) {
  SolverConfig s;
  s.t_start = cfg.real("solver", "t_start", 0.0);
  s.horizon_end = s.t_start + cfg.real("solver", "horizon", 1.0);
  s.mesh_intervals = static_cast<int>(cfg.integer("solver", "mesh", 64));
  s.grading = cfg.real("solver", "grading", 1.0);
  s.picard_tol = cfg.real("solver", "picard_tol", 1e-6);
  s.picard_max = static_cast<int>(cfg.integer("solver", "picard_max", 60));
  s.kernel = kernel_from(cfg);
  s.noise = noise_from(cfg);
  s.indices = indices_from(cfg);
  s.mu0 = initial_from(cfg);
  s.blowup_threshold = cfg.real("solver", "blowup_threshold", 0.0);
  s.mass_tolerance = cfg.real("solver", "mass_tolerance", 0.01);
  s.vartheta = cfg.real("solver", "vartheta", 0.9);
  s.norm_nodes = static_cast<int>(cfg.integer("solver", "norm_nodes", 64));
  s.max_refinements = static_cast<int>(cfg.integer("solver", "max_refinements", 16));
  return s;
}

ParticleConfig particles_from(const ExperimentConfig& cfg) {
  ParticleConfig p;
  const double horizon = cfg.real("solver", "horizon", 1.0);
  p.n_particles = cfg.integer("particles", "n", 1000);
  p.horizon = horizon;
  p.dt = cfg.real("particles", "dt", horizon / 50.0);
  p.kernel = kernel_from(cfg);
  p.noise = noise_from(cfg);
  p.mu0 = initial_from(cfg);
  p.seed = seed_from(cfg);
  p.kde_bandwidth = cfg.real("particles", "bandwidth", 0.0);
  p.snapshots = static_cast<int>(cfg.integer("particles", "snapshots", 1));
  p.direct_max = cfg.integer("particles", "direct_max", 10000);
  return p;
}

std::uint64_t seed_from(const ExperimentConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.integer("particles", "seed", 1));
}

}  // namespace mkv
