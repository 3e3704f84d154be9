#include "mkv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

namespace mkv {

GridSpec::GridSpec(int d, double half_width, int points) : d(d), half_width(half_width), points(points) {
  validate();
}

double GridSpec::cell_volume() const { return std::pow(spacing(), d); }

Eigen::Index GridSpec::size() const {
  Eigen::Index n = 1;
  for (int a = 0; a < d; ++a) n *= points;
  return n;
}

Eigen::ArrayXXd GridSpec::coordinates() const {
  const Eigen::Index n = size();
  Eigen::ArrayXXd xs(n, d);
  for (Eigen::Index idx = 0; idx < n; ++idx) {
    Eigen::Index rest = idx;
    for (int a = d - 1; a >= 0; --a) {
      xs(idx, a) = coordinate(static_cast<int>(rest % points));
      rest /= points;
    }
  }
  return xs;
}

void GridSpec::validate() const {
  if (d < 1 || d > 3) throw ParameterError("grid dimension must be 1, 2 or 3");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ParameterError("grid half-width L must be > 0");
  if (points < 16 || (points & (points - 1)) != 0)
    throw ParameterError("points per dimension N must be a power of two >= 16");
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) total *= points;
  if (total > kMaxNodes) throw ParameterError("grid exceeds the memory budget of 2^26 nodes");
}

bool GridSpec::operator==(const GridSpec& other) const {
  return d == other.d && points == other.points &&
         std::abs(half_width - other.half_width) <= 1e-12 * std::max(1.0, half_width);
}

ScalarField::ScalarField(const GridSpec& g, Eigen::ArrayXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw ParameterError("scalar field value count does not match grid");
}

VectorField::VectorField(const GridSpec& g, Eigen::ArrayXXd v) : grid(g), values(std::move(v)) {
  if (values.rows() != grid.size() || values.cols() != grid.d)
    throw ParameterError("vector field shape does not match grid");
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const std::string& what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": grid mismatch (d=" << a.d << ", L=" << a.half_width << ", N=" << a.points << " vs d=" << b.d
       << ", L=" << b.half_width << ", N=" << b.points << ")";
    throw ParameterError(os.str());
  }
}

double lebesgue_norm(const Eigen::ArrayXd& values, double ell, double cell_volume) {
  if (values.size() == 0) return 0.0;
  if (std::isinf(ell)) return values.abs().maxCoeff();
  if (ell == 1.0) return values.abs().sum() * cell_volume;
  if (ell == 2.0) return std::sqrt(values.square().sum() * cell_volume);
  const double peak = values.abs().maxCoeff();
  if (peak == 0.0) return 0.0;
  // scaled to avoid overflow for large ell
  return peak * std::pow((values.abs() / peak).pow(ell).sum() * cell_volume, 1.0 / ell);
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string header(int d, const char* value_prefix, int value_count) {
  std::string h;
  for (int a = 0; a < d; ++a) h += "x" + std::to_string(a + 1) + ",";
  for (int j = 0; j < value_count; ++j) {
    if (value_count == 1 && std::string(value_prefix) == "value")
      h += "value";
    else
      h += std::string(value_prefix) + std::to_string(j + 1);
    if (j + 1 < value_count) h += ",";
  }
  return h + "\n";
}

std::string rows(const GridSpec& grid, const Eigen::ArrayXXd& vals) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.size()) * 24 * (grid.d + vals.cols()));
  const Eigen::ArrayXXd xs = grid.coordinates();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.d; ++a) {
      append_number(out, xs(i, a));
      out += ',';
    }
    for (Eigen::Index j = 0; j < vals.cols(); ++j) {
      append_number(out, vals(i, j));
      out += (j + 1 < vals.cols()) ? ',' : '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
}

struct CsvTable {
  int coord_columns = 0;
  int value_columns = 0;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ParameterError(path.string() + ": empty CSV");
  CsvTable t;
  std::stringstream hs(line);
  std::string col;
  while (std::getline(hs, col, ',')) {
    while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) col.pop_back();
    if (!col.empty() && col[0] == 'x')
      ++t.coord_columns;
    else
      ++t.value_columns;
  }
  if (t.coord_columns < 1 || t.coord_columns > 3 || t.value_columns < 1)
    throw ParameterError(path.string() + ": header must be x1..xd followed by value columns");
  const int width = t.coord_columns + t.value_columns;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> r;
    r.reserve(width);
    const char* p = line.c_str();
    char* end = nullptr;
    for (int k = 0; k < width; ++k) {
      const double v = std::strtod(p, &end);
      if (end == p) throw ParameterError(path.string() + ": malformed number on line " + std::to_string(line_no));
      r.push_back(v);
      p = end;
      if (*p == ',') ++p;
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

GridSpec infer_grid(const CsvTable& t, const std::filesystem::path& path) {
  const int d = t.coord_columns;
  const double count = static_cast<double>(t.rows.size());
  const int n = static_cast<int>(std::lround(std::pow(count, 1.0 / d)));
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  if (total != static_cast<std::int64_t>(t.rows.size()))
    throw ParameterError(path.string() + ": row count is not N^d");
  const double lower = t.rows.front()[0];
  GridSpec g(d, -lower, n);
  return g;
}

}  // namespace

std::string to_csv(const ScalarField& field) {
  return header(field.grid.d, "value", 1) + rows(field.grid, field.values);
}

std::string to_csv(const VectorField& field) {
  return header(field.grid.d, "v", field.components()) + rows(field.grid, field.values);
}

void write_csv(const ScalarField& field, const std::filesystem::path& path) { write_text(path, to_csv(field)); }
void write_csv(const VectorField& field, const std::filesystem::path& path) { write_text(path, to_csv(field)); }

ScalarField read_scalar_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path);
  if (t.value_columns != 1) throw ParameterError(path.string() + ": expected one value column");
  const GridSpec g = infer_grid(t, path);
  Eigen::ArrayXd v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) v(i) = t.rows[static_cast<std::size_t>(i)].back();
  return ScalarField(g, std::move(v));
}

VectorField read_vector_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path);
  const GridSpec g = infer_grid(t, path);
  if (t.value_columns != g.d) throw ParameterError(path.string() + ": expected d value columns");
  Eigen::ArrayXXd v(g.size(), g.d);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.d; ++j) v(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(g.d + j)];
  return VectorField(g, std::move(v));
}

int thread_budget() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("MKV_THREADS");
  if (!env || !*env) return static_cast<int>(hw);
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) throw ParameterError("MKV_THREADS must be a non-negative integer");
  return v == 0 ? static_cast<int>(hw) : static_cast<int>(std::min<long>(v, 256));
}

}  // namespace mkv
