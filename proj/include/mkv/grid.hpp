#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mkv {

/// Base of every error raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent input parameters.
struct ParameterError : Error {
  using Error::Error;
};

/// The grid cannot represent the requested object to tolerance.
struct ResolutionError : Error {
  ResolutionError(const std::string& what, int minimal_points)
      : Error(what), minimal_points(minimal_points) {}
  int minimal_points;
};

/// NaN/overflow or a broken invariant detected during a computation.
struct NumericalError : Error {
  using Error::Error;
};

/// Uniform periodic grid over [-L, L)^d with N points per axis.
///
/// Values are stored row-major: the last axis varies fastest, and the flat
/// index of the multi-index (i0, ..., i_{d-1}) is ((i0 * N) + i1) * N + ...
/// Node i on an axis sits at x = -L + i h with h = 2L / N, so index N/2 is
/// the origin.
struct GridSpec {
  int d = 1;
  double half_width = 1.0;
  int points = 16;

  /// Largest number of nodes a grid may hold (N^d).
  static constexpr std::int64_t kMaxNodes = std::int64_t{1} << 26;

  GridSpec() = default;
  GridSpec(int d, double half_width, int points);

  double spacing() const { return 2.0 * half_width / points; }
  double cell_volume() const;
  Eigen::Index size() const;
  double coordinate(int axis_index) const { return -half_width + axis_index * spacing(); }

  /// Node coordinates, one row per node (size() x d).
  Eigen::ArrayXXd coordinates() const;

  /// Throws ParameterError unless d in {1,2,3}, L > 0, N a power of two >= 16
  /// and N^d fits kMaxNodes.
  void validate() const;

  bool operator==(const GridSpec& other) const;
  bool operator!=(const GridSpec& other) const { return !(*this == other); }
};

struct ScalarField {
  GridSpec grid;
  Eigen::ArrayXd values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), values(Eigen::ArrayXd::Zero(g.size())) {}
  ScalarField(const GridSpec& g, Eigen::ArrayXd v);

  double integral() const { return values.sum() * grid.cell_volume(); }
  bool all_finite() const { return values.allFinite(); }
};

/// d-component field; column j holds component j.
struct VectorField {
  GridSpec grid;
  Eigen::ArrayXXd values;

  VectorField() = default;
  explicit VectorField(const GridSpec& g)
      : grid(g), values(Eigen::ArrayXXd::Zero(g.size(), g.d)) {}
  VectorField(const GridSpec& g, Eigen::ArrayXXd v);

  int components() const { return static_cast<int>(values.cols()); }
  ScalarField component(int j) const { return ScalarField(grid, values.col(j)); }
  bool all_finite() const { return values.allFinite(); }
};

/// Throws ParameterError naming `what` if the grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b, const std::string& what);

/// Discrete L^ell norm (ell may be +infinity) with the grid cell volume as weight.
double lebesgue_norm(const Eigen::ArrayXd& values, double ell, double cell_volume);

// CSV serialization. Header `x1,...,xd,value` for scalars and
// `x1,...,xd,v1,...,vd` for vectors, one row per node in storage order,
// 17 significant digits.
void write_csv(const ScalarField& field, const std::filesystem::path& path);
void write_csv(const VectorField& field, const std::filesystem::path& path);
std::string to_csv(const ScalarField& field);
std::string to_csv(const VectorField& field);
ScalarField read_scalar_csv(const std::filesystem::path& path);
VectorField read_vector_csv(const std::filesystem::path& path);

/// Worker threads allowed by MKV_THREADS (unset or 0: hardware concurrency).
int thread_budget();

}  // namespace mkv
