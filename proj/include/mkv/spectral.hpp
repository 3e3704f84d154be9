#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "mkv/grid.hpp"

namespace mkv {

/// Continuous-Fourier-transform view of a periodic grid.
///
/// forward() returns f^(xi_k) = h^d sum_j f(x_j) exp(-i xi_k . x_j) on the
/// half-spectrum of a real transform (last axis 0..N/2), so that
/// convolution on the torus is a pointwise product of spectra and
/// inverse(forward(f)) == f. Wavenumbers are xi = pi k / L.
class Spectral {
 public:
  explicit Spectral(const GridSpec& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const GridSpec& grid() const { return grid_; }
  Eigen::Index spectral_size() const { return spectral_size_; }

  Eigen::ArrayXcd forward(const Eigen::ArrayXd& values) const;
  Eigen::ArrayXd inverse(const Eigen::ArrayXcd& coeffs) const;

  /// Wavenumber component along `axis` for every spectral index.
  const Eigen::ArrayXd& wavenumber(int axis) const { return xi_[static_cast<std::size_t>(axis)]; }
  /// Same, with the Nyquist mode zeroed: the multiplier used for odd derivatives.
  const Eigen::ArrayXd& derivative_wavenumber(int axis) const { return dxi_[static_cast<std::size_t>(axis)]; }
  /// |xi|^2 per spectral index.
  const Eigen::ArrayXd& wavenumber_norm2() const { return xi2_; }
  /// Largest wavenumber magnitude along an axis (pi N / 2L).
  double nyquist() const;
  /// Spectral indices that lie on the Nyquist shell of any axis.
  const std::vector<Eigen::Index>& nyquist_shell() const { return shell_; }

 private:
  struct Plans;
  GridSpec grid_;
  Eigen::Index spectral_size_ = 0;
  std::vector<Eigen::ArrayXd> xi_;
  std::vector<Eigen::ArrayXd> dxi_;
  Eigen::ArrayXd xi2_;
  Eigen::ArrayXd phase_;
  std::vector<Eigen::Index> shell_;
  std::unique_ptr<Plans> plans_;
};

/// Per-thread cached transform object for a grid.
const Spectral& spectral_for(const GridSpec& grid);

/// Convolution on the torus via spectra.
Eigen::ArrayXd convolve(const ScalarField& f, const ScalarField& g);

}  // namespace mkv
