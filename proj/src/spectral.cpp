#include "mkv/spectral.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace mkv {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Spectral::Plans {
  double* real = nullptr;
  fftw_complex* complex = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    if (real) fftw_free(real);
    if (complex) fftw_free(complex);
  }
};

Spectral::Spectral(const GridSpec& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  grid_.validate();
  const int n = grid_.points;
  const int d = grid_.d;
  const int half = n / 2 + 1;
  spectral_size_ = half;
  for (int a = 0; a + 1 < d; ++a) spectral_size_ *= n;

  const double base = std::numbers::pi / grid_.half_width;
  xi_.assign(static_cast<std::size_t>(d), Eigen::ArrayXd(spectral_size_));
  dxi_.assign(static_cast<std::size_t>(d), Eigen::ArrayXd(spectral_size_));
  xi2_ = Eigen::ArrayXd::Zero(spectral_size_);
  phase_.resize(spectral_size_);
  for (Eigen::Index idx = 0; idx < spectral_size_; ++idx) {
    Eigen::Index rest = idx;
    int parity = 0;
    bool on_shell = false;
    for (int a = d - 1; a >= 0; --a) {
      const int extent = (a == d - 1) ? half : n;
      const int k = static_cast<int>(rest % extent);
      rest /= extent;
      const int signed_k = (k <= n / 2) ? k : k - n;
      const bool nyq = (k == n / 2);
      const double xi = base * signed_k;
      xi_[static_cast<std::size_t>(a)](idx) = xi;
      dxi_[static_cast<std::size_t>(a)](idx) = nyq ? 0.0 : xi;
      xi2_(idx) += xi * xi;
      parity += k;
      on_shell = on_shell || nyq;
    }
    phase_(idx) = (parity % 2 == 0) ? 1.0 : -1.0;
    if (on_shell) shell_.push_back(idx);
  }

  std::vector<int> dims(static_cast<std::size_t>(d), n);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->real = fftw_alloc_real(static_cast<std::size_t>(grid_.size()));
  plans_->complex = fftw_alloc_complex(static_cast<std::size_t>(spectral_size_));
  plans_->r2c = fftw_plan_dft_r2c(d, dims.data(), plans_->real, plans_->complex, FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r(d, dims.data(), plans_->complex, plans_->real, FFTW_ESTIMATE);
}

Spectral::~Spectral() = default;

double Spectral::nyquist() const { return std::numbers::pi * grid_.points / (2.0 * grid_.half_width); }

Eigen::ArrayXcd Spectral::forward(const Eigen::ArrayXd& values) const {
  Eigen::Map<Eigen::ArrayXd>(plans_->real, grid_.size()) = values;
  fftw_execute(plans_->r2c);
  auto* c = reinterpret_cast<std::complex<double>*>(plans_->complex);
  Eigen::ArrayXcd out = Eigen::Map<Eigen::ArrayXcd>(c, spectral_size_);
  out *= (phase_ * grid_.cell_volume()).cast<std::complex<double>>();
  return out;
}

Eigen::ArrayXd Spectral::inverse(const Eigen::ArrayXcd& coeffs) const {
  auto* c = reinterpret_cast<std::complex<double>*>(plans_->complex);
  const double scale = 1.0 / std::pow(2.0 * grid_.half_width, grid_.d);
  Eigen::Map<Eigen::ArrayXcd>(c, spectral_size_) = coeffs * (phase_ * scale).cast<std::complex<double>>();
  fftw_execute(plans_->c2r);
  return Eigen::Map<Eigen::ArrayXd>(plans_->real, grid_.size());
}

const Spectral& spectral_for(const GridSpec& grid) {
  thread_local std::map<std::tuple<int, int, double>, std::unique_ptr<Spectral>> cache;
  const auto key = std::make_tuple(grid.d, grid.points, grid.half_width);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Spectral>(grid)).first;
  return *it->second;
}

Eigen::ArrayXd convolve(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "convolve");
  const Spectral& sp = spectral_for(f.grid);
  return sp.inverse(sp.forward(f.values) * sp.forward(g.values));
}

}  // namespace mkv
