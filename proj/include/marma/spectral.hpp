#pragma once

/** @file
 * Fourier-grid primitives: DFT with the t = 1..T phase convention,
 * periodogram, biperiodogram, the transfer function of a MARMA filter and
 * the model spectrum/bispectrum built from it.
 */

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "fft.hpp"

namespace marma {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr std::size_t kMinSeriesLength = 8;
inline constexpr std::size_t kMaxMaterializedT = 1024;

/// Fourier frequencies omega_j = 2 pi j / T, j = 0..T-1, together with the
/// unit roots e^{-i omega_m} used for exact index-reduced evaluation.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::size_t T) : T_(T), omegas_(T), unit_(T) {
    if (T == 0) throw std::invalid_argument("grid length must be positive");
    for (std::size_t j = 0; j < T; ++j) omegas_[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(T);
    // Half the table by cos/sin, the rest by conjugation: unit_[T-m] == conj(unit_[m]).
    for (std::size_t m = 0; m <= T / 2; ++m) unit_[m] = cplx(std::cos(omegas_[m]), -std::sin(omegas_[m]));
    if (T % 2 == 0) unit_[T / 2] = cplx(-1.0, 0.0);
    for (std::size_t m = T / 2 + 1; m < T; ++m) unit_[m] = std::conj(unit_[T - m]);
  }

  [[nodiscard]] std::size_t size() const noexcept { return T_; }
  [[nodiscard]] std::size_t T() const noexcept { return T_; }
  [[nodiscard]] const std::vector<double>& omegas() const noexcept { return omegas_; }
  [[nodiscard]] double omega(std::size_t j) const noexcept { return omegas_[j]; }
  /// e^{-i 2 pi m / T} for any integer m (reduced mod T).
  [[nodiscard]] cplx unit(long long m) const noexcept {
    const long long n = static_cast<long long>(T_);
    long long r = m % n;
    if (r < 0) r += n;
    return unit_[static_cast<std::size_t>(r)];
  }
  [[nodiscard]] std::size_t wrap(long long m) const noexcept {
    const long long n = static_cast<long long>(T_);
    long long r = m % n;
    if (r < 0) r += n;
    return static_cast<std::size_t>(r);
  }

 private:
  std::size_t T_;
  std::vector<double> omegas_;
  std::vector<cplx> unit_;
};

// ---------------------------------------------------------------------------
// DFT

/// d_T(omega_j) = sum_{t=1}^T y_t e^{-i t omega_j}, j = 0..T-1.
[[nodiscard]] inline std::vector<cplx> dft(std::span<const double> y, const FrequencyGrid& grid) {
  const std::size_t T = y.size();
  if (T < kMinSeriesLength)
    throw std::invalid_argument("series too short for a DFT (T = " + std::to_string(T) + ", need >= 8)");
  if (grid.size() != T) throw std::invalid_argument("grid length does not match series length");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("series contains non-finite values");
  const auto half = fft::forward_half(y);
  std::vector<cplx> d(T);
  // The FFT indexes time from 0; the extra e^{-i omega_j} shifts it to t = 1.
  for (std::size_t j = 0; j <= T / 2; ++j) d[j] = grid.unit(static_cast<long long>(j)) * half[j];
  d[0] = cplx(d[0].real(), 0.0);
  if (T % 2 == 0) d[T / 2] = cplx(d[T / 2].real(), 0.0);
  for (std::size_t j = T / 2 + 1; j < T; ++j) d[j] = std::conj(d[T - j]);
  return d;
}

[[nodiscard]] inline std::vector<cplx> dft(std::span<const double> y) {
  return dft(y, FrequencyGrid(y.size()));
}

/// Inverse of dft: y_t = Re (1/T) sum_j d_j e^{i t omega_j}, t = 1..T.
/// Only d_0..d_{T/2} are read; the input is taken as Hermitian.
[[nodiscard]] inline std::vector<double> inverse_dft(std::span<const cplx> d, const FrequencyGrid& grid) {
  const std::size_t T = d.size();
  if (grid.size() != T) throw std::invalid_argument("grid length does not match spectrum length");
  std::vector<cplx> half(T / 2 + 1);
  for (std::size_t j = 0; j <= T / 2; ++j) half[j] = std::conj(grid.unit(static_cast<long long>(j))) * d[j];
  auto y = fft::backward_half(half, T);
  const double inv = 1.0 / static_cast<double>(T);
  for (double& v : y) v *= inv;
  return y;
}

/// I_2(omega_j) = |d_T(omega_j)|^2 / (2 pi T).
[[nodiscard]] inline std::vector<double> periodogram(std::span<const cplx> d, std::size_t T) {
  if (d.size() != T) throw std::invalid_argument("DFT length does not match T");
  std::vector<double> out(T);
  const double scale = 1.0 / (kTwoPi * static_cast<double>(T));
  for (std::size_t j = 0; j < T; ++j) out[j] = std::norm(d[j]) * scale;
  return out;
}

/// I_3(omega_j, omega_i) = d_j d_i conj(d_{j+i}) / ((2 pi)^2 T), indices mod T.
[[nodiscard]] inline cplx biperiodogram(std::span<const cplx> d, std::size_t T, std::size_t j, std::size_t i) {
  if (d.size() != T) throw std::invalid_argument("DFT length does not match T");
  if (j < 1 || j >= T || i < 1 || i >= T)
    throw std::out_of_range("bifrequency index out of range: need 1 <= j, i <= T-1");
  const double scale = 1.0 / (kTwoPi * kTwoPi * static_cast<double>(T));
  // Multiply in (min, max) order so that the result is symmetric bit for bit.
  const std::size_t a = std::min(j, i), b = std::max(j, i);
  return d[a] * d[b] * std::conj(d[(a + b) % T]) * scale;
}

// ---------------------------------------------------------------------------
// SpectralData

/// Per-series cache of the DFT, periodogram and (on demand) biperiodogram.
/// Immutable after construction apart from the lazily filled biperiodogram
/// matrix, which is built once under std::call_once.
class SpectralData {
 public:
  explicit SpectralData(std::span<const double> y, bool demean = true)
      : grid_(y.size()), demeaned_(demean), y_(y.begin(), y.end()) {
    if (y.size() < kMinSeriesLength)
      throw std::invalid_argument("series too short (T = " + std::to_string(y.size()) + ", need >= 8)");
    if (demean) {
      double mean = 0.0;
      for (double v : y_) mean += v;
      mean /= static_cast<double>(y_.size());
      for (double& v : y_) v -= mean;
    }
    dft_ = marma::dft(y_, grid_);
    periodogram_ = marma::periodogram(dft_, T());
    check_invariants();
  }

  [[nodiscard]] std::size_t T() const noexcept { return grid_.size(); }
  [[nodiscard]] const FrequencyGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] bool demeaned() const noexcept { return demeaned_; }
  /// The (possibly demeaned) series the transforms were computed from.
  [[nodiscard]] const std::vector<double>& series() const noexcept { return y_; }
  [[nodiscard]] const std::vector<cplx>& dft() const noexcept { return dft_; }
  [[nodiscard]] const std::vector<double>& periodogram() const noexcept { return periodogram_; }

  [[nodiscard]] cplx biperiodogram(std::size_t j, std::size_t i) const {
    if (const auto* m = bi_->ready.load(std::memory_order_acquire)) {
      if (j < 1 || j >= T() || i < 1 || i >= T()) throw std::out_of_range("bifrequency index out of range");
      return (*m)[tri_index(std::min(j, i), std::max(j, i))];
    }
    return marma::biperiodogram(dft_, T(), j, i);
  }

  /// Materializes all (T-1)^2 cells (upper triangle stored). Refused above
  /// T = 1024.
  void materialize_biperiodogram() const {
    if (T() > kMaxMaterializedT)
      throw std::length_error("biperiodogram materialization refused for T > 1024");
    std::call_once(bi_->once, [this] {
      auto m = std::make_unique<std::vector<cplx>>((T() - 1) * T() / 2);
      for (std::size_t j = 1; j < T(); ++j)
        for (std::size_t i = j; i < T(); ++i) (*m)[tri_index(j, i)] = marma::biperiodogram(dft_, T(), j, i);
      bi_->data = std::move(m);
      bi_->ready.store(bi_->data.get(), std::memory_order_release);
    });
  }

  [[nodiscard]] bool biperiodogram_materialized() const noexcept {
    return bi_->ready.load(std::memory_order_acquire) != nullptr;
  }

  /// Relative Parseval discrepancy |(2pi/T) sum I_2 - (1/T) sum y^2| / scale.
  [[nodiscard]] double parseval_error() const {
    double lhs = 0.0, rhs = 0.0;
    for (double v : periodogram_) lhs += v;
    lhs *= kTwoPi / static_cast<double>(T());
    for (double v : y_) rhs += v * v;
    rhs /= static_cast<double>(T());
    const double scale = std::max(rhs, std::numeric_limits<double>::min());
    return std::abs(lhs - rhs) / scale;
  }

 private:
  [[nodiscard]] std::size_t tri_index(std::size_t j, std::size_t i) const noexcept {
    // Row j (1-based) starts after rows 1..j-1 of lengths T-1, T-2, ...
    const std::size_t n = T() - 1;
    const std::size_t r = j - 1;
    return r * n - r * (r - 1) / 2 + (i - j);
  }

  void check_invariants() const {
    for (std::size_t j = 1; j < T(); ++j)
      if (dft_[T() - j] != std::conj(dft_[j])) throw std::logic_error("DFT lost conjugate symmetry");
    bool all_zero = true;
    for (double v : y_) all_zero = all_zero && v == 0.0;
    if (!all_zero && parseval_error() > 1e-8) throw std::logic_error("Parseval identity violated");
  }

  FrequencyGrid grid_;
  bool demeaned_;
  std::vector<double> y_;
  std::vector<cplx> dft_;
  std::vector<double> periodogram_;
  struct BiCache {
    std::once_flag once;
    std::unique_ptr<std::vector<cplx>> data;
    std::atomic<const std::vector<cplx>*> ready{nullptr};
  };
  // Shared between copies; the cached cells depend only on dft_.
  std::shared_ptr<BiCache> bi_ = std::make_shared<BiCache>();
};

// ---------------------------------------------------------------------------
// Transfer function and model spectra

namespace detail {

/// poly(e^{-i omega_j}) for the factor polynomial 1 + sign * sum c_k w^k,
/// with `conj_arg` evaluating at e^{+i omega_j} instead.
inline cplx eval_factor(const FrequencyGrid& grid, Factor f, std::span<const double> c, std::size_t j) {
  const double sign = is_ar(f) ? -1.0 : 1.0;
  const long long dir = is_forward(f) ? -1 : 1;
  cplx v = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    v += sign * c[k] * grid.unit(dir * static_cast<long long>(j) * static_cast<long long>(k + 1));
  return v;
}

}  // namespace detail

/// psi(omega) = theta+(e^{-i omega}) theta*(e^{i omega}) / (phi+(e^{-i omega}) phi*(e^{i omega}))
/// on the grid. Unchecked: caller guarantees validity.
[[nodiscard]] inline std::vector<cplx> transfer_function_unchecked(const ParamVector& theta,
                                                                   const FrequencyGrid& grid) {
  const std::size_t T = grid.size();
  std::vector<cplx> psi(T);
  for (std::size_t j = 0; j <= T / 2; ++j) {
    const cplx num = detail::eval_factor(grid, Factor::theta_plus, theta.theta_plus, j) *
                     detail::eval_factor(grid, Factor::theta_star, theta.theta_star, j);
    const cplx den = detail::eval_factor(grid, Factor::phi_plus, theta.phi_plus, j) *
                     detail::eval_factor(grid, Factor::phi_star, theta.phi_star, j);
    psi[j] = num / den;
  }
  psi[0] = cplx(psi[0].real(), 0.0);
  if (T % 2 == 0) psi[T / 2] = cplx(psi[T / 2].real(), 0.0);
  for (std::size_t j = T / 2 + 1; j < T; ++j) psi[j] = std::conj(psi[T - j]);
  return psi;
}

[[nodiscard]] inline std::vector<cplx> transfer_function(const ModelOrder& order, const ParamVector& theta,
                                                         const FrequencyGrid& grid) {
  require_valid(order, theta);
  return transfer_function_unchecked(theta, grid);
}

/// S_2(omega_j) = k2 / (2 pi) |psi(omega_j)|^2.
[[nodiscard]] inline std::vector<double> model_spectrum(const ModelOrder& order, const ParamVector& theta,
                                                        double k2, const FrequencyGrid& grid) {
  if (!(k2 > 0.0) || !std::isfinite(k2)) throw std::invalid_argument("innovation variance k2 must be > 0");
  const auto psi = transfer_function(order, theta, grid);
  std::vector<double> out(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) out[j] = k2 / kTwoPi * std::norm(psi[j]);
  return out;
}

/// psi_j psi_i conj(psi_{j+i}), indices mod T, multiplied in symmetric order.
[[nodiscard]] inline cplx triple_product(std::span<const cplx> psi, std::size_t j, std::size_t i) {
  const std::size_t T = psi.size();
  const std::size_t a = std::min(j, i), b = std::max(j, i);
  return psi[a] * psi[b] * std::conj(psi[(a + b) % T]);
}

/// S_3(omega_j, omega_i) = k3 / (4 pi^2) psi_j psi_i conj(psi_{j+i}).
[[nodiscard]] inline cplx model_bispectrum(const ModelOrder& order, const ParamVector& theta, double k3,
                                           const FrequencyGrid& grid, std::size_t j, std::size_t i) {
  if (!std::isfinite(k3)) throw std::invalid_argument("k3 must be finite");
  if (j >= grid.size() || i >= grid.size()) throw std::out_of_range("bifrequency index out of range");
  if (k3 == 0.0) return 0.0;
  const auto psi = transfer_function(order, theta, grid);
  return k3 / (kTwoPi * kTwoPi) * triple_product(psi, j, i);
}

// ---------------------------------------------------------------------------
// Time-domain sample cumulants (biased normalization)

/// (1/T) sum_t y_t y_{t-j}.
[[nodiscard]] inline double sample_cumulant2(std::span<const double> y, long long j) {
  const long long T = static_cast<long long>(y.size());
  if (4 * std::llabs(j) >= T) throw std::invalid_argument("lag too large: need |j| < T/4");
  const long long a = std::llabs(j);
  double s = 0.0;
  for (long long t = 0; t + a < T; ++t) s += y[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t + a)];
  return s / static_cast<double>(T);
}

/// (1/T) sum_t y_t y_{t-j} y_{t-l}. The three offsets are put in canonical
/// order first, so every permutation in the symmetry set gives the
/// identical floating-point result.
[[nodiscard]] inline double sample_cumulant3(std::span<const double> y, long long j, long long l) {
  const long long T = static_cast<long long>(y.size());
  if (4 * std::llabs(j) >= T || 4 * std::llabs(l) >= T) throw std::invalid_argument("lag too large: need |j|, |l| < T/4");
  std::array<long long, 3> off{0, -j, -l};
  std::sort(off.begin(), off.end());
  const long long b = off[1] - off[0], c = off[2] - off[0];
  double s = 0.0;
  for (long long t = 0; t + c < T; ++t) {
    const auto u = static_cast<std::size_t>(t);
    s += y[u] * y[u + static_cast<std::size_t>(b)] * y[u + static_cast<std::size_t>(c)];
  }
  return s / static_cast<double>(T);
}

}  // namespace marma
