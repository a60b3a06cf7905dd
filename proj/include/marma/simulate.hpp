#pragma once

// Frequency-domain MARMA simulation: draw iid errors, transform, multiply by
// the transfer function, transform back.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "distributions.hpp"
#include "spectral.hpp"

namespace marma {

struct SimulateOptions {
  /// When > 0, simulate T + 2*pad points and keep the middle T, which
  /// removes most of the circular wrap-around.
  std::size_t pad = 0;
};

inline constexpr std::size_t kDefaultPad = 200;

struct Simulation {
  std::vector<double> eps;  ///< the errors that generated y (trimmed like y)
  std::vector<double> y;
};

/// Circular filtering of eps by psi: y = Re IDFT(DFT(eps) * psi).
[[nodiscard]] inline std::vector<double> apply_transfer(const ModelOrder& order, const ParamVector& theta,
                                                        std::span<const double> eps) {
  const FrequencyGrid grid(eps.size());
  const auto psi = transfer_function(order, theta, grid);
  auto d = dft(eps, grid);
  for (std::size_t j = 0; j < d.size(); ++j) d[j] *= psi[j];
  return inverse_dft(d, grid);
}

[[nodiscard]] inline Simulation simulate_marma_full(const ModelOrder& order, const ParamVector& theta,
                                                    const ErrorDistribution& dist, std::size_t T, std::uint64_t seed,
                                                    const SimulateOptions& opts = {}) {
  require_valid(order, theta);
  if (T < kMinSeriesLength) throw std::invalid_argument("T must be >= 8");
  const std::size_t n = T + 2 * opts.pad;
  auto eps = sample_errors(dist, n, seed);
  auto y = apply_transfer(order, theta, eps);
  if (opts.pad == 0) return {std::move(eps), std::move(y)};
  const auto first = static_cast<std::ptrdiff_t>(opts.pad);
  const auto last = static_cast<std::ptrdiff_t>(opts.pad + T);
  return {std::vector<double>(eps.begin() + first, eps.begin() + last),
          std::vector<double>(y.begin() + first, y.begin() + last)};
}

[[nodiscard]] inline std::vector<double> simulate_marma(const ModelOrder& order, const ParamVector& theta,
                                                        const ErrorDistribution& dist, std::size_t T,
                                                        std::uint64_t seed, const SimulateOptions& opts = {}) {
  return simulate_marma_full(order, theta, dist, T, seed, opts).y;
}

/// Non-circular two-sided convolution y_t = sum_j Psi_j eps_{t-j}, with eps
/// taken as zero outside the sample.
[[nodiscard]] inline std::vector<double> simulate_oracle_timedomain(const ModelOrder& order, const ParamVector& theta,
                                                                    std::span<const double> eps) {
  const auto psi = psi_weights(order, theta);
  const auto T = static_cast<std::ptrdiff_t>(eps.size());
  std::vector<double> y(eps.size(), 0.0);
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    double s = 0.0;
    for (std::ptrdiff_t j = psi.min_offset(); j <= psi.max_offset(); ++j) {
      const std::ptrdiff_t u = t - j;
      if (u < 0 || u >= T) continue;
      s += psi.at(j) * eps[static_cast<std::size_t>(u)];
    }
    y[static_cast<std::size_t>(t)] = s;
  }
  return y;
}

}  // namespace marma
