#pragma once

// Shared fixtures for the test binaries: seeded random models and series.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <marma/marma.hpp>

namespace support {

using marma::Factor;
using marma::ModelOrder;
using marma::ParamVector;

/// One order per structural case: pure AR/MA on either side, mixed, full.
inline const std::vector<ModelOrder>& special_case_orders() {
  static const std::vector<ModelOrder> v = {
      {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 1, 0, 0},
      {0, 0, 1, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}, {1, 1, 1, 1}, {2, 0, 1, 0},
      {0, 2, 0, 1}, {2, 1, 0, 0}};
  return v;
}

/// Coefficients of a factor whose roots are drawn with modulus in [1.3, 3];
/// degree-2 factors get a complex pair half of the time.
inline std::vector<double> random_factor(Factor f, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mod(1.3, 3.0), ang(0.2, 2.9), coin(0.0, 1.0);
  std::vector<std::complex<double>> roots;
  while (roots.size() < n) {
    if (n - roots.size() >= 2 && coin(rng) < 0.5) {
      const auto z = std::polar(mod(rng), ang(rng));
      roots.push_back(z);
      roots.push_back(std::conj(z));
    } else {
      roots.emplace_back(coin(rng) < 0.5 ? -mod(rng) : mod(rng), 0.0);
    }
  }
  return marma::coefficients_from_polynomial(f, marma::polynomial_from_roots(roots));
}

inline ParamVector random_params(const ModelOrder& o, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (;;) {
    ParamVector p;
    for (Factor f : marma::kAllFactors) p.factor(f) = random_factor(f, marma::order_of(o, f), rng);
    if (marma::validate_params(o, p)) return p;
  }
}

inline std::vector<double> gaussian_series(std::size_t T, std::uint64_t seed, double sigma = 1.0) {
  return marma::sample_errors(marma::Gaussian{sigma}, T, seed);
}

/// Exponential(1) minus 1: mean 0, variance 1, third cumulant 2.
inline std::vector<double> centered_exponential(std::size_t T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> out(T);
  for (auto& v : out) v = e(rng) - 1.0;
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace support
