#pragma once

/** @file
 * The estimation function R_T: a weighted distance between the periodogram
 * and the model spectrum plus one between the biperiodogram and the model
 * bispectrum, with the innovation cumulants concentrated out.
 *
 * Everything that depends only on the data and the preliminary fit (I_2,
 * the bifrequency cells, their weights) is computed once in
 * SpectralObjective; an evaluation then costs one transfer-function pass and
 * one sweep over the cells.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "optimize.hpp"
#include "spectral.hpp"
#include "whittle.hpp"

namespace marma {

struct EstimatorConfig {
  double m = 0.5;  ///< weight of the second-order term
  double n = 0.5;  ///< weight of the third-order term
  std::size_t grid_stride = 1;
  GAConfig ga;
  bool refine = true;
  /// Inject the root-flipped images of the preliminary fit into the GA's
  /// initial population.
  bool seed_from_prelim = true;
  bool compute_stderr = true;
  unsigned threads = 1;

  void validate() const {
    if (!(m >= 0.0) || !(n >= 0.0) || !(m + n > 0.0)) throw std::invalid_argument("weights need m, n >= 0 and m + n > 0");
    if (grid_stride < 1) throw std::invalid_argument("grid_stride must be >= 1");
    ga.validate();
  }
};

struct PluginCumulants {
  double k2_star = 0.0;
  double k3_star = 0.0;
};

struct ObjectiveValue {
  double rt = kInfeasible;
  double k2_star = 0.0;
  double k3_star = 0.0;
};

class SpectralObjective {
 public:
  SpectralObjective(const SpectralData& spec, const Preliminary& prelim, const EstimatorConfig& cfg)
      : spec_(&spec), m_(cfg.m), n_(cfg.n), stride_(cfg.grid_stride) {
    cfg.validate();
    const std::size_t T = spec.T();
    if (prelim.psi_bar.size() != T) throw std::invalid_argument("preliminary fit belongs to a different grid");
    if (!(prelim.kbar2 > 0.0)) throw std::invalid_argument("preliminary variance must be > 0");
    const double Td = static_cast<double>(T);
    const double kb = prelim.kbar2;
    a2_ = m_ * kTwoPi * kTwoPi / (4.0 * kb * kb * Td);
    a3_ = n_ * std::pow(kTwoPi, 4) / (6.0 * kb * kb * kb * Td * Td);

    const auto& I2 = spec.periodogram();
    i2_.assign(I2.begin(), I2.end());
    inv_bar2_.resize(T);
    for (std::size_t j = 0; j < T; ++j) inv_bar2_[j] = 1.0 / std::norm(prelim.psi_bar[j]);
    build_cells(prelim.psi_bar);
  }

  [[nodiscard]] std::size_t T() const noexcept { return spec_->T(); }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size(); }
  [[nodiscard]] const SpectralData& spectral() const noexcept { return *spec_; }

  /// R_T and the plug-in cumulants for a transfer function on the grid.
  [[nodiscard]] ObjectiveValue evaluate_psi(std::span<const cplx> psi, bool need_k3 = false) const {
    const std::size_t T = this->T();
    ObjectiveValue out;
    double s_k2 = 0.0;
    for (std::size_t j = 1; j < T; ++j) s_k2 += i2_[j] / std::norm(psi[j]);
    out.k2_star = kTwoPi / static_cast<double>(T) * s_k2;
    double second = 0.0;
    const double c2 = out.k2_star / kTwoPi;
    for (std::size_t j = 1; j < T; ++j) {
      const double r = (i2_[j] - c2 * std::norm(psi[j])) * inv_bar2_[j];
      second += r * r;
    }
    double third = 0.0;
    if (n_ > 0.0 || need_k3) {
      double sk3 = 0.0, B = 0.0, C = 0.0;
      for (const auto& c : cells_) {
        const cplx P = psi[c.a] * psi[c.b] * std::conj(psi[c.c]);
        const double re = c.i3.real() * P.real() + c.i3.imag() * P.imag();
        const double p2 = std::norm(P);
        sk3 += c.mult * re / p2;
        B += c.wm * re;
        C += c.wm * p2;
      }
      const double s2 = static_cast<double>(stride_ * stride_);
      const double Td = static_cast<double>(T);
      out.k3_star = kTwoPi * kTwoPi / (Td * Td) * s2 * sk3;
      const double k = out.k3_star / (kTwoPi * kTwoPi);
      third = s2 * std::max(0.0, D_ - 2.0 * k * B + k * k * C);
    }
    out.rt = a2_ * second + (n_ > 0.0 ? a3_ * third : 0.0);
    return out;
  }

  /// +inf for parameters outside the admissible region.
  [[nodiscard]] ObjectiveValue evaluate(const ModelOrder& order, const ParamVector& theta, bool need_k3 = false) const {
    if (!validate_params(order, theta)) return {};
    const auto psi = transfer_function_unchecked(theta, spec_->grid());
    return evaluate_psi(psi, need_k3);
  }

  [[nodiscard]] double operator()(const ModelOrder& order, std::span<const double> x) const {
    return evaluate(order, ParamVector::from_flat(order, x)).rt;
  }

 private:
  struct Cell {
    std::uint32_t a, b, c;  // j, i, (j + i) mod T
    double mult;            // orbit size under the symmetries used
    double wm;              // mult / |psi_bar_a psi_bar_b psi_bar_c|^2
    cplx i3;
  };

  /// Keeps one representative per orbit of {swap (j,i), reflect (T-j,T-i)}
  /// on the (strided) index lattice. Every summand is invariant under both:
  /// swap trivially, reflection because it conjugates I_3 and the triple
  /// product together.
  void build_cells(std::span<const cplx> psi_bar) {
    const std::size_t T = this->T();
    std::vector<char> on_lattice(T, 0);
    for (std::size_t j = 1; j < T; j += stride_) on_lattice[j] = 1;
    bool reflect = true;
    for (std::size_t j = 1; j < T; ++j)
      if (on_lattice[j] != on_lattice[T - j]) reflect = false;
    const auto& d = spec_->dft();
    const double scale = 1.0 / (kTwoPi * kTwoPi * static_cast<double>(T));
    D_ = 0.0;
    for (std::size_t j = 1; j < T; j += stride_) {
      for (std::size_t i = j; i < T; i += stride_) {
        std::size_t mult = i == j ? 1 : 2;
        if (reflect) {
          // Reflected pair, normalized so that first <= second.
          const std::size_t rj = T - i, ri = T - j;
          if (rj < j || (rj == j && ri < i)) continue;
          if (!(rj == j && ri == i)) mult *= 2;
        }
        const std::size_t c = (j + i) % T;
        const cplx i3 = d[j] * d[i] * std::conj(d[c]) * scale;
        const double w = 1.0 / (std::norm(psi_bar[j]) * std::norm(psi_bar[i]) * std::norm(psi_bar[c]));
        const double m = static_cast<double>(mult);
        cells_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(c), m,
                          m * w, i3});
        D_ += m * w * std::norm(i3);
      }
    }
  }

  const SpectralData* spec_;
  double m_, n_;
  std::size_t stride_;
  double a2_ = 0.0, a3_ = 0.0;
  double D_ = 0.0;
  std::vector<double> i2_;
  std::vector<double> inv_bar2_;
  std::vector<Cell> cells_;
};

/// k2* and k3* at theta over the full grid (stride from cfg).
[[nodiscard]] inline PluginCumulants plugin_cumulants(const SpectralData& spec, const ModelOrder& order,
                                                      const ParamVector& theta, std::size_t stride = 1) {
  require_valid(order, theta);
  const auto psi = transfer_function_unchecked(theta, spec.grid());
  for (std::size_t j = 0; j < psi.size(); ++j)
    if (std::abs(psi[j]) < 1e-8) throw std::domain_error("transfer function vanishes on the grid");
  const std::size_t T = spec.T();
  double s2 = 0.0;
  for (std::size_t j = 1; j < T; ++j) s2 += spec.periodogram()[j] / std::norm(psi[j]);
  double s3 = 0.0;
  const auto& d = spec.dft();
  const double scale = 1.0 / (kTwoPi * kTwoPi * static_cast<double>(T));
  for (std::size_t j = 1; j < T; j += stride)
    for (std::size_t i = 1; i < T; i += stride) {
      const std::size_t c = (j + i) % T;
      const cplx i3 = d[std::min(j, i)] * d[std::max(j, i)] * std::conj(d[c]) * scale;
      const cplx P = triple_product(psi, j, i);
      s3 += (i3 / P).real();
    }
  const double Td = static_cast<double>(T);
  return {kTwoPi / Td * s2, kTwoPi * kTwoPi / (Td * Td) * static_cast<double>(stride * stride) * s3};
}

/// R_T(theta); +inf for inadmissible theta.
[[nodiscard]] inline double objective_rt(const SpectralData& spec, const ModelOrder& order, const ParamVector& theta,
                                         const Preliminary& prelim, const EstimatorConfig& cfg) {
  return SpectralObjective(spec, prelim, cfg).evaluate(order, theta).rt;
}

}  // namespace marma
