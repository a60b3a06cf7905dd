#pragma once

// Preliminary causal-invertible ARMA(p,q) fit by the concentrated Whittle
// criterion, and the BIC/AIC order search built on it.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "optimize.hpp"
#include "spectral.hpp"

namespace marma {

/// (2 pi / T) sum_{j=1}^{T-1} I_2(omega_j) / |psi(omega_j)|^2.
[[nodiscard]] inline double concentrated_k2(const SpectralData& spec, std::span<const cplx> psi) {
  const auto& I2 = spec.periodogram();
  double s = 0.0;
  for (std::size_t j = 1; j < spec.T(); ++j) s += I2[j] / std::norm(psi[j]);
  return kTwoPi / static_cast<double>(spec.T()) * s;
}

struct Preliminary {
  ModelOrder order;                ///< (p, 0, q, 0)
  ParamVector theta;               ///< causal-invertible Whittle estimate
  double kbar2 = 0.0;              ///< k2* at theta
  std::vector<cplx> psi_bar;       ///< transfer function at theta on the data grid
  bool converged = true;
  double bic = 0.0;
  double aic = 0.0;
};

namespace detail {

inline ModelOrder causal_order(std::size_t p, std::size_t q) { return {p, 0, q, 0}; }

}  // namespace detail

/// Minimizes k2*(theta) over causal-invertible ARMA(p,q) by Nelder-Mead from
/// a handful of fixed starts. p = q = 0 is allowed and gives the white-noise
/// fit (used by the order search).
[[nodiscard]] inline Preliminary whittle_prelim(const SpectralData& spec, std::size_t p, std::size_t q) {
  const ModelOrder order = detail::causal_order(p, q);
  const std::size_t dim = p + q;
  const double T = static_cast<double>(spec.T());
  auto k2_of = [&](std::span<const double> x) {
    const auto th = ParamVector::from_flat(order, x);
    if (!validate_params(order, th)) return kInfeasible;
    const auto psi = transfer_function_unchecked(th, spec.grid());
    return concentrated_k2(spec, psi);
  };

  Preliminary out;
  out.order = order;
  std::vector<double> best(dim, 0.0);
  double best_val = k2_of(best);
  if (dim > 0) {
    std::vector<std::vector<double>> starts;
    starts.emplace_back(dim, 0.0);
    starts.emplace_back(dim, 0.3);
    starts.emplace_back(dim, -0.3);
    if (p > 0) {
      std::vector<double> s(dim, 0.0);
      s[0] = 0.6;
      starts.push_back(s);
      s[0] = -0.6;
      starts.push_back(s);
    }
    if (q > 0) {
      std::vector<double> s(dim, 0.0);
      s[p] = 0.6;
      starts.push_back(s);
      s[p] = -0.6;
      starts.push_back(s);
    }
    NelderMeadOptions opt;
    opt.max_iterations = 200 * dim + 200;
    opt.initial_step = 0.1;
    out.converged = false;
    for (auto& s : starts) {
      if (!std::isfinite(k2_of(s))) continue;
      auto r = nelder_mead(k2_of, s, opt);
      if (r.value < best_val) {
        best_val = r.value;
        best = r.x;
      }
    }
    // Restart once from the winner so the simplex is not stuck on its
    // initial orientation.
    opt.initial_step = 0.02;
    auto r = nelder_mead(k2_of, best, opt);
    out.converged = r.iterations < opt.max_iterations;
    if (r.value < best_val) {
      best_val = r.value;
      best = r.x;
    }
  }
  if (!std::isfinite(best_val) || !(best_val > 0.0)) throw std::runtime_error("Whittle fit failed: degenerate periodogram");
  out.theta = ParamVector::from_flat(order, best);
  out.kbar2 = best_val;
  out.psi_bar = transfer_function_unchecked(out.theta, spec.grid());
  out.bic = T * std::log(best_val) + static_cast<double>(dim) * std::log(T);
  out.aic = T * std::log(best_val) + 2.0 * static_cast<double>(dim);
  return out;
}

struct OrderSelection {
  std::size_t p = 0;
  std::size_t q = 0;
  /// One entry per (p, q) with p <= pmax, q <= qmax, p-major.
  std::vector<Preliminary> fits;
  [[nodiscard]] const Preliminary& selected() const {
    for (const auto& f : fits)
      if (f.order.r == p && f.order.rp == q) return f;
    throw std::logic_error("selected order missing from the fit list");
  }
};

/// BIC over Whittle fits, (0,0) included. Ties go to the smaller model.
[[nodiscard]] inline OrderSelection select_order_bic(const SpectralData& spec, std::size_t pmax, std::size_t qmax) {
  OrderSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p <= pmax; ++p)
    for (std::size_t q = 0; q <= qmax; ++q) {
      sel.fits.push_back(whittle_prelim(spec, p, q));
      const double b = sel.fits.back().bic;
      if (b < best || (b == best && p + q < sel.p + sel.q)) {
        best = b;
        sel.p = p;
        sel.q = q;
      }
    }
  return sel;
}

}  // namespace marma
