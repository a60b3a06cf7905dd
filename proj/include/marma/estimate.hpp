#pragma once

/** @file
 * Estimation of a given MARMA order (GA search + simplex polish on R_T) and
 * the three-step identification procedure: normality gate, BIC order choice,
 * and a sweep over every root configuration of the chosen (p, q).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "asymptotic.hpp"
#include "core.hpp"
#include "diagnostics.hpp"
#include "objective.hpp"
#include "optimize.hpp"
#include "residuals.hpp"
#include "spectral.hpp"
#include "whittle.hpp"

namespace marma {

inline constexpr std::size_t kMinEstimationLength = 64;
inline constexpr double kHeavyTailKurtosis = 20.0;
inline constexpr double kNormalityLevel = 0.05;

struct EstimationResult {
  ModelOrder order;
  ParamVector theta_hat;
  double rt_value = kInfeasible;
  double k2_star = 0.0;
  double k3_star = 0.0;
  std::vector<double> stderrs;  ///< empty when undefined, see stderr_note
  std::string stderr_note;
  bool heavy_tail_warning = false;
  ParamVector prelim_theta;
  OptimizerTrace optimizer_trace;
  std::optional<DiagnosticsReport> residual_diag;
  bool feasible = false;
  std::string error;
};

namespace detail {

/// Roots of a factor grouped so that complex-conjugate pairs move together.
inline std::vector<std::vector<std::complex<double>>> root_groups(Factor f, std::span<const double> c) {
  auto roots = polynomial_roots(factor_polynomial(f, c));
  std::vector<std::vector<std::complex<double>>> groups;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (used[k]) continue;
    used[k] = true;
    const auto z = roots[k];
    if (std::abs(z.imag()) <= 1e-10 * std::abs(z)) {
      groups.push_back({std::complex<double>(z.real(), 0.0)});
      continue;
    }
    std::size_t mate = roots.size();
    double best = 1e300;
    for (std::size_t m = 0; m < roots.size(); ++m)
      if (!used[m] && std::abs(roots[m] - std::conj(z)) < best) {
        best = std::abs(roots[m] - std::conj(z));
        mate = m;
      }
    if (mate == roots.size()) {
      groups.push_back({z});
    } else {
      used[mate] = true;
      groups.push_back({z, std::conj(z)});
    }
  }
  return groups;
}

/// All ways of moving groups with total size `k` from one side to the other.
/// Each result is (coefficients kept on the causal side, coefficients moved).
inline std::vector<std::pair<std::vector<double>, std::vector<double>>> split_factor(Factor causal, Factor forward,
                                                                                     std::span<const double> c,
                                                                                     std::size_t k) {
  const auto groups = root_groups(causal, c);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  const std::size_t G = groups.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << G); ++mask) {
    std::vector<std::complex<double>> keep, move;
    for (std::size_t g = 0; g < G; ++g) {
      auto& dst = (mask >> g & 1) ? move : keep;
      dst.insert(dst.end(), groups[g].begin(), groups[g].end());
    }
    if (move.size() != k) continue;
    out.emplace_back(coefficients_from_polynomial(causal, polynomial_from_roots(keep)),
                     coefficients_from_polynomial(forward, polynomial_from_roots(move)));
  }
  return out;
}

}  // namespace detail

/// Parameter vectors of `target` that share the second-order properties of
/// the causal-invertible fit `causal` (same (p, q)), obtained by moving roots
/// across the unit circle. Empty when the orders are incompatible.
[[nodiscard]] inline std::vector<ParamVector> flip_images(const ParamVector& causal, const ModelOrder& target) {
  std::vector<ParamVector> out;
  if (causal.phi_plus.size() != target.p() || causal.theta_plus.size() != target.q() || !causal.phi_star.empty() ||
      !causal.theta_star.empty())
    return out;
  const auto ar = detail::split_factor(Factor::phi_plus, Factor::phi_star, causal.phi_plus, target.s);
  const auto ma = detail::split_factor(Factor::theta_plus, Factor::theta_star, causal.theta_plus, target.sp);
  for (const auto& [ap, as] : ar)
    for (const auto& [mp, ms] : ma) {
      ParamVector v{ap, as, mp, ms};
      if (validate_params(target, v)) out.push_back(std::move(v));
    }
  return out;
}

/// GA search over the admissible region of `order`.
[[nodiscard]] inline GAResult ga_minimize(const SpectralObjective& obj, const ModelOrder& order, const Preliminary& prelim,
                                          const EstimatorConfig& cfg) {
  if (obj.T() < kMinEstimationLength) throw std::invalid_argument("estimation needs T >= 64");
  const std::size_t dim = order.num_params();
  auto f = [&](std::span<const double> x) { return obj(order, x); };
  auto feasible = [&](std::span<const double> x) {
    return static_cast<bool>(validate_params(order, ParamVector::from_flat(order, x)));
  };
  std::vector<std::vector<double>> seeds;
  if (cfg.seed_from_prelim)
    for (const auto& v : flip_images(prelim.theta, order)) seeds.push_back(v.flat());
  return ga_minimize_generic(dim, f, feasible, cfg.ga, seeds, cfg.threads);
}

/// Simplex polish; never returns a point worse than `start`.
[[nodiscard]] inline NelderMeadResult gd_refine(const SpectralObjective& obj, const ModelOrder& order,
                                                const ParamVector& start) {
  if (!validate_params(order, start)) throw std::invalid_argument("refinement start is infeasible");
  auto f = [&](std::span<const double> x) { return obj(order, x); };
  NelderMeadOptions opt;
  opt.max_iterations = 300 * order.num_params();
  opt.initial_step = 0.02;
  return nelder_mead(f, start.flat(), opt);
}

/// Fills standard errors (and the heavy-tail flag) from the residuals at
/// theta_hat.
inline void attach_standard_errors(EstimationResult& r, const SpectralData& spec, const EstimatorConfig& cfg) {
  try {
    const auto res = extract_residuals(spec, r.order, r.theta_hat);
    const auto mom = sample_moments(res.values);
    r.heavy_tail_warning = mom.kurtosis > kHeavyTailKurtosis;
    const auto se = standard_errors(r.order, r.theta_hat, mom.skewness, mom.kurtosis - 3.0, spec.T(), cfg.m, cfg.n);
    r.stderrs = se.combined;
  } catch (const std::exception& e) {
    r.stderrs.clear();
    r.stderr_note = e.what();
  }
}

/// One candidate order against a shared objective (data + preliminary fit).
[[nodiscard]] inline EstimationResult estimate_candidate(const SpectralObjective& obj, const Preliminary& prelim,
                                                         const ModelOrder& order, const EstimatorConfig& cfg) {
  EstimationResult r;
  r.order = order;
  r.prelim_theta = prelim.theta;
  if (!order.estimable()) throw std::invalid_argument("order has no coefficients to estimate");
  if (order.p() != prelim.order.p() || order.q() != prelim.order.q())
    throw std::invalid_argument("preliminary fit has a different (p, q)");
  try {
    auto ga = ga_minimize(obj, order, prelim, cfg);
    r.optimizer_trace = ga.trace;
    std::vector<double> x = ga.x;
    double v = ga.value;
    if (cfg.refine && std::isfinite(v)) {
      auto nm = gd_refine(obj, order, ParamVector::from_flat(order, x));
      r.optimizer_trace.refine_iterations = nm.iterations;
      if (nm.value <= v) {
        x = nm.x;
        v = nm.value;
      }
    }
    r.theta_hat = ParamVector::from_flat(order, x);
    const auto val = obj.evaluate(order, r.theta_hat, true);
    r.rt_value = val.rt;
    r.k2_star = val.k2_star;
    r.k3_star = val.k3_star;
    r.feasible = std::isfinite(r.rt_value);
    if (!r.feasible) r.error = "optimizer: no feasible optimum";
  } catch (const std::exception& e) {
    r.feasible = false;
    r.error = std::string("optimizer: ") + e.what();
  }
  if (r.feasible && cfg.compute_stderr) attach_standard_errors(r, obj.spectral(), cfg);
  return r;
}

/// demean -> spectra -> Whittle(p, q) -> GA -> simplex -> cumulants -> s.e.
[[nodiscard]] inline EstimationResult estimate_model(std::span<const double> y, const ModelOrder& order,
                                                     const EstimatorConfig& cfg) {
  cfg.validate();
  if (y.size() < kMinEstimationLength) throw std::invalid_argument("estimation needs T >= 64");
  if (!order.estimable()) throw std::invalid_argument("order has no coefficients to estimate");
  const SpectralData spec(y);
  const auto prelim = whittle_prelim(spec, order.p(), order.q());
  const SpectralObjective obj(spec, prelim, cfg);
  return estimate_candidate(obj, prelim, order, cfg);
}

enum class Verdict { identified, gaussian_causal_only, no_dynamics, failed };

[[nodiscard]] inline const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::identified: return "identified";
    case Verdict::gaussian_causal_only: return "gaussian_causal_only";
    case Verdict::no_dynamics: return "no_dynamics";
    case Verdict::failed: return "identification_failed";
  }
  return "?";
}

struct OrderCriterion {
  std::size_t p = 0, q = 0;
  double bic = 0.0, aic = 0.0;
  double k2 = 0.0;
};

struct IdentificationReport {
  Verdict verdict = Verdict::failed;
  TestResult jarque_bera_y;
  TestResult jarque_bera_resid;  ///< on the pseudo-causal residuals; this one gates
  std::size_t p = 0, q = 0;
  std::vector<OrderCriterion> criteria;
  ParamVector pseudo_causal_theta;
  std::vector<EstimationResult> candidates;
  std::optional<std::size_t> winner;
  std::optional<DiagnosticsReport> winner_diag;
  std::vector<double> winner_residuals;
};

/// Index of the smallest finite rt_value (first one on ties).
[[nodiscard]] inline std::optional<std::size_t> argmin_candidate(std::span<const EstimationResult> c) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k].feasible && (!best || c[k].rt_value < c[*best].rt_value)) best = k;
  return best;
}

/// Estimates every root configuration of (p, q), candidate k with GA seed
/// derive_seed(cfg.ga.seed, k). Runs candidates in parallel when
/// cfg.threads != 1; the result does not depend on the thread count.
[[nodiscard]] inline std::vector<EstimationResult> estimate_family(const SpectralObjective& obj, const Preliminary& prelim,
                                                                   const EstimatorConfig& cfg) {
  const auto orders = enumerate_orders(prelim.order.p(), prelim.order.q());
  std::vector<EstimationResult> out(orders.size());
  EstimatorConfig inner = cfg;
  const unsigned outer = cfg.threads;
  inner.threads = 1;
  parallel_for(orders.size(), outer, [&](std::size_t k) {
    EstimatorConfig c = inner;
    c.ga.seed = derive_seed(cfg.ga.seed, k);
    out[k] = estimate_candidate(obj, prelim, orders[k], c);
  });
  return out;
}

[[nodiscard]] inline IdentificationReport identify(std::span<const double> y, std::size_t pmax, std::size_t qmax,
                                                   const EstimatorConfig& cfg, std::size_t diag_lags = 5) {
  cfg.validate();
  if (y.size() < kMinEstimationLength) throw std::invalid_argument("identification needs T >= 64");
  IdentificationReport rep;
  const SpectralData spec(y);
  rep.jarque_bera_y = jarque_bera(spec.series());

  const auto sel = select_order_bic(spec, pmax, qmax);
  for (const auto& f : sel.fits) rep.criteria.push_back({f.order.r, f.order.rp, f.bic, f.aic, f.kbar2});
  rep.p = sel.p;
  rep.q = sel.q;
  const auto& prelim = sel.selected();
  rep.pseudo_causal_theta = prelim.theta;
  const auto pseudo = extract_residuals(spec, prelim.order, prelim.theta);
  rep.jarque_bera_resid = jarque_bera(pseudo.values);

  if (rep.jarque_bera_resid.p >= kNormalityLevel) {
    rep.verdict = Verdict::gaussian_causal_only;
    return rep;
  }
  if (sel.p + sel.q == 0) {
    rep.verdict = Verdict::no_dynamics;
    return rep;
  }
  const SpectralObjective obj(spec, prelim, cfg);
  rep.candidates = estimate_family(obj, prelim, cfg);
  rep.winner = argmin_candidate(rep.candidates);
  if (!rep.winner) {
    rep.verdict = Verdict::failed;
    return rep;
  }
  rep.verdict = Verdict::identified;
  auto& w = rep.candidates[*rep.winner];
  const auto res = extract_residuals(spec, w.order, w.theta_hat);
  rep.winner_residuals = res.values;
  try {
    rep.winner_diag = diagnose(res.values, diag_lags);
    w.residual_diag = rep.winner_diag;
  } catch (const std::exception&) {
    // Degenerate residuals: report without diagnostics.
  }
  return rep;
}

}  // namespace marma
