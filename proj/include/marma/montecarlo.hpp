#pragma once

// Monte Carlo harness: simulate a DGP M times, estimate every root
// configuration of its (p, q) family, and tabulate how often the global
// minimum picks the true configuration.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "distributions.hpp"
#include "estimate.hpp"
#include "simulate.hpp"

namespace marma {

struct McCell {
  ModelOrder dgp_order;
  ParamVector dgp_theta;
  ErrorDistribution dist = AlphaStable{1.2, 0.25, 1.0, 0.0};
  std::size_t T = 300;
  std::size_t M = 200;
  std::uint64_t master_seed = 1;
  std::string label;

  void validate() const {
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    if (T < kMinEstimationLength) throw std::invalid_argument("T must be >= 64");
    require_valid(dgp_order, dgp_theta);
    if (!dgp_order.estimable()) throw std::invalid_argument("DGP has no coefficients");
    validate_distribution(dist);
  }
};

struct ReplicationOutcome {
  bool failed = false;
  bool identified = false;
  ModelOrder selected;
  std::vector<double> theta_hat;  ///< flat, winner's
};

struct McResult {
  McCell cell;
  double identification_rate = 0.0;
  std::size_t identified = 0;
  std::size_t misidentified = 0;
  std::size_t failures = 0;
  /// Over correctly identified replications, flat parameter order.
  std::vector<double> mean;
  std::vector<double> stddev;
  /// How often each candidate won.
  std::vector<std::pair<ModelOrder, std::size_t>> selections;
  bool gaussian_flag = false;  ///< identification not expected
  double wall_time = 0.0;
  std::vector<ReplicationOutcome> replications;
};

[[nodiscard]] inline ReplicationOutcome run_replication(const McCell& cell, const EstimatorConfig& cfg, std::size_t rep) {
  ReplicationOutcome out;
  const std::uint64_t seed = derive_seed(cell.master_seed, rep);
  try {
    const auto y = simulate_marma(cell.dgp_order, cell.dgp_theta, cell.dist, cell.T, derive_seed(seed, 0));
    const SpectralData spec(y);
    const auto prelim = whittle_prelim(spec, cell.dgp_order.p(), cell.dgp_order.q());
    const SpectralObjective obj(spec, prelim, cfg);
    EstimatorConfig c = cfg;
    c.ga.seed = derive_seed(seed, 1);
    c.threads = 1;
    c.compute_stderr = false;
    const auto cands = estimate_family(obj, prelim, c);
    const auto w = argmin_candidate(cands);
    if (!w) {
      out.failed = true;
      return out;
    }
    out.selected = cands[*w].order;
    out.identified = out.selected == cell.dgp_order;
    out.theta_hat = cands[*w].theta_hat.flat();
  } catch (const std::exception&) {
    out.failed = true;
  }
  return out;
}

/// Replications run in parallel over cfg.threads; aggregation is in
/// replication order, so the result does not depend on the thread count.
[[nodiscard]] inline McResult run_cell(const McCell& cell, const EstimatorConfig& cfg) {
  cell.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  McResult r;
  r.cell = cell;
  r.gaussian_flag = is_gaussian(cell.dist);
  r.replications.resize(cell.M);
  parallel_for(cell.M, cfg.threads, [&](std::size_t k) { r.replications[k] = run_replication(cell, cfg, k); });

  const std::size_t d = cell.dgp_order.num_params();
  std::vector<double> sum(d, 0.0), sum2(d, 0.0);
  std::map<ModelOrder, std::size_t> counts;
  for (const auto& o : r.replications) {
    if (o.failed) {
      ++r.failures;
      continue;
    }
    ++counts[o.selected];
    if (!o.identified) {
      ++r.misidentified;
      continue;
    }
    ++r.identified;
    for (std::size_t k = 0; k < d; ++k) sum[k] += o.theta_hat[k];
  }
  r.identification_rate = static_cast<double>(r.identified) / static_cast<double>(cell.M);
  r.mean.assign(d, std::nan(""));
  r.stddev.assign(d, std::nan(""));
  if (r.identified > 0) {
    const double n = static_cast<double>(r.identified);
    for (std::size_t k = 0; k < d; ++k) r.mean[k] = sum[k] / n;
    for (const auto& o : r.replications)
      if (!o.failed && o.identified)
        for (std::size_t k = 0; k < d; ++k) sum2[k] += (o.theta_hat[k] - r.mean[k]) * (o.theta_hat[k] - r.mean[k]);
    if (r.identified > 1)
      for (std::size_t k = 0; k < d; ++k) r.stddev[k] = std::sqrt(sum2[k] / (n - 1.0));
  }
  for (const auto& o : enumerate_orders(cell.dgp_order.p(), cell.dgp_order.q()))
    r.selections.emplace_back(o, counts.count(o) ? counts[o] : 0);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Cells run one after another, each using the configured parallelism.
[[nodiscard]] inline std::vector<McResult> run_suite(std::span<const McCell> cells, const EstimatorConfig& cfg) {
  std::vector<McResult> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(run_cell(c, cfg));
  return out;
}

}  // namespace marma
