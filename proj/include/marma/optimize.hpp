#pragma once

// Derivative-free optimizers: a real-coded genetic algorithm for the global
// search and a Nelder-Mead simplex for local polishing. Both treat +inf as
// "infeasible".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "distributions.hpp"

namespace marma {

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Runs fn(i) for i in [0, n) on up to `threads` threads (0 = hardware
/// concurrency). Work is split into contiguous blocks; the first exception
/// is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct GAConfig {
  std::size_t population = 64;
  std::size_t generations = 200;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;
  double mutation_scale = 0.05;
  std::size_t elite = 4;
  std::uint64_t seed = 20240601;
  std::size_t stall_generations = 30;
  double coefficient_box = 0.99;

  void validate() const {
    if (population < 8) throw std::invalid_argument("GA population must be >= 8");
    if (generations < 1) throw std::invalid_argument("GA generations must be >= 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw std::invalid_argument("crossover_rate must be in [0,1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("mutation_rate must be in [0,1]");
    if (!(mutation_scale >= 0.0)) throw std::invalid_argument("mutation_scale must be >= 0");
    if (elite >= population) throw std::invalid_argument("elite must be < population");
    if (!(coefficient_box > 0.0)) throw std::invalid_argument("coefficient_box must be > 0");
  }
};

struct OptimizerTrace {
  std::size_t generations_run = 0;
  std::vector<double> best_per_generation;
  std::size_t evaluations = 0;
  std::size_t refine_iterations = 0;
  bool stalled = false;
};

struct GAResult {
  std::vector<double> x;
  double value = kInfeasible;
  OptimizerTrace trace;
};

using Objective = std::function<double(std::span<const double>)>;
using Feasible = std::function<bool(std::span<const double>)>;

namespace detail {

/// Shrinks x toward 0 by factors of 0.9 until feasible (at most 50 steps).
inline bool repair(std::vector<double>& x, const Feasible& feasible) {
  for (int step = 0; step <= 50; ++step) {
    if (feasible(x)) return true;
    for (double& v : x) v *= 0.9;
  }
  return false;
}

}  // namespace detail

/// Real-coded GA over the box [-b, b]^dim. `seeds` are injected into the
/// initial population (after repair); the rest is drawn uniformly.
/// `f` itself must return kInfeasible (or NaN) outside the admissible
/// region; `feasible` only steers the repair of new individuals.
/// Deterministic in cfg.seed for any thread count: every random draw happens
/// on the calling thread, only evaluations are parallel.
[[nodiscard]] inline GAResult ga_minimize_generic(std::size_t dim, const Objective& f, const Feasible& feasible,
                                                  const GAConfig& cfg, std::span<const std::vector<double>> seeds = {},
                                                  unsigned threads = 1) {
  cfg.validate();
  if (dim == 0) throw std::invalid_argument("GA needs at least one coefficient");
  Engine rng = make_engine(cfg.seed);
  boost::random::uniform_01<double> unif;
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double box = cfg.coefficient_box;
  const std::size_t N = cfg.population;

  auto uniform_point = [&] {
    std::vector<double> x(dim);
    for (double& v : x) v = box * (2.0 * unif(rng) - 1.0);
    return x;
  };
  // Repair, else resample (bounded), else keep as infeasible.
  auto make_feasible = [&](std::vector<double> x) {
    if (detail::repair(x, feasible)) return x;
    for (int tries = 0; tries < 100; ++tries) {
      auto y = uniform_point();
      if (detail::repair(y, feasible)) return y;
    }
    return x;
  };

  std::vector<std::vector<double>> pop;
  pop.reserve(N);
  for (const auto& s : seeds) {
    if (pop.size() >= N) break;
    if (s.size() != dim) throw std::invalid_argument("GA seed has wrong dimension");
    std::vector<double> x(s);
    for (double& v : x) v = std::clamp(v, -box, box);
    if (detail::repair(x, feasible)) pop.push_back(std::move(x));
  }
  while (pop.size() < N) pop.push_back(make_feasible(uniform_point()));

  std::vector<double> fit(N);
  GAResult result;
  auto evaluate = [&](const std::vector<std::vector<double>>& P, std::vector<double>& out) {
    parallel_for(P.size(), threads, [&](std::size_t i) {
      const double v = f(P[i]);
      out[i] = std::isnan(v) ? kInfeasible : v;
    });
    result.trace.evaluations += P.size();
  };
  evaluate(pop, fit);
  if (std::none_of(fit.begin(), fit.end(), [](double v) { return std::isfinite(v); }))
    throw std::runtime_error("GA: no feasible individual after initialization");

  std::vector<std::size_t> idx(N);
  auto rank = [&] {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });
  };
  auto tournament = [&]() -> const std::vector<double>& {
    boost::random::uniform_int_distribution<std::size_t> pick(0, N - 1);
    std::size_t best = pick(rng);
    for (int k = 1; k < 3; ++k) {
      const std::size_t c = pick(rng);
      if (fit[c] < fit[best] || (fit[c] == fit[best] && c < best)) best = c;
    }
    return pop[best];
  };

  rank();
  double best = fit[idx[0]];
  std::size_t since_improvement = 0;
  std::vector<std::vector<double>> next;
  std::vector<double> next_fit(N);
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    next.clear();
    for (std::size_t e = 0; e < cfg.elite; ++e) next.push_back(pop[idx[e]]);
    while (next.size() < N) {
      const auto& a = tournament();
      const auto& b = tournament();
      std::vector<double> child(a);
      if (unif(rng) < cfg.crossover_rate) {
        const double lambda = unif(rng);
        for (std::size_t k = 0; k < dim; ++k) child[k] = lambda * a[k] + (1.0 - lambda) * b[k];
      }
      for (double& v : child) {
        if (unif(rng) < cfg.mutation_rate) v += cfg.mutation_scale * normal(rng);
        v = std::clamp(v, -box, box);
      }
      next.push_back(make_feasible(std::move(child)));
    }
    // Elites keep their fitness; only offspring are evaluated.
    for (std::size_t e = 0; e < cfg.elite; ++e) next_fit[e] = fit[idx[e]];
    std::vector<std::vector<double>> offspring(next.begin() + static_cast<std::ptrdiff_t>(cfg.elite), next.end());
    std::vector<double> off_fit(offspring.size());
    evaluate(offspring, off_fit);
    std::copy(off_fit.begin(), off_fit.end(), next_fit.begin() + static_cast<std::ptrdiff_t>(cfg.elite));
    pop.swap(next);
    fit.swap(next_fit);
    rank();
    result.trace.generations_run = gen + 1;
    const double gen_best = fit[idx[0]];
    result.trace.best_per_generation.push_back(gen_best);
    if (gen_best < best - 1e-12 * std::max(1.0, std::abs(best))) {
      best = gen_best;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.stall_generations) {
      result.trace.stalled = true;
      break;
    }
  }
  result.x = pop[idx[0]];
  result.value = fit[idx[0]];
  return result;
}

struct NelderMeadOptions {
  std::size_t max_iterations = 400;
  double initial_step = 0.05;
  double ftol = 1e-10;
  double xtol = 1e-8;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = kInfeasible;
  std::size_t iterations = 0;
};

/// Nelder-Mead simplex started from x0. Infeasible vertices evaluate to +inf
/// and are never accepted, so the simplex contracts away from them. The
/// result is never worse than x0.
[[nodiscard]] inline NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                                                  const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res{std::vector<double>(x0.begin(), x0.end()), f(x0), 0};
  if (std::isnan(res.value)) res.value = kInfeasible;
  if (n == 0) return res;

  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isnan(v) ? kInfeasible : v;
  };
  std::vector<std::vector<double>> s(n + 1, res.x);
  std::vector<double> fv(n + 1);
  fv[0] = res.value;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = opt.initial_step;
    s[i + 1][i] += h;
    fv[i + 1] = eval(s[i + 1]);
    if (!std::isfinite(fv[i + 1])) {
      s[i + 1][i] = res.x[i] - h;
      fv[i + 1] = eval(s[i + 1]);
    }
  }
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = order[0], hi = order[n], nh = order[n - 1];
    if (std::isfinite(fv[hi]) && std::abs(fv[hi] - fv[lo]) <= opt.ftol * (std::abs(fv[lo]) + 1e-300)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(s[i][k] - s[lo][k]));
      if (spread <= opt.xtol) break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != hi)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += s[i][k] / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - s[hi][k]);
    const double fr = eval(xr);
    if (fr < fv[lo]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - s[hi][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        s[hi] = xe;
        fv[hi] = fe;
      } else {
        s[hi] = xr;
        fv[hi] = fr;
      }
      continue;
    }
    if (fr < fv[nh]) {
      s[hi] = xr;
      fv[hi] = fr;
      continue;
    }
    const bool outside = fr < fv[hi];
    for (std::size_t k = 0; k < n; ++k)
      xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k]) : centroid[k] + 0.5 * (s[hi][k] - centroid[k]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[hi])) {
      s[hi] = xc;
      fv[hi] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == lo) continue;
      for (std::size_t k = 0; k < n; ++k) s[i][k] = s[lo][k] + 0.5 * (s[i][k] - s[lo][k]);
      fv[i] = eval(s[i]);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  if (fv[best] < res.value) {
    res.x = s[best];
    res.value = fv[best];
  }
  return res;
}

}  // namespace marma
