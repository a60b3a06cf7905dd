#pragma once

// Residual diagnostics: Jarque-Bera, Ljung-Box and the J/C iid tests, which
// combine the autocorrelation of levels with that of absolute values or
// squares.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace marma {

struct TestResult {
  double stat = 0.0;
  double p = 1.0;
};

/// Upper tail of chi-square with `dof` degrees of freedom.
[[nodiscard]] inline double chi2_sf(double x, double dof) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  ///< biased
  double skewness = 0.0;
  double kurtosis = 0.0;  ///< raw (3 for Gaussian)
};

[[nodiscard]] inline SampleMoments sample_moments(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("empty sample");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0) || m2 <= 1e-300) throw std::domain_error("constant series: moments undefined");
  return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

/// JB = T/6 (S^2 + (K-3)^2/4), p from chi-square(2).
[[nodiscard]] inline TestResult jarque_bera(std::span<const double> x) {
  if (x.size() < 20) throw std::invalid_argument("Jarque-Bera needs T >= 20");
  const auto m = sample_moments(x);
  const double ex = m.kurtosis - 3.0;
  const double jb = static_cast<double>(x.size()) / 6.0 * (m.skewness * m.skewness + ex * ex / 4.0);
  return {jb, chi2_sf(jb, 2.0)};
}

enum class Channel { level, abs, sq };

namespace detail {

inline std::vector<double> transformed(std::span<const double> e, Channel ch) {
  std::vector<double> out(e.begin(), e.end());
  if (ch == Channel::abs)
    for (double& v : out) v = std::abs(v);
  else if (ch == Channel::sq)
    for (double& v : out) v = v * v;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

/// Biased lag-k autocorrelation of an already centred series.
inline double autocorr(std::span<const double> c, std::size_t k, const char* channel) {
  double c0 = 0.0, ck = 0.0;
  for (double v : c) c0 += v * v;
  for (std::size_t t = k; t < c.size(); ++t) ck += c[t] * c[t - k];
  if (!(c0 > 1e-300 * static_cast<double>(c.size())))
    throw std::domain_error(std::string("degenerate variance in the ") + channel + " channel");
  return ck / c0;
}

inline void check_lag(std::size_t k, std::size_t T) {
  if (k < 1 || 4 * k > T) throw std::invalid_argument("lag must satisfy 1 <= k <= T/4");
}

}  // namespace detail

struct RhoTriplet {
  double level = 0.0;  ///< corr(e_t, e_{t-k})
  double abs = 0.0;    ///< corr(|e_t|, |e_{t-k}|)
  double sq = 0.0;     ///< corr(e_t^2, e_{t-k}^2)
};

[[nodiscard]] inline RhoTriplet rho_triplet(std::span<const double> e, std::size_t k) {
  detail::check_lag(k, e.size());
  const auto lv = detail::transformed(e, Channel::level);
  const auto ab = detail::transformed(e, Channel::abs);
  const auto sq = detail::transformed(e, Channel::sq);
  return {detail::autocorr(lv, k, "level"), detail::autocorr(ab, k, "abs"), detail::autocorr(sq, k, "sq")};
}

/// J_k = T^2/(T-k) (rho_level^2 + rho_channel^2), p from chi-square(2).
[[nodiscard]] inline TestResult j_statistic(std::size_t T, std::size_t k, double rho_level, double rho_channel) {
  if (k >= T) throw std::invalid_argument("lag must be below T");
  const double t = static_cast<double>(T);
  const double j = t * t / (t - static_cast<double>(k)) * (rho_level * rho_level + rho_channel * rho_channel);
  return {j, chi2_sf(j, 2.0)};
}

[[nodiscard]] inline TestResult j_stat(std::span<const double> e, std::size_t k, Channel channel) {
  if (channel == Channel::level) throw std::invalid_argument("J statistic needs the abs or sq channel");
  const auto r = rho_triplet(e, k);
  return j_statistic(e.size(), k, r.level, channel == Channel::abs ? r.abs : r.sq);
}

/// C_m = sum_{k<=m} J_k for m = 1..max_lag, p from chi-square(2m).
[[nodiscard]] inline std::vector<TestResult> c_stat(std::span<const double> e, std::size_t max_lag, Channel channel) {
  detail::check_lag(max_lag, e.size());
  std::vector<TestResult> out;
  double c = 0.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    c += j_stat(e, k, channel).stat;
    out.push_back({c, chi2_sf(c, 2.0 * static_cast<double>(k))});
  }
  return out;
}

/// Q_m = T(T+2) sum_{k<=m} rho_k^2/(T-k), p from chi-square(m).
[[nodiscard]] inline std::vector<TestResult> ljung_box(std::span<const double> e, std::size_t max_lag) {
  detail::check_lag(max_lag, e.size());
  const auto c = detail::transformed(e, Channel::level);
  const double T = static_cast<double>(e.size());
  std::vector<TestResult> out;
  double q = 0.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    const double r = detail::autocorr(c, k, "level");
    q += r * r / (T - static_cast<double>(k));
    const double stat = T * (T + 2.0) * q;
    out.push_back({stat, chi2_sf(stat, static_cast<double>(k))});
  }
  return out;
}

struct DiagnosticsReport {
  std::size_t m = 5;
  TestResult jb;
  std::vector<TestResult> lb;
  std::vector<TestResult> j_abs;
  std::vector<TestResult> c_abs;
  std::vector<TestResult> j_sq;
  std::vector<TestResult> c_sq;
};

[[nodiscard]] inline DiagnosticsReport diagnose(std::span<const double> e, std::size_t m = 5) {
  DiagnosticsReport r;
  r.m = m;
  r.jb = jarque_bera(e);
  r.lb = ljung_box(e, m);
  for (std::size_t k = 1; k <= m; ++k) {
    r.j_abs.push_back(j_stat(e, k, Channel::abs));
    r.j_sq.push_back(j_stat(e, k, Channel::sq));
  }
  r.c_abs = c_stat(e, m, Channel::abs);
  r.c_sq = c_stat(e, m, Channel::sq);
  return r;
}

}  // namespace marma
