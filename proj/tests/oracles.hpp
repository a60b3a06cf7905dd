#pragma once

// Independent reference computations used only by the tests. They avoid the
// library's fast paths: direct sums instead of FFTs, dense solves instead of
// circular filtering, plain quadrature instead of closed forms.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// sum_{t=1}^T y_t e^{-i t w_j}, evaluated term by term.
inline std::vector<cplx> naive_dft(const std::vector<double>& y) {
  const std::size_t T = y.size();
  std::vector<cplx> d(T);
  for (std::size_t j = 0; j < T; ++j) {
    cplx s = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const double a = -2.0 * pi * static_cast<double>(j) * static_cast<double>(t) / static_cast<double>(T);
      s += y[t - 1] * cplx(std::cos(a), std::sin(a));
    }
    d[j] = s;
  }
  return d;
}

inline double naive_periodogram(const std::vector<cplx>& d, std::size_t j) {
  return std::norm(d[j]) / (2.0 * pi * static_cast<double>(d.size()));
}

/// d_j d_i conj(d_{j+i}) / ((2 pi)^2 T).
inline cplx naive_biperiodogram(const std::vector<cplx>& d, std::size_t j, std::size_t i) {
  const std::size_t T = d.size();
  return d[j] * d[i] * std::conj(d[(j + i) % T]) / (4.0 * pi * pi * static_cast<double>(T));
}

/// First n coefficients of num(x)/den(x) by long division (den[0] = 1).
inline std::vector<double> long_division(const std::vector<double>& num, const std::vector<double>& den, std::size_t n) {
  std::vector<double> q(n, 0.0);
  std::vector<double> r(n, 0.0);
  for (std::size_t k = 0; k < num.size() && k < n; ++k) r[k] = num[k];
  for (std::size_t k = 0; k < n; ++k) {
    q[k] = r[k] / den[0];
    for (std::size_t i = 0; i < den.size() && k + i < n; ++i) r[k + i] -= q[k] * den[i];
  }
  return q;
}

/// Circular AR(1): y_t - phi y_{t-1 mod T} = eps_t, solved densely.
inline std::vector<double> circulant_ar1(const std::vector<double>& eps, double phi) {
  const auto T = static_cast<Eigen::Index>(eps.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(T, T);
  for (Eigen::Index t = 0; t < T; ++t) A(t, (t - 1 + T) % T) -= phi;
  Eigen::VectorXd b(T);
  for (Eigen::Index t = 0; t < T; ++t) b(t) = eps[static_cast<std::size_t>(t)];
  Eigen::VectorXd y = A.partialPivLu().solve(b);
  return {y.data(), y.data() + T};
}

/// y_t = phi y_{t-1} + eps_t from y_{-1} = 0.
inline std::vector<double> ar1_recursion(const std::vector<double>& eps, double phi) {
  std::vector<double> y(eps.size());
  double prev = 0.0;
  for (std::size_t t = 0; t < eps.size(); ++t) prev = y[t] = phi * prev + eps[t];
  return y;
}

/// Student-t density.
inline double t_pdf(double x, double nu) {
  const double c = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) / std::sqrt(nu * pi);
  return c * std::pow(1.0 + x * x / nu, -(nu + 1.0) / 2.0);
}

/// Two-piece density 2/(g + 1/g) [f(x/g) 1{x>=0} + f(g x) 1{x<0}].
inline double skew_t_pdf(double x, double nu, double g) {
  const double c = 2.0 / (g + 1.0 / g);
  return c * (x >= 0.0 ? t_pdf(x / g, nu) : t_pdf(g * x, nu));
}

/// Raw moment E X^k of the two-piece density by composite Simpson on
/// x = tan(u), u in (-pi/2, pi/2).
inline double skew_t_moment(int k, double nu, double g, int n = 200000) {
  const double a = -pi / 2.0, b = pi / 2.0;
  const double h = (b - a) / n;
  auto f = [&](double u) {
    const double x = std::tan(u);
    const double c = std::cos(u);
    return std::pow(x, k) * skew_t_pdf(x, nu, g) / (c * c);
  };
  double s = 0.0;
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;  // endpoint terms vanish for k < nu - 1
}

inline double skew_t_skewness(double nu, double g) {
  const double m1 = skew_t_moment(1, nu, g), m2 = skew_t_moment(2, nu, g), m3 = skew_t_moment(3, nu, g);
  const double var = m2 - m1 * m1;
  return (m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1) / std::pow(var, 1.5);
}

/// Upper tail of chi-square(2): exp(-x/2).
inline double chi2_2_sf(double x) { return std::exp(-x / 2.0); }

/// Upper tail of chi-square(2m) for integer m (Poisson sum).
inline double chi2_even_sf(double x, int m) {
  double term = 1.0, s = 1.0;
  for (int k = 1; k < m; ++k) {
    term *= (x / 2.0) / k;
    s += term;
  }
  return std::exp(-x / 2.0) * s;
}

/// Trapezoid average over N equispaced points of f on [-pi, pi).
template <class F>
inline cplx circle_mean(F f, int N = 20000) {
  cplx s = 0.0;
  for (int k = 0; k < N; ++k) s += f(-pi + 2.0 * pi * k / N);
  return s / static_cast<double>(N);
}

}  // namespace oracle
