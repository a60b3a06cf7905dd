#pragma once

// Asymptotic standard errors of the spectral/bispectral estimator from the
// score of log psi, integrated over the frequency circle.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace marma {

inline constexpr std::size_t kScoreQuadraturePoints = 4096;

struct ScoreMatrices {
  Eigen::MatrixXd phi0;       ///< (1/2pi) int psi1(w) psi1(-w)' dw
  Eigen::MatrixXd phi0_star;  ///< (1/2pi) int psi1(w) psi1(w)' dw
  Eigen::VectorXcd mu;        ///< mean of the raw score
};

/// d log psi / d theta at omega, one entry per coefficient in factor order.
[[nodiscard]] inline Eigen::VectorXcd log_psi_score(const ModelOrder& order, const ParamVector& theta, double omega) {
  Eigen::VectorXcd g(static_cast<Eigen::Index>(order.num_params()));
  Eigen::Index at = 0;
  for (Factor f : kAllFactors) {
    const auto& c = theta.factor(f);
    // Causal/invertible factors live at e^{-i w}, the others at e^{+i w}.
    const std::complex<double> z = std::polar(1.0, is_forward(f) ? omega : -omega);
    std::complex<double> poly = 1.0, zk = 1.0;
    const double sign = is_ar(f) ? -1.0 : 1.0;
    for (double ck : c) {
      zk *= z;
      poly += sign * ck * zk;
    }
    // AR factors enter as 1/(1 - sum c z^k), MA factors as (1 + sum c z^k);
    // both give z^k / poly after the sign cancels.
    zk = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      zk *= z;
      g(at++) = zk / poly;
    }
  }
  return g;
}

/// Periodic trapezoid rule on N equispaced points of [-pi, pi).
[[nodiscard]] inline ScoreMatrices score_matrices(const ModelOrder& order, const ParamVector& theta,
                                                  std::size_t N = kScoreQuadraturePoints) {
  require_valid(order, theta);
  const auto d = static_cast<Eigen::Index>(order.num_params());
  std::vector<Eigen::VectorXcd> scores(N);
  Eigen::VectorXcd mu = Eigen::VectorXcd::Zero(d);
  for (std::size_t k = 0; k < N; ++k) {
    const double w = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
    scores[k] = log_psi_score(order, theta, w);
    mu += scores[k];
  }
  mu /= static_cast<double>(N);
  Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(d, d), p0s = Eigen::MatrixXcd::Zero(d, d);
  for (auto& s : scores) {
    const Eigen::VectorXcd c = s - mu;
    // Real coefficients: psi1(-w) = conj(psi1(w)).
    p0 += c * c.adjoint();
    p0s += c * c.transpose();
  }
  p0 /= static_cast<double>(N);
  p0s /= static_cast<double>(N);
  return {p0.real(), p0s.real(), mu};
}

struct StandardErrors {
  std::vector<double> combined;      ///< sqrt(diag(W_c) / T)
  std::vector<double> second_order;  ///< sqrt(diag((Phi0 + Phi0*)^-1) / T)
  Eigen::MatrixXd w11, w12, w22;
  bool heavy_tail_warning = false;
};

/// v3: standardized skewness, v4: standardized fourth cumulant (excess
/// kurtosis) of the innovations. The combined covariance weights the second-
/// and third-order blocks by a = m/(m+n):
///   W_c = a^2 W11 + (1-a)^2 W22 + a(1-a)(W12 + W12').
[[nodiscard]] inline StandardErrors standard_errors(const ModelOrder& order, const ParamVector& theta_hat, double v3,
                                                    double v4, std::size_t T, double m = 0.5, double n = 0.5) {
  if (T == 0) throw std::invalid_argument("T must be positive");
  if (!(m >= 0.0 && n >= 0.0 && m + n > 0.0)) throw std::invalid_argument("weights need m, n >= 0 and m + n > 0");
  if (n > 0.0 && !(std::abs(v3) > 1e-6))
    throw std::domain_error("third-order block undefined: innovation skewness is (numerically) zero");
  const auto sm = score_matrices(order, theta_hat);
  Eigen::FullPivLU<Eigen::MatrixXd> lu0(sm.phi0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu1(sm.phi0 + sm.phi0_star);
  if (!lu0.isInvertible() || !lu1.isInvertible() || lu0.rcond() < 1e-12)
    throw std::domain_error("singular Phi0: unit or common roots suspected");
  const Eigen::MatrixXd inv0 = lu0.inverse();
  StandardErrors out;
  out.w11 = lu1.inverse();
  out.w12 = inv0;
  out.w22 = n > 0.0 ? Eigen::MatrixXd((v4 + 2.0) / (v3 * v3) * inv0 + inv0 * sm.phi0_star * inv0)
                    : Eigen::MatrixXd::Zero(inv0.rows(), inv0.cols());
  const double a = m / (m + n);
  const Eigen::MatrixXd wc = a * a * out.w11 + (1.0 - a) * (1.0 - a) * out.w22 + a * (1.0 - a) * (out.w12 + out.w12.transpose());
  const double Td = static_cast<double>(T);
  for (Eigen::Index i = 0; i < wc.rows(); ++i) {
    out.combined.push_back(wc(i, i) > 0.0 ? std::sqrt(wc(i, i) / Td) : std::numeric_limits<double>::quiet_NaN());
    out.second_order.push_back(std::sqrt(out.w11(i, i) / Td));
  }
  return out;
}

}  // namespace marma
