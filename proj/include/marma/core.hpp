#pragma once

/** @file
 * Model algebra for mixed causal/noncausal, invertible/noninvertible ARMA
 * models: orders, coefficient vectors, root-location checks and two-sided
 * Laurent expansions of the MA(infinity) and AR(infinity) filters.
 *
 * Every factor is stored in its own forward variable. Causal AR and
 * invertible MA factors are polynomials in the lag operator L, the noncausal
 * AR and noninvertible MA factors are polynomials in the lead operator L^-1:
 *
 *   (1 - sum phi+_k L^k)(1 - sum phi*_k L^-k) y_t
 *       = (1 + sum theta+_k L^k)(1 + sum theta*_k L^-k) eps_t
 *
 * With that convention every admissible factor has all of its roots outside
 * the unit circle of its own variable.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace marma {

/// Roots must lie strictly beyond 1 + kRootMargin in modulus.
inline constexpr double kRootMargin = 0.02;
/// Numerator and denominator roots closer than this are a common root.
inline constexpr double kCommonRootTol = 1e-8;
inline constexpr double kDefaultExpansionTol = 1e-12;
inline constexpr std::size_t kMaxExpansionLength = 10000;

struct ModelOrder {
  std::size_t r = 0;   ///< causal AR order
  std::size_t s = 0;   ///< noncausal AR order
  std::size_t rp = 0;  ///< invertible MA order
  std::size_t sp = 0;  ///< noninvertible MA order

  [[nodiscard]] constexpr std::size_t p() const noexcept { return r + s; }
  [[nodiscard]] constexpr std::size_t q() const noexcept { return rp + sp; }
  [[nodiscard]] constexpr std::size_t num_params() const noexcept { return p() + q(); }
  [[nodiscard]] constexpr bool estimable() const noexcept { return num_params() >= 1; }
  [[nodiscard]] constexpr bool causal_invertible() const noexcept { return s == 0 && sp == 0; }

  friend constexpr bool operator==(const ModelOrder&, const ModelOrder&) = default;
  friend constexpr auto operator<=>(const ModelOrder&, const ModelOrder&) = default;

  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    os << "MARMA(" << r << ',' << s << ',' << rp << ',' << sp << ')';
    return os.str();
  }
};

/// The four polynomial factors, in parameter-vector order.
enum class Factor { phi_plus, phi_star, theta_plus, theta_star };

inline constexpr std::array<Factor, 4> kAllFactors = {Factor::phi_plus, Factor::phi_star,
                                                      Factor::theta_plus, Factor::theta_star};

[[nodiscard]] inline constexpr const char* factor_name(Factor f) noexcept {
  switch (f) {
    case Factor::phi_plus: return "phi+";
    case Factor::phi_star: return "phi*";
    case Factor::theta_plus: return "theta+";
    case Factor::theta_star: return "theta*";
  }
  return "?";
}

[[nodiscard]] inline constexpr bool is_ar(Factor f) noexcept {
  return f == Factor::phi_plus || f == Factor::phi_star;
}

/// Lead-operator factors (noncausal AR, noninvertible MA).
[[nodiscard]] inline constexpr bool is_forward(Factor f) noexcept {
  return f == Factor::phi_star || f == Factor::theta_star;
}

/// The factor on the other side of the unit circle with the same role.
[[nodiscard]] inline constexpr Factor mirror(Factor f) noexcept {
  switch (f) {
    case Factor::phi_plus: return Factor::phi_star;
    case Factor::phi_star: return Factor::phi_plus;
    case Factor::theta_plus: return Factor::theta_star;
    case Factor::theta_star: return Factor::theta_plus;
  }
  return f;
}

[[nodiscard]] inline std::size_t order_of(const ModelOrder& o, Factor f) noexcept {
  switch (f) {
    case Factor::phi_plus: return o.r;
    case Factor::phi_star: return o.s;
    case Factor::theta_plus: return o.rp;
    case Factor::theta_star: return o.sp;
  }
  return 0;
}

inline void set_order(ModelOrder& o, Factor f, std::size_t n) noexcept {
  switch (f) {
    case Factor::phi_plus: o.r = n; break;
    case Factor::phi_star: o.s = n; break;
    case Factor::theta_plus: o.rp = n; break;
    case Factor::theta_star: o.sp = n; break;
  }
}

/// Coefficient vector (phi+, phi*, theta+, theta*).
struct ParamVector {
  std::vector<double> phi_plus;
  std::vector<double> phi_star;
  std::vector<double> theta_plus;
  std::vector<double> theta_star;

  [[nodiscard]] const std::vector<double>& factor(Factor f) const noexcept {
    switch (f) {
      case Factor::phi_plus: return phi_plus;
      case Factor::phi_star: return phi_star;
      case Factor::theta_plus: return theta_plus;
      case Factor::theta_star: return theta_star;
    }
    return phi_plus;
  }
  [[nodiscard]] std::vector<double>& factor(Factor f) noexcept {
    return const_cast<std::vector<double>&>(std::as_const(*this).factor(f));
  }

  [[nodiscard]] std::size_t size() const noexcept {
    return phi_plus.size() + phi_star.size() + theta_plus.size() + theta_star.size();
  }

  /// Concatenation in factor order.
  [[nodiscard]] std::vector<double> flat() const {
    std::vector<double> out;
    out.reserve(size());
    for (Factor f : kAllFactors) out.insert(out.end(), factor(f).begin(), factor(f).end());
    return out;
  }

  [[nodiscard]] static ParamVector from_flat(const ModelOrder& order, std::span<const double> v) {
    if (v.size() != order.num_params())
      throw std::invalid_argument("parameter count " + std::to_string(v.size()) +
                                  " does not match " + order.to_string());
    ParamVector out;
    std::size_t at = 0;
    for (Factor f : kAllFactors) {
      const std::size_t n = order_of(order, f);
      out.factor(f).assign(v.begin() + static_cast<std::ptrdiff_t>(at),
                           v.begin() + static_cast<std::ptrdiff_t>(at + n));
      at += n;
    }
    return out;
  }

  [[nodiscard]] static ParamVector zeros(const ModelOrder& order) {
    return from_flat(order, std::vector<double>(order.num_params(), 0.0));
  }

  [[nodiscard]] bool matches(const ModelOrder& o) const noexcept {
    return phi_plus.size() == o.r && phi_star.size() == o.s && theta_plus.size() == o.rp &&
           theta_star.size() == o.sp;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

// ---------------------------------------------------------------------------
// Polynomials

/// Ascending coefficients of a factor in its own variable:
/// AR factors 1 - sum c_k w^k, MA factors 1 + sum c_k w^k.
[[nodiscard]] inline std::vector<double> factor_polynomial(Factor f, std::span<const double> c) {
  std::vector<double> poly(c.size() + 1);
  poly[0] = 1.0;
  const double sign = is_ar(f) ? -1.0 : 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) poly[k + 1] = sign * c[k];
  return poly;
}

/// Roots of an ascending-coefficient polynomial via companion-matrix
/// eigenvalues. Trailing zero coefficients lower the degree.
[[nodiscard]] inline std::vector<std::complex<double>> polynomial_roots(std::span<const double> poly) {
  std::size_t deg = poly.size();
  while (deg > 0 && poly[deg - 1] == 0.0) --deg;
  if (deg <= 1) return {};
  --deg;
  const double lead = poly[deg];
  if (deg == 1) return {std::complex<double>(-poly[0] / lead, 0.0)};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                    static_cast<Eigen::Index>(deg));
  for (std::size_t i = 1; i < deg; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -poly[i] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& ev = solver.eigenvalues();
  std::vector<std::complex<double>> roots(deg);
  for (std::size_t i = 0; i < deg; ++i) roots[i] = ev(static_cast<Eigen::Index>(i));
  return roots;
}

/// Monic-at-zero polynomial prod (1 - w/root_i), real part of coefficients.
[[nodiscard]] inline std::vector<double> polynomial_from_roots(
    std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& z : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k];
      next[k + 1] -= poly[k] / z;
    }
    poly = std::move(next);
  }
  std::vector<double> out(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k) out[k] = poly[k].real();
  return out;
}

/// Coefficients c_k of the factor with the given polynomial (poly[0] == 1).
[[nodiscard]] inline std::vector<double> coefficients_from_polynomial(Factor f,
                                                                      std::span<const double> poly) {
  std::vector<double> c(poly.size() > 0 ? poly.size() - 1 : 0);
  const double sign = is_ar(f) ? -1.0 : 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = sign * poly[k + 1];
  return c;
}

[[nodiscard]] inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationVerdict {
  enum class Kind { ok, length_mismatch, non_finite, root_margin, common_root };
  Kind kind = Kind::ok;
  std::optional<Factor> factor;
  std::string detail;

  [[nodiscard]] bool ok() const noexcept { return kind == Kind::ok; }
  explicit operator bool() const noexcept { return ok(); }
};

/// Roots of every factor mapped into the lag-variable z plane
/// (forward factors contribute 1/root).
struct ZPlaneRoots {
  std::vector<std::complex<double>> numerator;
  std::vector<std::complex<double>> denominator;
};

/// Root check of every factor against 1 + margin, plus the common-root check
/// between numerator and denominator in the lag variable.
[[nodiscard]] inline ValidationVerdict validate_params(const ModelOrder& order, const ParamVector& theta,
                                                       double margin = kRootMargin) {
  if (!theta.matches(order)) {
    std::ostringstream os;
    os << "order/parameter inconsistency: " << order.to_string() << " expects (" << order.r << ','
       << order.s << ',' << order.rp << ',' << order.sp << ") coefficients, got ("
       << theta.phi_plus.size() << ',' << theta.phi_star.size() << ',' << theta.theta_plus.size()
       << ',' << theta.theta_star.size() << ')';
    return {ValidationVerdict::Kind::length_mismatch, std::nullopt, os.str()};
  }
  ZPlaneRoots z;
  for (Factor f : kAllFactors) {
    const auto& c = theta.factor(f);
    for (double v : c)
      if (!std::isfinite(v))
        return {ValidationVerdict::Kind::non_finite, f,
                std::string("non-finite coefficient in ") + factor_name(f)};
    if (c.empty()) continue;
    // Degree one has a closed form; it dominates optimizer calls.
    std::vector<std::complex<double>> roots;
    if (c.size() == 1) {
      if (c[0] != 0.0) roots.emplace_back((is_ar(f) ? 1.0 : -1.0) / c[0], 0.0);
    } else {
      const auto poly = factor_polynomial(f, c);
      roots = polynomial_roots(poly);
    }
    for (const auto& root : roots) {
      if (!(std::abs(root) > 1.0 + margin)) {
        std::ostringstream os;
        os << "boundary violation in " << factor_name(f) << ": root " << root.real()
           << (root.imag() < 0 ? "-" : "+") << std::abs(root.imag()) << "i has modulus "
           << std::abs(root) << " <= " << 1.0 + margin;
        return {ValidationVerdict::Kind::root_margin, f, os.str()};
      }
      const auto zr = is_forward(f) ? 1.0 / root : root;
      (is_ar(f) ? z.denominator : z.numerator).push_back(zr);
    }
  }
  for (const auto& a : z.numerator)
    for (const auto& b : z.denominator)
      if (std::abs(a - b) < kCommonRootTol)
        return {ValidationVerdict::Kind::common_root, std::nullopt,
                "numerator and denominator share a root"};
  return {};
}

/// Throws std::invalid_argument carrying the verdict detail.
inline void require_valid(const ModelOrder& order, const ParamVector& theta) {
  if (auto v = validate_params(order, theta); !v) throw std::invalid_argument(v.detail);
}

// ---------------------------------------------------------------------------
// Enumeration and root flipping

/// All (r,s,r',s') with r+s = p and r'+s' = q. Listed with s' as the slow
/// index and s as the fast index, i.e. (p,0,q,0), (p-1,1,q,0), ...
[[nodiscard]] inline std::vector<ModelOrder> enumerate_orders(std::size_t p, std::size_t q) {
  if (p + q == 0) throw std::invalid_argument("p = q = 0: nothing to estimate");
  std::vector<ModelOrder> out;
  out.reserve((p + 1) * (q + 1));
  for (std::size_t sp = 0; sp <= q; ++sp)
    for (std::size_t s = 0; s <= p; ++s) out.push_back({p - s, s, q - sp, sp});
  return out;
}

/// Moves a root of `from` (and its conjugate, when complex) to the mirror
/// factor, e.g. a causal AR root becomes a noncausal AR root with the same
/// value in the forward variable. Second-order properties are unchanged.
/// Returns the new order and coefficients.
[[nodiscard]] inline std::pair<ModelOrder, ParamVector> flip_root(const ModelOrder& order,
                                                                  const ParamVector& theta, Factor from,
                                                                  std::size_t root_index) {
  require_valid(order, theta);
  const auto& c = theta.factor(from);
  auto roots = polynomial_roots(factor_polynomial(from, c));
  if (root_index >= roots.size()) throw std::out_of_range("root index out of range");
  const Factor to = mirror(from);
  auto target_roots = polynomial_roots(factor_polynomial(to, theta.factor(to)));

  std::vector<std::complex<double>> moved{roots[root_index]};
  const auto z = roots[root_index];
  std::vector<std::complex<double>> kept;
  bool conj_taken = std::abs(z.imag()) <= 1e-12 * std::abs(z);
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (k == root_index) continue;
    if (!conj_taken && std::abs(roots[k] - std::conj(z)) <= 1e-9 * std::abs(z)) {
      moved.push_back(roots[k]);
      conj_taken = true;
      continue;
    }
    kept.push_back(roots[k]);
  }
  target_roots.insert(target_roots.end(), moved.begin(), moved.end());

  ModelOrder out_order = order;
  set_order(out_order, from, kept.size());
  set_order(out_order, to, target_roots.size());
  ParamVector out = theta;
  out.factor(from) = coefficients_from_polynomial(from, polynomial_from_roots(kept));
  out.factor(to) = coefficients_from_polynomial(to, polynomial_from_roots(target_roots));
  return {out_order, out};
}

// ---------------------------------------------------------------------------
// Laurent expansions

/// Two-sided coefficient sequence w_j, j in [min_offset, max_offset].
struct CoefficientExpansion {
  std::ptrdiff_t first_offset = 0;
  std::vector<double> weights;
  double truncation_error_bound = 0.0;

  [[nodiscard]] std::ptrdiff_t min_offset() const noexcept { return first_offset; }
  [[nodiscard]] std::ptrdiff_t max_offset() const noexcept {
    return first_offset + static_cast<std::ptrdiff_t>(weights.size()) - 1;
  }
  /// Zero outside the stored range.
  [[nodiscard]] double at(std::ptrdiff_t j) const noexcept {
    const auto k = j - first_offset;
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(weights.size())) return 0.0;
    return weights[static_cast<std::size_t>(k)];
  }
};

namespace detail {

struct OneSidedSeries {
  std::vector<double> coeffs;
  double tail_bound = 0.0;
  double l1_norm = 0.0;
};

/// Power series of num(x)/den(x), den(0) == 1, grown until the geometric
/// tail majorant falls below tol (or the length cap is reached).
inline OneSidedSeries series_ratio(std::span<const double> num, std::span<const double> den,
                                   double tol, std::size_t cap) {
  std::size_t den_deg = den.size();
  while (den_deg > 1 && den[den_deg - 1] == 0.0) --den_deg;
  den_deg = den_deg == 0 ? 0 : den_deg - 1;

  auto term = [&](const std::vector<double>& a, std::size_t k) {
    double v = k < num.size() ? num[k] : 0.0;
    for (std::size_t i = 1; i <= den_deg && i <= k; ++i) v -= den[i] * a[k - i];
    return v;
  };

  OneSidedSeries out;
  if (den_deg == 0) {
    out.coeffs.assign(num.begin(), num.end());
    if (out.coeffs.empty()) out.coeffs.push_back(0.0);
    for (double v : out.coeffs) out.l1_norm += std::abs(v);
    return out;
  }

  double rho = 0.0;
  for (const auto& root : polynomial_roots(den.first(den_deg + 1))) rho = std::max(rho, 1.0 / std::abs(root));
  // Majorant rate strictly between the true decay and 1 absorbs the
  // polynomial factors of repeated roots.
  const double rate = std::pow(rho, 0.9);
  const std::size_t min_len = std::max(num.size(), den_deg + 1) + 1;

  auto& a = out.coeffs;
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cap; ++k) {
    a.push_back(term(a, k));
    if (a.size() < min_len || (a.size() % 16) != 0) continue;
    // C = max |a_k| / rate^k over the second half of what we have.
    double c = 0.0;
    std::size_t argmax = 0;
    for (std::size_t i = a.size() / 2; i < a.size(); ++i) {
      const double ratio = std::abs(a[i]) * std::pow(rate, -static_cast<double>(i));
      if (ratio >= c) { c = ratio; argmax = i; }
    }
    if (argmax + 1 == a.size() && a.size() < cap) continue;  // still climbing
    bound = c * std::pow(rate, static_cast<double>(a.size())) / (1.0 - rate);
    if (bound < tol) break;
  }
  out.tail_bound = bound;
  for (double v : a) out.l1_norm += std::abs(v);
  return out;
}

inline CoefficientExpansion laurent(std::span<const double> back_num, std::span<const double> back_den,
                                    std::span<const double> fwd_num, std::span<const double> fwd_den,
                                    double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("expansion tolerance must be positive");
  // Tail of the product is bounded by ta*|b| + |a|*tb + ta*tb; split tol.
  auto a = series_ratio(back_num, back_den, tol / 8.0, kMaxExpansionLength);
  auto b = series_ratio(fwd_num, fwd_den, tol / 8.0, kMaxExpansionLength);
  if (a.tail_bound > 0.0 || b.tail_bound > 0.0) {
    // Tighten each side against the other's mass.
    const double ta = tol / (4.0 * std::max(1.0, b.l1_norm + b.tail_bound));
    const double tb = tol / (4.0 * std::max(1.0, a.l1_norm + a.tail_bound));
    if (a.tail_bound > ta) a = series_ratio(back_num, back_den, ta, kMaxExpansionLength);
    if (b.tail_bound > tb) b = series_ratio(fwd_num, fwd_den, tb, kMaxExpansionLength);
  }
  CoefficientExpansion out;
  const std::size_t na = a.coeffs.size();
  const std::size_t nb = b.coeffs.size();
  out.first_offset = -static_cast<std::ptrdiff_t>(nb - 1);
  out.weights.assign(na + nb - 1, 0.0);
  // w_j = sum_{n - m = j} a_n b_m, stored at index j + nb - 1.
  for (std::size_t n = 0; n < na; ++n) {
    if (a.coeffs[n] == 0.0) continue;
    for (std::size_t m = 0; m < nb; ++m) out.weights[n + (nb - 1) - m] += a.coeffs[n] * b.coeffs[m];
  }
  out.truncation_error_bound = a.tail_bound * (b.l1_norm + b.tail_bound) + a.l1_norm * b.tail_bound;
  return out;
}

}  // namespace detail

/// Laurent coefficients of theta+(z) theta*(1/z) / (phi+(z) phi*(1/z)) in the
/// lag variable z, so that y_t = sum_j Psi_j eps_{t-j}.
[[nodiscard]] inline CoefficientExpansion psi_weights(const ModelOrder& order, const ParamVector& theta,
                                                      double tol = kDefaultExpansionTol) {
  require_valid(order, theta);
  return detail::laurent(factor_polynomial(Factor::theta_plus, theta.theta_plus),
                         factor_polynomial(Factor::phi_plus, theta.phi_plus),
                         factor_polynomial(Factor::theta_star, theta.theta_star),
                         factor_polynomial(Factor::phi_star, theta.phi_star), tol);
}

/// Laurent coefficients of the inverse filter, eps_t = sum_j Psi*_j y_{t-j}.
[[nodiscard]] inline CoefficientExpansion psi_star_weights(const ModelOrder& order,
                                                           const ParamVector& theta,
                                                           double tol = kDefaultExpansionTol) {
  require_valid(order, theta);
  return detail::laurent(factor_polynomial(Factor::phi_plus, theta.phi_plus),
                         factor_polynomial(Factor::theta_plus, theta.theta_plus),
                         factor_polynomial(Factor::phi_star, theta.phi_star),
                         factor_polynomial(Factor::theta_star, theta.theta_star), tol);
}

/// corr(y_t^2, y_{t+k}^2) for k = 1..kmax of a linear process with iid
/// innovations of standardized kurtosis k4_std:
///
///   [(k4-3) sum Psi_j^2 Psi_{j+k}^2 + 2 (sum Psi_j Psi_{j+k})^2]
///   / [(k4-3) sum Psi_j^4 + 2 (sum Psi_j^2)^2]
[[nodiscard]] inline std::vector<double> squared_acf_theory(const ModelOrder& order,
                                                            const ParamVector& theta, double k4_std,
                                                            std::size_t kmax) {
  if (!std::isfinite(k4_std)) throw std::invalid_argument("kurtosis must be finite");
  if (k4_std < 1.0) throw std::invalid_argument("standardized kurtosis must be >= 1");
  if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  const auto psi = psi_weights(order, theta);
  const auto& w = psi.weights;
  const double excess = k4_std - 3.0;
  double s2 = 0.0, s4 = 0.0;
  for (double v : w) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double den = excess * s4 + 2.0 * s2 * s2;
  if (!(den > 0.0)) throw std::domain_error("squared process is degenerate (two-point errors, no dynamics)");
  std::vector<double> out(kmax);
  for (std::size_t k = 1; k <= kmax; ++k) {
    double cross2 = 0.0, cross = 0.0;
    for (std::size_t j = 0; j + k < w.size(); ++j) {
      cross += w[j] * w[j + k];
      cross2 += w[j] * w[j] * w[j + k] * w[j + k];
    }
    out[k - 1] = std::clamp((excess * cross2 + 2.0 * cross * cross) / den, -1.0, 1.0);
  }
  return out;
}

}  // namespace marma
