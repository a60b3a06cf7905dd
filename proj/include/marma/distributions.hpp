#pragma once

// Innovation laws: alpha-stable (Chambers-Mallows-Stuck), two-piece skew-t
// and Gaussian, plus seed derivation shared by every stochastic component.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace marma {

[[nodiscard]] inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for the index-th child of a master seed.
[[nodiscard]] inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

using Engine = std::mt19937_64;

[[nodiscard]] inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

struct AlphaStable {
  double alpha = 1.5;
  double beta = 0.0;
  double eta = 1.0;    ///< scale
  double delta = 0.0;  ///< location
};

/// Fernandez-Steel two-piece Student t.
struct SkewT {
  double nu = 5.0;
  double gamma = 1.0;
};

struct Gaussian {
  double sigma = 1.0;
};

using ErrorDistribution = std::variant<AlphaStable, SkewT, Gaussian>;

/// Throws std::invalid_argument on out-of-range parameters. With
/// `for_estimation`, also rejects stable laws without a finite mean.
inline void validate_distribution(const ErrorDistribution& dist, bool for_estimation = false) {
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, AlphaStable>) {
          if (!(d.alpha > 0.0 && d.alpha <= 2.0)) throw std::invalid_argument("alpha-stable: alpha must be in (0, 2]");
          if (!(d.beta >= -1.0 && d.beta <= 1.0)) throw std::invalid_argument("alpha-stable: beta must be in [-1, 1]");
          if (!(d.eta > 0.0) || !std::isfinite(d.eta)) throw std::invalid_argument("alpha-stable: eta must be > 0");
          if (!std::isfinite(d.delta)) throw std::invalid_argument("alpha-stable: delta must be finite");
          if (for_estimation && d.alpha <= 1.0)
            throw std::invalid_argument("alpha-stable: alpha <= 1 has no finite mean");
        } else if constexpr (std::is_same_v<D, SkewT>) {
          if (!(d.nu > 1.0) || !std::isfinite(d.nu)) throw std::invalid_argument("skew-t: nu must be > 1");
          if (!(d.gamma > 0.0) || !std::isfinite(d.gamma)) throw std::invalid_argument("skew-t: gamma must be > 0");
        } else {
          if (!(d.sigma > 0.0) || !std::isfinite(d.sigma)) throw std::invalid_argument("gaussian: sigma must be > 0");
        }
      },
      dist);
}

[[nodiscard]] inline bool is_gaussian(const ErrorDistribution& dist) {
  if (std::holds_alternative<Gaussian>(dist)) return true;
  if (const auto* a = std::get_if<AlphaStable>(&dist)) return a->alpha == 2.0;
  return false;
}

/// E|t_nu| (needed for the skew-t centering), nu > 1.
[[nodiscard]] inline double student_abs_mean(double nu) {
  using boost::math::tgamma_ratio;
  return 2.0 * std::sqrt(nu) * tgamma_ratio((nu + 1.0) / 2.0, nu / 2.0) / (std::sqrt(std::numbers::pi) * (nu - 1.0));
}

/// Mean of the uncentered two-piece variable: E|t| (gamma - 1/gamma).
[[nodiscard]] inline double skew_t_mean(const SkewT& d) {
  return student_abs_mean(d.nu) * (d.gamma - 1.0 / d.gamma);
}

namespace detail {

inline double draw_stable(const AlphaStable& d, Engine& rng) {
  constexpr double pi = std::numbers::pi;
  boost::random::uniform_01<double> unif;
  boost::random::exponential_distribution<double> expo(1.0);
  double u = unif(rng);
  while (u == 0.0) u = unif(rng);
  const double V = pi * (u - 0.5);
  double W = expo(rng);
  while (W == 0.0) W = expo(rng);
  const double a = d.alpha, b = d.beta;
  if (a == 1.0) {
    const double h = pi / 2.0 + b * V;
    const double X = (2.0 / pi) * (h * std::tan(V) - b * std::log((pi / 2.0) * W * std::cos(V) / h));
    return d.eta * X + (2.0 / pi) * b * d.eta * std::log(d.eta) + d.delta;
  }
  const double t = b * std::tan(pi * a / 2.0);
  const double B = std::atan(t) / a;
  const double S = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
  const double X = S * std::sin(a * (V + B)) / std::pow(std::cos(V), 1.0 / a) *
                   std::pow(std::cos(V - a * (V + B)) / W, (1.0 - a) / a);
  return d.eta * X + d.delta;
}

}  // namespace detail

/// T iid draws, deterministic in `seed`.
[[nodiscard]] inline std::vector<double> sample_errors(const ErrorDistribution& dist, std::size_t T,
                                                       std::uint64_t seed) {
  if (T < 8) throw std::invalid_argument("sample length must be >= 8");
  validate_distribution(dist);
  Engine rng = make_engine(seed);
  std::vector<double> out(T);
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, AlphaStable>) {
          for (auto& v : out) v = detail::draw_stable(d, rng);
        } else if constexpr (std::is_same_v<D, SkewT>) {
          boost::random::student_t_distribution<double> student(d.nu);
          boost::random::uniform_01<double> unif;
          const double p_plus = d.gamma * d.gamma / (1.0 + d.gamma * d.gamma);
          const double shift = skew_t_mean(d);
          for (auto& v : out) {
            const double a = std::abs(student(rng));
            v = (unif(rng) < p_plus ? a * d.gamma : -a / d.gamma) - shift;
          }
        } else {
          boost::random::normal_distribution<double> normal(0.0, d.sigma);
          for (auto& v : out) v = normal(rng);
        }
      },
      dist);
  return out;
}

/// Parses "alpha-stable:a,b,eta,delta", "skew-t:nu,gamma" or "gaussian:sigma".
[[nodiscard]] inline ErrorDistribution parse_distribution(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("distribution must look like name:params, got '" + text + "'");
  const std::string name = text.substr(0, colon);
  std::vector<double> v;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("non-numeric distribution parameter '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("non-numeric distribution parameter '" + item + "'");
    v.push_back(x);
  }
  ErrorDistribution out;
  if (name == "alpha-stable") {
    if (v.size() != 4) throw std::invalid_argument("alpha-stable takes 4 parameters: alpha,beta,eta,delta");
    out = AlphaStable{v[0], v[1], v[2], v[3]};
  } else if (name == "skew-t") {
    if (v.size() != 2) throw std::invalid_argument("skew-t takes 2 parameters: nu,gamma");
    out = SkewT{v[0], v[1]};
  } else if (name == "gaussian") {
    if (v.size() != 1) throw std::invalid_argument("gaussian takes 1 parameter: sigma");
    out = Gaussian{v[0]};
  } else {
    throw std::invalid_argument("unknown distribution '" + name + "'");
  }
  validate_distribution(out);
  return out;
}

[[nodiscard]] inline std::string to_string(const ErrorDistribution& dist) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, AlphaStable>)
          os << "alpha-stable:" << d.alpha << ',' << d.beta << ',' << d.eta << ',' << d.delta;
        else if constexpr (std::is_same_v<D, SkewT>)
          os << "skew-t:" << d.nu << ',' << d.gamma;
        else
          os << "gaussian:" << d.sigma;
      },
      dist);
  return os.str();
}

}  // namespace marma
