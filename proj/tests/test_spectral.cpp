#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include <marma/spectral.hpp>

#include "oracles.hpp"
#include "support.hpp"

using namespace marma;

TEST(FrequencyGrid, SpacingAndWrap) {
  const FrequencyGrid g(10);
  EXPECT_EQ(g.omega(0), 0.0);
  for (std::size_t j = 1; j < 10; ++j) {
    EXPECT_GT(g.omega(j), g.omega(j - 1));
    EXPECT_NEAR(g.omega(j) - g.omega(j - 1), kTwoPi / 10.0, 1e-15);
  }
  EXPECT_EQ(g.wrap(-1), 9u);
  EXPECT_EQ(g.wrap(23), 3u);
}

TEST(Dft, ConstantSeries) {
  const std::vector<double> y(16, 2.5);
  const auto d = dft(y);
  EXPECT_NEAR(d[0].real(), 40.0, 1e-12);
  for (std::size_t j = 1; j < 16; ++j) EXPECT_LT(std::abs(d[j]), 1e-12);
}

TEST(Dft, UnitImpulseAtFirstTime) {
  // T = 4 is below the series minimum, so check the grid-level primitive on T = 8
  // and the T = 4 phase law by hand.
  std::vector<double> y(8, 0.0);
  y[0] = 1.0;
  const auto d = dft(y);
  for (std::size_t j = 0; j < 8; ++j) {
    const double w = kTwoPi * static_cast<double>(j) / 8.0;
    EXPECT_NEAR(d[j].real(), std::cos(w), 1e-15);
    EXPECT_NEAR(d[j].imag(), -std::sin(w), 1e-15);
  }
}

TEST(Dft, MatchesNaiveSum) {
  const auto y = support::gaussian_series(64, 11);
  const auto d = dft(y);
  const auto n = oracle::naive_dft(y);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_LT(std::abs(d[j] - n[j]), 1e-10);
}

TEST(Dft, OddLengthMatchesNaiveSum) {
  const auto y = support::gaussian_series(45, 12);
  const auto d = dft(y);
  const auto n = oracle::naive_dft(y);
  for (std::size_t j = 0; j < 45; ++j) EXPECT_LT(std::abs(d[j] - n[j]), 1e-10);
}

TEST(Dft, RejectsShortOrNonFinite) {
  EXPECT_THROW((void)dft(std::vector<double>(4, 1.0)), std::invalid_argument);
  std::vector<double> y(16, 0.0);
  y[3] = NAN;
  EXPECT_THROW((void)dft(y), std::invalid_argument);
}

TEST(Dft, InverseRoundTrip) {
  const auto y = support::gaussian_series(37, 13);
  const FrequencyGrid g(37);
  const auto back = inverse_dft(dft(y, g), g);
  EXPECT_LT(support::max_abs_diff(back, y), 1e-12);
}

TEST(Periodogram, ZeroSeries) {
  const SpectralData s(std::vector<double>(32, 0.0));
  for (double v : s.periodogram()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.biperiodogram(3, 5), cplx(0.0));
}

TEST(Periodogram, GaussianMeanNearFlatSpectrum) {
  const SpectralData s(support::gaussian_series(512, 14));
  double m = 0.0;
  for (std::size_t j = 1; j < 512; ++j) m += s.periodogram()[j];
  m /= 511.0;
  EXPECT_NEAR(m, 1.0 / kTwoPi, 0.15 / kTwoPi);
}

TEST(SpectralData, ParsevalAndConjugateSymmetry) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpectralData s(support::gaussian_series(100 + seed, seed), false);
    EXPECT_LT(s.parseval_error(), 1e-8);
    const auto& d = s.dft();
    for (std::size_t j = 1; j < s.T(); ++j) EXPECT_EQ(d[s.T() - j], std::conj(d[j]));
  }
}

TEST(SpectralData, DemeanFlag) {
  std::vector<double> y = support::gaussian_series(64, 3);
  for (double& v : y) v += 5.0;
  const SpectralData a(y), b(y, false);
  EXPECT_TRUE(a.demeaned());
  EXPECT_FALSE(b.demeaned());
  EXPECT_LT(std::abs(a.dft()[0]), 1e-10);
  EXPECT_GT(std::abs(b.dft()[0]), 100.0);
}

TEST(Biperiodogram, MatchesTripleProductOracle) {
  const auto y = support::gaussian_series(32, 15);
  const SpectralData s(y, false);
  const auto n = oracle::naive_dft(y);
  for (std::size_t j = 1; j < 32; ++j)
    for (std::size_t i = 1; i < 32; ++i) EXPECT_LT(std::abs(s.biperiodogram(j, i) - oracle::naive_biperiodogram(n, j, i)), 1e-10);
}

TEST(Biperiodogram, ExchangeAndReflectionSymmetry) {
  const SpectralData s(support::centered_exponential(40, 16));
  const std::size_t T = s.T();
  for (std::size_t j = 1; j < T; ++j)
    for (std::size_t i = 1; i < T; ++i) {
      EXPECT_EQ(s.biperiodogram(j, i), s.biperiodogram(i, j));
      const cplx a = s.biperiodogram(j, i), b = std::conj(s.biperiodogram(T - j, T - i));
      EXPECT_LT(std::abs(a - b), 1e-12 * (1.0 + std::abs(a)));
    }
}

TEST(Biperiodogram, IndexRange) {
  const SpectralData s(support::gaussian_series(16, 1));
  EXPECT_THROW((void)s.biperiodogram(0, 3), std::out_of_range);
  EXPECT_THROW((void)s.biperiodogram(3, 16), std::out_of_range);
}

TEST(Biperiodogram, MaterializedMatchesOnDemand) {
  const SpectralData s(support::centered_exponential(50, 17));
  std::vector<cplx> before;
  for (std::size_t j = 1; j < 50; ++j)
    for (std::size_t i = 1; i < 50; ++i) before.push_back(s.biperiodogram(j, i));
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) pool.emplace_back([&] { s.materialize_biperiodogram(); });
  for (auto& t : pool) t.join();
  EXPECT_TRUE(s.biperiodogram_materialized());
  std::size_t k = 0;
  for (std::size_t j = 1; j < 50; ++j)
    for (std::size_t i = 1; i < 50; ++i) EXPECT_EQ(s.biperiodogram(j, i), before[k++]);
}

TEST(Biperiodogram, MaterializationGate) {
  const SpectralData s(support::gaussian_series(kMaxMaterializedT + 1, 2));
  EXPECT_THROW(s.materialize_biperiodogram(), std::length_error);
}

TEST(TransferFunction, IdentityAndMaAtZero) {
  const FrequencyGrid g(16);
  for (const auto& v : transfer_function({}, {}, g)) EXPECT_EQ(v, cplx(1.0));
  EXPECT_NEAR(transfer_function({0, 0, 1, 0}, {{}, {}, {0.5}, {}}, g)[0].real(), 1.5, 1e-15);
}

TEST(TransferFunction, MatchesLaurentSum) {
  const ModelOrder o{1, 1, 1, 1};
  const ParamVector th{{0.7}, {-0.2}, {0.5}, {0.3}};
  const FrequencyGrid g(64);
  const auto psi = transfer_function(o, th, g);
  const auto e = psi_weights(o, th);
  for (std::size_t j = 0; j < 64; ++j) {
    cplx s = 0.0;
    for (std::ptrdiff_t k = e.min_offset(); k <= e.max_offset(); ++k)
      s += e.at(k) * std::polar(1.0, -static_cast<double>(k) * g.omega(j));
    EXPECT_LT(std::abs(psi[j] - s), 1e-8);
  }
}

TEST(TransferFunction, RejectsInvalid) {
  EXPECT_THROW((void)transfer_function({1, 0, 0, 0}, {{1.0}, {}, {}, {}}, FrequencyGrid(16)), std::invalid_argument);
}

TEST(ModelSpectrum, WhiteNoiseAndArAtZero) {
  const FrequencyGrid g(32);
  for (double v : model_spectrum({}, {}, 2.0, g)) EXPECT_NEAR(v, 2.0 / kTwoPi, 1e-15);
  EXPECT_NEAR(model_spectrum({1, 0, 0, 0}, {{0.5}, {}, {}, {}}, 1.0, g)[0], 4.0 / kTwoPi, 1e-14);
  EXPECT_THROW((void)model_spectrum({}, {}, 0.0, g), std::invalid_argument);
}

TEST(ModelSpectrum, CausalAndNoncausalArAgree) {
  const FrequencyGrid g(128);
  const auto a = model_spectrum({1, 0, 0, 0}, {{0.5}, {}, {}, {}}, 1.0, g);
  const auto b = model_spectrum({0, 1, 0, 0}, {{}, {0.5}, {}, {}}, 1.0, g);
  EXPECT_LT(support::max_abs_diff(a, b), 1e-12);
}

TEST(ModelBispectrum, GaussianZeroAndSymmetry) {
  const FrequencyGrid g(32);
  const ModelOrder o{1, 1, 0, 0};
  const ParamVector th{{0.6}, {0.3}, {}, {}};
  EXPECT_EQ(model_bispectrum(o, th, 0.0, g, 3, 7), cplx(0.0));
  EXPECT_EQ(model_bispectrum(o, th, 1.0, g, 3, 7), model_bispectrum(o, th, 1.0, g, 7, 3));
}

TEST(ModelBispectrum, SeparatesCausalFromNoncausal) {
  const FrequencyGrid g(32);
  const auto a = model_bispectrum({1, 0, 0, 0}, {{0.5}, {}, {}, {}}, 1.0, g, 3, 5);
  const auto b = model_bispectrum({0, 1, 0, 0}, {{}, {0.5}, {}, {}}, 1.0, g, 3, 5);
  EXPECT_GT(std::abs(a - b), 1e-3 * std::abs(a));
}

// Root flips keep |psi|^2 (no rescaling needed under the lead convention)
// and change the bispectrum.
TEST(ModelSpectra, RootFlipInvariance) {
  const FrequencyGrid g(48);
  std::uint64_t seed = 40;
  for (const auto& o : support::special_case_orders()) {
    const auto th = support::random_params(o, seed++);
    const auto s0 = model_spectrum(o, th, 1.0, g);
    for (Factor f : kAllFactors) {
      if (order_of(o, f) == 0) continue;
      const auto [o2, th2] = flip_root(o, th, f, 0);
      const auto s1 = model_spectrum(o2, th2, 1.0, g);
      for (std::size_t j = 0; j < 48; ++j) EXPECT_NEAR(s1[j], s0[j], 1e-10 * s0[j]);
      double diff = 0.0, scale = 0.0;
      for (std::size_t j = 1; j < 48; ++j)
        for (std::size_t i = 1; i < 48; ++i) {
          diff = std::max(diff, std::abs(model_bispectrum(o, th, 1.0, g, j, i) - model_bispectrum(o2, th2, 1.0, g, j, i)));
          scale = std::max(scale, std::abs(model_bispectrum(o, th, 1.0, g, j, i)));
        }
      EXPECT_GT(diff, 1e-6 * scale) << o.to_string() << " flip " << factor_name(f);
    }
  }
}

TEST(TransferFunction, ModulusPositiveOnRandomModels) {
  const FrequencyGrid g(64);
  std::uint64_t seed = 70;
  for (const auto& o : support::special_case_orders())
    for (const auto& v : transfer_function(o, support::random_params(o, seed++), g)) {
      EXPECT_GT(std::norm(v), 0.0);
      EXPECT_NEAR((v * std::conj(v)).real(), std::norm(v), 1e-12 * std::norm(v));
    }
}

TEST(SampleCumulants, SecondAtZeroIsMeanSquare) {
  const auto y = support::gaussian_series(200, 5);
  double ms = 0.0;
  for (double v : y) ms += v * v;
  ms /= 200.0;
  EXPECT_NEAR(sample_cumulant2(y, 0), ms, 1e-14);
}

TEST(SampleCumulants, ThirdOrderSymmetrySet) {
  auto y = support::centered_exponential(400, 6);
  double m = 0.0;
  for (double v : y) m += v;
  for (double& v : y) v -= m / 400.0;
  for (long long j = -5; j <= 5; ++j)
    for (long long l = -5; l <= 5; ++l) {
      const double k = sample_cumulant3(y, j, l);
      EXPECT_EQ(k, sample_cumulant3(y, l, j));
      EXPECT_EQ(k, sample_cumulant3(y, -j, l - j));
      EXPECT_EQ(k, sample_cumulant3(y, l - j, -j));
      EXPECT_EQ(k, sample_cumulant3(y, j - l, -l));
      EXPECT_EQ(k, sample_cumulant3(y, -l, j - l));
    }
}

TEST(SampleCumulants, ExponentialThirdMoment) {
  const auto y = support::centered_exponential(100000, 8);
  EXPECT_NEAR(sample_cumulant3(y, 0, 0), 2.0, 0.2);
}

TEST(SampleCumulants, LagGate) {
  const auto y = support::gaussian_series(40, 1);
  EXPECT_THROW((void)sample_cumulant2(y, 10), std::invalid_argument);
  EXPECT_THROW((void)sample_cumulant3(y, 1, -10), std::invalid_argument);
}
