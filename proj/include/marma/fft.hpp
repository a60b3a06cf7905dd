#pragma once

// Thin FFTW wrapper: real-to-half-complex and back, plans cached per length.
// Plan creation is serialized (FFTW's planner is not thread-safe); execution
// through the new-array interface is.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace marma::fft {

namespace detail {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

struct PlanCache {
  std::mutex mutex;
  std::map<std::size_t, Plans> plans;

  ~PlanCache() {
    for (auto& [n, p] : plans) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

template <class T>
struct FftwBuffer {
  T* ptr;
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * (n == 0 ? 1 : n)))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

inline const Plans& plans_for(std::size_t n) {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto it = c.plans.find(n);
  if (it != c.plans.end()) return it->second;
  FftwBuffer<double> real(n);
  FftwBuffer<fftw_complex> cplx(n / 2 + 1);
  Plans p;
  const int ni = static_cast<int>(n);
  p.forward = fftw_plan_dft_r2c_1d(ni, real.ptr, cplx.ptr, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(ni, cplx.ptr, real.ptr, FFTW_ESTIMATE);
  if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
  return c.plans.emplace(n, p).first->second;
}

}  // namespace detail

/// X_k = sum_{t=0}^{n-1} x_t e^{-2 pi i k t / n}, k = 0..n/2.
[[nodiscard]] inline std::vector<std::complex<double>> forward_half(std::span<const double> x) {
  const std::size_t n = x.size();
  const auto& p = detail::plans_for(n);
  detail::FftwBuffer<double> in(n);
  detail::FftwBuffer<fftw_complex> out(n / 2 + 1);
  std::copy(x.begin(), x.end(), in.ptr);
  fftw_execute_dft_r2c(p.forward, in.ptr, out.ptr);
  std::vector<std::complex<double>> result(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) result[k] = {out.ptr[k][0], out.ptr[k][1]};
  return result;
}

/// x_t = sum_k X_k e^{2 pi i k t / n} over the Hermitian extension of the
/// half spectrum (unnormalized). Imaginary parts of X_0 and X_{n/2} are
/// ignored, i.e. the real part of the full inverse is returned.
[[nodiscard]] inline std::vector<double> backward_half(std::span<const std::complex<double>> half,
                                                       std::size_t n) {
  if (half.size() != n / 2 + 1) throw std::invalid_argument("half spectrum has wrong length");
  const auto& p = detail::plans_for(n);
  detail::FftwBuffer<fftw_complex> in(n / 2 + 1);
  detail::FftwBuffer<double> out(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    in.ptr[k][0] = half[k].real();
    in.ptr[k][1] = half[k].imag();
  }
  fftw_execute_dft_c2r(p.backward, in.ptr, out.ptr);
  return std::vector<double>(out.ptr, out.ptr + n);
}

}  // namespace marma::fft
