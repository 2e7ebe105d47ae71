#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace voxsae::dsp {

using Complex = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (kind, size) with FFTW_ESTIMATE, which is
// deterministic, and reused from any thread.
enum class PlanKind { R2C, C2C_Forward, C2C_Backward };

inline fftw_plan get_plan(PlanKind kind, int n) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(static_cast<int>(kind), n);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  fftw_plan plan = nullptr;
  if (kind == PlanKind::R2C) {
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  } else {
    fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan = fftw_plan_dft_1d(n, in, out, kind == PlanKind::C2C_Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  plans.emplace(key, plan);
  return plan;
}

}  // namespace detail

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Real FFT of `x` zero-padded (or truncated) to n points; returns n/2+1 bins.
inline std::vector<Complex> rfft(std::span<const double> x, std::size_t n) {
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  const std::size_t m = std::min(n, x.size());
  std::memcpy(in, x.data(), m * sizeof(double));
  for (std::size_t i = m; i < n; ++i) in[i] = 0.0;
  fftw_execute_dft_r2c(detail::get_plan(detail::PlanKind::R2C, static_cast<int>(n)), in, out);
  std::vector<Complex> result(n / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out[k][0], out[k][1]};
  fftw_free(in);
  fftw_free(out);
  return result;
}

/// Complex DFT. `inverse` applies the 1/n normalization.
inline std::vector<Complex> fft(std::span<const Complex> x, bool inverse = false) {
  const std::size_t n = x.size();
  fftw_complex* in = fftw_alloc_complex(n);
  fftw_complex* out = fftw_alloc_complex(n);
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = x[i].real();
    in[i][1] = x[i].imag();
  }
  const auto kind = inverse ? detail::PlanKind::C2C_Backward : detail::PlanKind::C2C_Forward;
  fftw_execute_dft(detail::get_plan(kind, static_cast<int>(n)), in, out);
  std::vector<Complex> result(n);
  const double scale = inverse ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0] * scale, out[i][1] * scale};
  fftw_free(in);
  fftw_free(out);
  return result;
}

}  // namespace voxsae::dsp
