#pragma once

// Thin RAII wrapper over FFTW's real transforms. Planning goes through a
// process-wide mutex because the FFTW planner is not re-entrant; execution
// on distinct plans is thread safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace boltscope::fft {

namespace detail {
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Forward real-to-complex transform of fixed length n (unnormalized).
class RealForward {
public:
  explicit RealForward(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("RealForward: length must be > 0");
    in_ = fftw_alloc_real(n_);
    out_ = fftw_alloc_complex(n_ / 2 + 1);
    std::lock_guard lock(detail::planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in_, out_, FFTW_ESTIMATE);
  }
  RealForward(const RealForward&) = delete;
  RealForward& operator=(const RealForward&) = delete;
  ~RealForward() {
    {
      std::lock_guard lock(detail::planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Input buffer, length size(). Fill, then call execute().
  std::span<double> input() { return {in_, n_}; }

  void execute() { fftw_execute(plan_); }

  std::complex<double> bin(std::size_t k) const { return {out_[k][0], out_[k][1]}; }
  double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

/// Inverse complex-to-real transform; returns sum_k X_k e^{+2 pi i k n / N}
/// (unnormalized, hermitian half-spectrum of n/2+1 bins in).
inline std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n) {
  if (half.size() != n / 2 + 1) throw std::invalid_argument("inverse_real: expected n/2+1 bins");
  double* out = fftw_alloc_real(n);
  fftw_complex* in = fftw_alloc_complex(half.size());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  // c2r planning may clobber the input, so fill after planning.
  for (std::size_t k = 0; k < half.size(); ++k) {
    in[k][0] = half[k].real();
    in[k][1] = half[k].imag();
  }
  fftw_execute(plan);
  std::vector<double> result(out, out + n);
  {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  fftw_free(in);
  return result;
}

}  // namespace boltscope::fft
