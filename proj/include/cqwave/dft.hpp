#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include "cqwave/errors.hpp"

namespace cqwave {

namespace detail {
// FFTW planning is not reentrant; execution on planned buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Length-n complex DFT. sign = -1 computes sum_j x_j exp(-2 pi i j k / n),
/// sign = +1 the conjugate kernel. Unnormalized in both directions.
class Dft {
 public:
  Dft(int n, int sign) : n_(n) {
    if (n < 1) throw InvalidArgument("DFT length must be >= 1");
    std::lock_guard lock(detail::fftw_planner_mutex());
    in_ = fftw_alloc_complex(static_cast<size_t>(n));
    out_ = fftw_alloc_complex(static_cast<size_t>(n));
    plan_ = fftw_plan_dft_1d(n, in_, out_, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Dft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  int size() const noexcept { return n_; }

  std::vector<std::complex<double>> operator()(std::span<const std::complex<double>> x) {
    if (static_cast<int>(x.size()) != n_) throw InvalidArgument("DFT input length mismatch");
    auto* in = reinterpret_cast<std::complex<double>*>(in_);
    std::copy(x.begin(), x.end(), in);
    fftw_execute(plan_);
    auto* out = reinterpret_cast<std::complex<double>*>(out_);
    return {out, out + n_};
  }

 private:
  int n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace cqwave
