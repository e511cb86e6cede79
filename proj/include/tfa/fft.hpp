#pragma once

// Thin RAII layer over FFTW. Plans are built with FFTW_ESTIMATE so that the
// same sizes always produce the same plan and bit-identical results.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>

namespace tfa::fft {

using cplx = std::complex<double>;

enum class Direction { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

namespace detail {

struct FftwFree {
  void operator()(fftw_complex *p) const noexcept { fftw_free(p); }
};
struct PlanFree {
  void operator()(fftw_plan_s *p) const noexcept { fftw_destroy_plan(p); }
};

} // namespace detail

/// Unnormalized in-place DFT of fixed shape, reusable across many buffers.
/// Sign convention: Forward computes sum_n x[n] e^{-2 pi i k n / N}.
class Plan {
public:
  Plan(std::size_t rows, std::size_t cols, Direction dir)
      : rows_(rows), cols_(cols),
        buf_(fftw_alloc_complex(rows * cols)) {
    if (!buf_)
      throw std::bad_alloc();
    const int sign = static_cast<int>(dir);
    fftw_plan p = rows == 1
                      ? fftw_plan_dft_1d(static_cast<int>(cols), buf_.get(),
                                         buf_.get(), sign, FFTW_ESTIMATE)
                      : fftw_plan_dft_2d(static_cast<int>(rows),
                                         static_cast<int>(cols), buf_.get(),
                                         buf_.get(), sign, FFTW_ESTIMATE);
    if (!p)
      throw std::runtime_error("fftw plan creation failed");
    plan_.reset(p);
  }

  std::size_t size() const { return rows_ * cols_; }

  /// Transform `data` in place (row-major, rows x cols).
  void execute(std::span<cplx> data) const {
    if (data.size() != size())
      throw std::invalid_argument("fft: buffer size does not match plan");
    auto *b = reinterpret_cast<cplx *>(buf_.get());
    std::copy(data.begin(), data.end(), b);
    fftw_execute(plan_.get());
    std::copy(b, b + size(), data.begin());
  }

private:
  std::size_t rows_, cols_;
  std::unique_ptr<fftw_complex, detail::FftwFree> buf_;
  std::unique_ptr<fftw_plan_s, detail::PlanFree> plan_;
};

inline void dft(std::span<cplx> data, Direction dir) {
  Plan(1, data.size(), dir).execute(data);
}

inline void dft2(std::span<cplx> data, std::size_t rows, std::size_t cols,
                 Direction dir) {
  Plan(rows, cols, dir).execute(data);
}

} // namespace tfa::fft
