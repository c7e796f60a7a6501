#include "psckit/detail/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "psckit/error.hpp"

namespace psckit::detail {

namespace {

// FFTW's planner and plan destruction are not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft2d::Fft2d(std::size_t height, std::size_t width) : height_(height), width_(width) {
  if (height == 0 || width == 0) throw DimensionError("FFT grid must be non-empty");
  std::vector<std::complex<double>> scratch(height * width);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width),
                                   as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width),
                                    as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) throw Error("FFTW planning failed");
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Fft2d::forward(std::span<std::complex<double>> data) const {
  if (data.size() != height_ * width_) throw DimensionError("FFT buffer size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft2d::backward(std::span<std::complex<double>> data) const {
  if (data.size() != height_ * width_) throw DimensionError("FFT buffer size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace psckit::detail
