#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace psckit::detail {

// Unnormalized in-place 2D DFT over a row-major h x w buffer, backed by FFTW.
// Plans are created once; execution goes through the new-array interface and
// is safe to call concurrently on distinct buffers.
class Fft2d {
 public:
  Fft2d(std::size_t height, std::size_t width);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  std::size_t height_;
  std::size_t width_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace psckit::detail
