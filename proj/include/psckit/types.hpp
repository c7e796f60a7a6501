#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "psckit/error.hpp"

namespace psckit {

using cplx = std::complex<double>;

inline bool is_finite(double v) noexcept { return std::isfinite(v); }
inline bool is_finite(const cplx& v) noexcept {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Row-major 2D sample grid. Element (row, col) lives at data[row * width + col].
template <class T>
class Image2D {
 public:
  using value_type = T;

  Image2D() = default;

  Image2D(std::size_t height, std::size_t width)
      : height_(height), width_(width), data_(height * width, T{}) {}

  Image2D(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw DimensionError("image data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(height_) + "x" +
                           std::to_string(width_));
    }
    for (const auto& v : data_) {
      if (!is_finite(v)) throw NumericalError("image sample is not finite");
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }
  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  bool same_shape(const Image2D& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image2D&, const Image2D&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using RealImage = Image2D<double>;
using ComplexImage = Image2D<cplx>;

// Sparse amplitude grids o and p share the image layout; T is double in
// magnitude mode and cplx in complex mode.
template <class T>
using SparseCoeffs = Image2D<T>;

template <class T>
std::vector<T> vectorize(const Image2D<T>& image) {
  return image.values();
}

template <class T>
Image2D<T> devectorize(std::size_t height, std::size_t width, std::span<const T> flat) {
  return Image2D<T>(height, width, std::vector<T>(flat.begin(), flat.end()));
}

RealImage magnitude(const ComplexImage& image);
ComplexImage to_complex(const RealImage& image);

struct ScatteringCenter {
  cplx amplitude{0.0, 0.0};
  double x = 0.0;  // range position, meters
  double y = 0.0;  // cross-range position, meters

  friend bool operator==(const ScatteringCenter&, const ScatteringCenter&) = default;
};

struct PscSet {
  std::vector<ScatteringCenter> centers;
  int class_label = 0;
  double azimuth_deg = 0.0;

  void validate() const;
  double azimuth_rad() const noexcept;
  friend bool operator==(const PscSet&, const PscSet&) = default;
};

// Union of two center lists; conditions are taken from `a`.
PscSet merge(const PscSet& a, const PscSet& b);

inline constexpr double kSpeedOfLight = 2.99792458e8;

struct PixelIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

// Sampling grid of (f, phi) plus the reconstruction-image geometry.
//
// Image rows map to range x and columns to cross-range y. Pixel (row, col)
// has center x = (row - grid_h/2) * dx, y = (col - grid_w/2) * dy with
// dx = 2 * scene_extent_m / grid_h and dy = 2 * scene_extent_m / grid_w.
struct RadarConfig {
  double center_freq_hz = 10.0e9;
  double bandwidth_hz = 600.0e6;
  std::size_t num_freq = 64;
  double center_aspect_rad = 0.0;
  double aspect_span_rad = 0.06;
  std::size_t num_aspect = 64;
  double scene_extent_m = 2.0;
  std::size_t grid_h = 32;
  std::size_t grid_w = 32;
  double c_mps = kSpeedOfLight;
  double gram_epsilon = 1e-8;
  bool taylor_taper = false;

  void validate() const;

  std::size_t grid_size() const noexcept { return grid_h * grid_w; }
  double dx() const noexcept { return 2.0 * scene_extent_m / static_cast<double>(grid_h); }
  double dy() const noexcept { return 2.0 * scene_extent_m / static_cast<double>(grid_w); }

  // Uniform samples spanning [center - span/2, center + span/2]; a single
  // sample sits at the center.
  double frequency(std::size_t m) const noexcept;
  double aspect(std::size_t n) const noexcept;

  std::pair<double, double> pixel_center(std::size_t row, std::size_t col) const noexcept;
  PixelIndex nearest_pixel(double x, double y) const;
  bool contains(double x, double y) const noexcept;

  friend bool operator==(const RadarConfig&, const RadarConfig&) = default;
};

}  // namespace psckit
