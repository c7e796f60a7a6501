#include "psckit/types.hpp"

#include <numbers>
#include <string>

namespace psckit {

RealImage magnitude(const ComplexImage& image) {
  std::vector<double> out(image.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(image.data()[i]);
  return RealImage(image.height(), image.width(), std::move(out));
}

ComplexImage to_complex(const RealImage& image) {
  std::vector<cplx> out(image.data().begin(), image.data().end());
  return ComplexImage(image.height(), image.width(), std::move(out));
}

void PscSet::validate() const {
  if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0)) {
    throw ConfigError("azimuth_deg must lie in [0, 360), got " + std::to_string(azimuth_deg));
  }
  if (class_label < 0) throw ConfigError("class_label must be non-negative");
  for (const auto& c : centers) {
    if (!is_finite(c.amplitude) || !std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw NumericalError("scattering center has non-finite fields");
    }
  }
}

double PscSet::azimuth_rad() const noexcept { return azimuth_deg * std::numbers::pi / 180.0; }

PscSet merge(const PscSet& a, const PscSet& b) {
  PscSet out = a;
  out.centers.insert(out.centers.end(), b.centers.begin(), b.centers.end());
  return out;
}

void RadarConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(center_freq_hz) && center_freq_hz > 0.0, "center_freq_hz must be positive");
  require(std::isfinite(bandwidth_hz) && bandwidth_hz >= 0.0, "bandwidth_hz must be non-negative");
  require(bandwidth_hz < 2.0 * center_freq_hz, "bandwidth_hz must be below 2 * center_freq_hz");
  require(num_freq >= 1, "num_freq must be at least 1");
  require(num_aspect >= 1, "num_aspect must be at least 1");
  require(std::isfinite(center_aspect_rad), "center_aspect_rad must be finite");
  require(std::isfinite(aspect_span_rad) && aspect_span_rad >= 0.0,
          "aspect_span_rad must be non-negative");
  require(aspect_span_rad < std::numbers::pi / 2.0,
          "aspect_span_rad must be below pi/2 (small-angle regime)");
  require(std::isfinite(scene_extent_m) && scene_extent_m > 0.0, "scene_extent_m must be positive");
  require(grid_h >= 1 && grid_w >= 1, "grid_h and grid_w must be at least 1");
  require(std::isfinite(c_mps) && c_mps > 0.0, "c_mps must be positive");
  require(std::isfinite(gram_epsilon) && gram_epsilon > 0.0, "gram_epsilon must be positive");
}

double RadarConfig::frequency(std::size_t m) const noexcept {
  if (num_freq == 1) return center_freq_hz;
  return center_freq_hz - 0.5 * bandwidth_hz +
         bandwidth_hz * static_cast<double>(m) / static_cast<double>(num_freq - 1);
}

double RadarConfig::aspect(std::size_t n) const noexcept {
  if (num_aspect == 1) return center_aspect_rad;
  return center_aspect_rad - 0.5 * aspect_span_rad +
         aspect_span_rad * static_cast<double>(n) / static_cast<double>(num_aspect - 1);
}

std::pair<double, double> RadarConfig::pixel_center(std::size_t row, std::size_t col) const noexcept {
  const double r = static_cast<double>(row) - static_cast<double>(grid_h / 2);
  const double c = static_cast<double>(col) - static_cast<double>(grid_w / 2);
  return {r * dx(), c * dy()};
}

PixelIndex RadarConfig::nearest_pixel(double x, double y) const {
  const double r = std::round(x / dx()) + static_cast<double>(grid_h / 2);
  const double c = std::round(y / dy()) + static_cast<double>(grid_w / 2);
  if (!(r >= 0.0 && r < static_cast<double>(grid_h) && c >= 0.0 && c < static_cast<double>(grid_w))) {
    throw ConfigError("position (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") falls outside the reconstruction grid");
  }
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

bool RadarConfig::contains(double x, double y) const noexcept {
  const double tol = 1e-9 * scene_extent_m;
  return std::abs(x) <= scene_extent_m + tol && std::abs(y) <= scene_extent_m + tol;
}

}  // namespace psckit
