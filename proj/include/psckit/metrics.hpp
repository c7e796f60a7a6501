#pragma once

#include "psckit/io.hpp"
#include "psckit/types.hpp"

namespace psckit {

struct MetricReport {
  double ssim = 0.0;
  double gmsd = 0.0;
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
};

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// over "valid" window positions. Grids smaller than 11 shrink the window.
double ssim(const RealImage& x, const RealImage& y, double dynamic_range);

// Gradient magnitude similarity deviation: Prewitt gradients with replicated
// borders, c = 170 * (dynamic_range / 255)^2, sample standard deviation pooling.
double gmsd(const RealImage& x, const RealImage& y, double dynamic_range = 255.0);

double mse(const RealImage& x, const RealImage& y);
double psnr(const RealImage& x, const RealImage& y, double peak);

// Linearly maps [min, max] of the image onto [0, dynamic_range].
RealImage minmax_scale(const RealImage& image, double dynamic_range);

// Max over both images, or 1 if both are identically zero.
double default_dynamic_range(const RealImage& x, const RealImage& y);

MetricReport evaluate(const RealImage& ref, const RealImage& test, double dynamic_range);

json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const json& j);

}  // namespace psckit
