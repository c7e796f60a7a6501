#include "psckit/metrics.hpp"

#include <algorithm>
#include <limits>

namespace psckit {

namespace {

void check_pair(const RealImage& x, const RealImage& y) {
  if (!x.same_shape(y)) {
    throw DimensionError("images differ in shape: " + std::to_string(x.height()) + "x" +
                         std::to_string(x.width()) + " vs " + std::to_string(y.height()) + "x" +
                         std::to_string(y.width()));
  }
  if (x.empty()) throw DimensionError("images are empty");
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> g(size * size);
  const double c = 0.5 * static_cast<double>(size - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double di = static_cast<double>(i) - c;
      const double dj = static_cast<double>(j) - c;
      const double v = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      g[i * size + j] = v;
      total += v;
    }
  }
  for (auto& v : g) v /= total;
  return g;
}

// Prewitt gradient magnitude with replicated borders.
std::vector<double> gradient_magnitude(const RealImage& img) {
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  auto at = [&](long r, long c) {
    r = std::clamp(r, 0L, h - 1);
    c = std::clamp(c, 0L, w - 1);
    return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  std::vector<double> out(img.size());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double gx = 0.0;
      double gy = 0.0;
      for (long k = -1; k <= 1; ++k) {
        gx += at(r + k, c - 1) - at(r + k, c + 1);
        gy += at(r - 1, c + k) - at(r + 1, c + k);
      }
      gx /= 3.0;
      gy /= 3.0;
      out[static_cast<std::size_t>(r * w + c)] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

}  // namespace

double ssim(const RealImage& x, const RealImage& y, double dynamic_range) {
  check_pair(x, y);
  if (!(std::isfinite(dynamic_range) && dynamic_range > 0.0)) {
    throw ParameterError("dynamic_range must be positive");
  }
  const std::size_t win = std::min<std::size_t>({11, x.height(), x.width()});
  const auto g = gaussian_window(win, 1.5);
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);

  const std::size_t rows = x.height() - win + 1;
  const std::size_t cols = x.width() - win + 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double mx = 0.0, my = 0.0, exx = 0.0, eyy = 0.0, exy = 0.0;
      for (std::size_t a = 0; a < win; ++a) {
        for (std::size_t b = 0; b < win; ++b) {
          const double wgt = g[a * win + b];
          const double xv = x(i + a, j + b);
          const double yv = y(i + a, j + b);
          mx += wgt * xv;
          my += wgt * yv;
          exx += wgt * (xv * xv);
          eyy += wgt * (yv * yv);
          exy += wgt * (xv * yv);
        }
      }
      const double mxy = mx * my;
      const double sxx = exx - mx * mx;
      const double syy = eyy - my * my;
      const double sxy = exy - mxy;
      const double num = (2.0 * mxy + c1) * (2.0 * sxy + c2);
      const double den = (mx * mx + my * my + c1) * (sxx + syy + c2);
      acc += num / den;
    }
  }
  return acc / static_cast<double>(rows * cols);
}

double gmsd(const RealImage& x, const RealImage& y, double dynamic_range) {
  check_pair(x, y);
  if (!(std::isfinite(dynamic_range) && dynamic_range > 0.0)) {
    throw ParameterError("dynamic_range must be positive");
  }
  const double scale = dynamic_range / 255.0;
  const double c = 170.0 * scale * scale;
  const auto g1 = gradient_magnitude(x);
  const auto g2 = gradient_magnitude(y);
  const std::size_t n = g1.size();
  if (n < 2) return 0.0;
  std::vector<double> q(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = (2.0 * g1[i] * g2[i] + c) / (g1[i] * g1[i] + g2[i] * g2[i] + c);
    mean += q[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : q) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(n - 1));
}

double mse(const RealImage& x, const RealImage& y) {
  check_pair(x, y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - y.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double psnr(const RealImage& x, const RealImage& y, double peak) {
  if (!(std::isfinite(peak) && peak > 0.0)) throw ParameterError("psnr peak must be positive");
  const double e = mse(x, y);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

RealImage minmax_scale(const RealImage& image, double dynamic_range) {
  if (image.empty()) return image;
  const auto [lo, hi] = std::minmax_element(image.data().begin(), image.data().end());
  const double span = *hi - *lo;
  std::vector<double> out(image.size(), 0.0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (image.data()[i] - *lo) / span * dynamic_range;
  }
  return RealImage(image.height(), image.width(), std::move(out));
}

double default_dynamic_range(const RealImage& x, const RealImage& y) {
  double peak = 0.0;
  for (double v : x.data()) peak = std::max(peak, std::abs(v));
  for (double v : y.data()) peak = std::max(peak, std::abs(v));
  return peak > 0.0 ? peak : 1.0;
}

MetricReport evaluate(const RealImage& ref, const RealImage& test, double dynamic_range) {
  MetricReport r;
  r.ssim = ssim(ref, test, dynamic_range);
  r.gmsd = gmsd(ref, test, dynamic_range);
  r.mse = mse(ref, test);
  r.psnr = psnr(ref, test, dynamic_range);
  return r;
}

json to_json(const MetricReport& report) {
  json j = {{"ssim", report.ssim}, {"gmsd", report.gmsd}, {"mse", report.mse}};
  j["psnr"] = std::isinf(report.psnr) ? json(nullptr) : json(report.psnr);
  return j;
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.ssim = jsonf::number(j, "ssim", "metrics");
  r.gmsd = jsonf::number(j, "gmsd", "metrics");
  r.mse = jsonf::number(j, "mse", "metrics");
  const json& p = jsonf::require(j, "psnr", "metrics");
  r.psnr = p.is_null() ? std::numeric_limits<double>::infinity() : jsonf::number(j, "psnr", "metrics");
  return r;
}

}  // namespace psckit
