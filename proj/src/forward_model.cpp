#include "psckit/forward_model.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "psckit/detail/fft.hpp"

namespace psckit {

namespace {

// Signed DFT index in [-n/2, n/2).
long wrapped_index(std::size_t k, std::size_t n) {
  const auto kk = static_cast<long>(k);
  return k < (n + 1) / 2 ? kk : kk - static_cast<long>(n);
}

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": operand length " + std::to_string(got) +
                         " does not match dictionary grid size " + std::to_string(want));
  }
}

}  // namespace

ComplexImage psc_response(const PscSet& pscs, const RadarConfig& config) {
  config.validate();
  for (const auto& c : pscs.centers) {
    if (!config.contains(c.x, c.y)) {
      throw ConfigError("scattering center (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                        ") lies outside the scene extent");
    }
  }
  const double k4pi = 4.0 * std::numbers::pi / config.c_mps;
  std::vector<cplx> samples(config.num_freq * config.num_aspect);
  for (std::size_t n = 0; n < config.num_aspect; ++n) {
    const double phi = config.aspect(n);
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    for (std::size_t m = 0; m < config.num_freq; ++m) {
      const double k = k4pi * config.frequency(m);
      cplx acc{0.0, 0.0};
      for (const auto& c : pscs.centers) {
        const double phase = -k * (c.x * cp + c.y * sp);
        acc += c.amplitude * cplx(std::cos(phase), std::sin(phase));
      }
      samples[m * config.num_aspect + n] = acc;
    }
  }
  return ComplexImage(config.num_freq, config.num_aspect, std::move(samples));
}

double taylor_weight(double u, int nbar, double sidelobe_db) {
  const double pi = std::numbers::pi;
  const double ratio = std::pow(10.0, sidelobe_db / 20.0);
  const double a = std::acosh(ratio) / pi;
  const double nb = static_cast<double>(nbar);
  const double sigma2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));
  auto shape = [&](double x) {
    double w = 1.0;
    for (int m = 1; m < nbar; ++m) {
      const double md = static_cast<double>(m);
      double num = 1.0;
      double den = 1.0;
      for (int n = 1; n < nbar; ++n) {
        const double nd = static_cast<double>(n);
        num *= 1.0 - md * md / (sigma2 * (a * a + (nd - 0.5) * (nd - 0.5)));
        if (n != m) den *= 1.0 - md * md / (nd * nd);
      }
      const double fm = ((m % 2 == 1) ? 1.0 : -1.0) * num / (2.0 * den);
      w += 2.0 * fm * std::cos(2.0 * pi * md * x);
    }
    return w;
  };
  return shape(u) / shape(0.0);
}

ComplexImage band_window(const RadarConfig& config) {
  config.validate();
  const std::size_t h = config.grid_h;
  const std::size_t w = config.grid_w;
  const double kx_carrier = 2.0 * config.center_freq_hz / config.c_mps;
  // DFT bin spacing in cycles per meter; both axes span 2 * scene_extent_m.
  const double bin = 1.0 / (2.0 * config.scene_extent_m);
  const double f_tol = 1e-12 * config.center_freq_hz;
  const double phi_tol = 1e-12;

  std::vector<double> raw(h * w, 0.0);
  for (std::size_t u = 0; u < h; ++u) {
    const double kx = kx_carrier + static_cast<double>(wrapped_index(u, h)) * bin;
    for (std::size_t v = 0; v < w; ++v) {
      const double ky = static_cast<double>(wrapped_index(v, w)) * bin;
      if (kx <= 0.0) continue;
      const double f = 0.5 * config.c_mps * std::hypot(kx, ky);
      const double dphi = std::atan2(ky, kx);
      const double df = f - config.center_freq_hz;
      if (std::abs(df) > 0.5 * config.bandwidth_hz + f_tol) continue;
      if (std::abs(dphi) > 0.5 * config.aspect_span_rad + phi_tol) continue;
      double weight = 1.0;
      if (config.taylor_taper) {
        if (config.bandwidth_hz > 0.0) {
          weight *= taylor_weight(std::clamp(df / config.bandwidth_hz, -0.5, 0.5));
        }
        if (config.aspect_span_rad > 0.0) {
          weight *= taylor_weight(std::clamp(dphi / config.aspect_span_rad, -0.5, 0.5));
        }
      }
      raw[u * w + v] = weight;
    }
  }

  std::vector<cplx> d(h * w);
  for (std::size_t u = 0; u < h; ++u) {
    const std::size_t um = (h - u) % h;
    for (std::size_t v = 0; v < w; ++v) {
      const std::size_t vm = (w - v) % w;
      d[u * w + v] = std::max(raw[u * w + v], raw[um * w + vm]);
    }
  }
  return ComplexImage(h, w, std::move(d));
}

Dictionary::Dictionary(RadarConfig config, ComplexImage window_spectrum, double epsilon)
    : config_(std::move(config)), window_(std::move(window_spectrum)), epsilon_(epsilon) {
  if (window_.height() != config_.grid_h || window_.width() != config_.grid_w) {
    throw DimensionError("window spectrum is " + std::to_string(window_.height()) + "x" +
                         std::to_string(window_.width()) + " but the grid is " +
                         std::to_string(config_.grid_h) + "x" + std::to_string(config_.grid_w));
  }
  if (!(std::isfinite(epsilon_) && epsilon_ > 0.0)) {
    throw ParameterError("dictionary epsilon must be positive");
  }
  const std::size_t h = window_.height();
  const std::size_t w = window_.width();
  const std::size_t n = window_.size();
  const auto d = window_.data();

  const double peak = max_response();
  hermitian_ = true;
  for (std::size_t u = 0; u < h && hermitian_; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const cplx mirror = d[((h - u) % h) * w + (w - v) % w];
      if (std::abs(d[u * w + v] - std::conj(mirror)) > 1e-12 * std::max(peak, 1.0)) {
        hermitian_ = false;
        break;
      }
    }
  }

  // Unitary normalization 1/n is folded into every transfer function.
  const double scale = 1.0 / static_cast<double>(n);
  transfer_.assign(kTransferCount, std::vector<cplx>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const cplx dk = d[k];
    const double inv = 1.0 / (std::norm(dk) + epsilon_);
    transfer_[kForward][k] = dk * scale;
    transfer_[kAdjoint][k] = std::conj(dk) * scale;
    transfer_[kGramInverse][k] = cplx(inv * scale, 0.0);
    transfer_[kPinv][k] = std::conj(dk) * (inv * scale);
    transfer_[kPinvAdjoint][k] = dk * (inv * scale);
  }
  fft_ = std::make_shared<const detail::Fft2d>(h, w);
}

double Dictionary::support_fraction() const noexcept {
  const auto d = window_.data();
  const auto nonzero = std::count_if(d.begin(), d.end(), [](const cplx& v) { return v != cplx{}; });
  return static_cast<double>(nonzero) / static_cast<double>(d.size());
}

double Dictionary::max_response() const noexcept {
  double peak = 0.0;
  for (const cplx& v : window_.data()) peak = std::max(peak, std::abs(v));
  return peak;
}

std::vector<cplx> Dictionary::filter(std::span<const cplx> in, Transfer which) const {
  check_length(in.size(), size(), "dictionary operator");
  std::vector<cplx> buf(in.begin(), in.end());
  fft_->forward(buf);
  const auto& tf = transfer_[which];
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= tf[k];
  fft_->backward(buf);
  return buf;
}

std::vector<double> Dictionary::filter_real(std::span<const double> in, Transfer which) const {
  if (!hermitian_) {
    throw ParameterError("real-valued dictionary operators need a Hermitian-symmetric window");
  }
  check_length(in.size(), size(), "dictionary operator");
  std::vector<cplx> buf(in.begin(), in.end());
  fft_->forward(buf);
  const auto& tf = transfer_[which];
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= tf[k];
  fft_->backward(buf);
  std::vector<double> out(buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) out[k] = buf[k].real();
  return out;
}

std::vector<cplx> Dictionary::apply(std::span<const cplx> o) const { return filter(o, kForward); }
std::vector<double> Dictionary::apply(std::span<const double> o) const {
  return filter_real(o, kForward);
}
std::vector<cplx> Dictionary::adjoint(std::span<const cplx> r) const { return filter(r, kAdjoint); }
std::vector<double> Dictionary::adjoint(std::span<const double> r) const {
  return filter_real(r, kAdjoint);
}
std::vector<cplx> Dictionary::gram_inverse_apply(std::span<const cplx> v) const {
  return filter(v, kGramInverse);
}
std::vector<double> Dictionary::gram_inverse_apply(std::span<const double> v) const {
  return filter_real(v, kGramInverse);
}
std::vector<cplx> Dictionary::pinv_apply(std::span<const cplx> v) const { return filter(v, kPinv); }
std::vector<double> Dictionary::pinv_apply(std::span<const double> v) const {
  return filter_real(v, kPinv);
}
std::vector<cplx> Dictionary::pinv_adjoint(std::span<const cplx> v) const {
  return filter(v, kPinvAdjoint);
}
std::vector<double> Dictionary::pinv_adjoint(std::span<const double> v) const {
  return filter_real(v, kPinvAdjoint);
}

Dictionary build_dictionary(const RadarConfig& config) {
  return Dictionary(config, band_window(config), config.gram_epsilon);
}

Dictionary identity_dictionary(const RadarConfig& config, double epsilon) {
  ComplexImage ones(config.grid_h, config.grid_w,
                    std::vector<cplx>(config.grid_size(), cplx(1.0, 0.0)));
  return Dictionary(config, std::move(ones), epsilon);
}

std::pair<std::size_t, std::size_t> psf_halfwidth_px(const Dictionary& dict) {
  const std::size_t h = dict.height();
  const std::size_t w = dict.width();
  const auto d = dict.window_spectrum().data();
  std::size_t rows_used = 0;
  for (std::size_t u = 0; u < h; ++u) {
    bool any = false;
    for (std::size_t v = 0; v < w && !any; ++v) any = d[u * w + v] != cplx{};
    rows_used += any ? 1 : 0;
  }
  std::size_t cols_used = 0;
  for (std::size_t v = 0; v < w; ++v) {
    bool any = false;
    for (std::size_t u = 0; u < h && !any; ++u) any = d[u * w + v] != cplx{};
    cols_used += any ? 1 : 0;
  }
  auto halfwidth = [](std::size_t used, std::size_t n) -> std::size_t {
    if (used == 0) return n;
    if (used == n) return 0;
    return (n + used - 1) / used;
  };
  return {halfwidth(rows_used, h), halfwidth(cols_used, w)};
}

namespace {

template <class T>
RealImage reconstruct_impl(const Dictionary& dict, const SparseCoeffs<T>& o) {
  if (o.height() != dict.height() || o.width() != dict.width()) {
    throw DimensionError("coefficient grid does not match dictionary grid");
  }
  const auto y = dict.apply(o.data());
  std::vector<double> mag(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) mag[i] = std::abs(y[i]);
  return RealImage(o.height(), o.width(), std::move(mag));
}

}  // namespace

RealImage reconstruct_image(const Dictionary& dict, const SparseCoeffs<double>& o) {
  return reconstruct_impl(dict, o);
}

RealImage reconstruct_image(const Dictionary& dict, const SparseCoeffs<cplx>& o) {
  return reconstruct_impl(dict, o);
}

}  // namespace psckit
