#pragma once

#include <memory>
#include <span>
#include <vector>

#include "psckit/types.hpp"

namespace psckit {

namespace detail {
class Fft2d;
}

// Samples E(f_m, phi_n) = sum_i A_i exp(-j 4 pi f_m / c (x_i cos phi_n + y_i sin phi_n))
// on the config's num_freq x num_aspect grid (rows are frequencies).
ComplexImage psc_response(const PscSet& pscs, const RadarConfig& config);

// Dictionary Psi realized as a circulant operator F^H diag(d) F, where F is
// the unitary 2D DFT on the reconstruction grid and d the window spectrum.
// Each column of Psi is the image of a unit PSC at one pixel.
//
// Real-valued operands require a Hermitian-symmetric window so that Psi maps
// real grids to real grids; the real overloads throw ParameterError otherwise.
class Dictionary {
 public:
  Dictionary(RadarConfig config, ComplexImage window_spectrum, double epsilon);

  const RadarConfig& config() const noexcept { return config_; }
  const ComplexImage& window_spectrum() const noexcept { return window_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t height() const noexcept { return window_.height(); }
  std::size_t width() const noexcept { return window_.width(); }
  std::size_t size() const noexcept { return window_.size(); }
  bool hermitian() const noexcept { return hermitian_; }

  // Fraction of Fourier bins with nonzero response.
  double support_fraction() const noexcept;
  double max_response() const noexcept;

  // Psi o
  std::vector<cplx> apply(std::span<const cplx> o) const;
  std::vector<double> apply(std::span<const double> o) const;
  // Psi^H r
  std::vector<cplx> adjoint(std::span<const cplx> r) const;
  std::vector<double> adjoint(std::span<const double> r) const;
  // (Psi Psi^H + eps I)^{-1} v
  std::vector<cplx> gram_inverse_apply(std::span<const cplx> v) const;
  std::vector<double> gram_inverse_apply(std::span<const double> v) const;
  // Psi^H (Psi Psi^H + eps I)^{-1} v, fused into one transfer function.
  std::vector<cplx> pinv_apply(std::span<const cplx> v) const;
  std::vector<double> pinv_apply(std::span<const double> v) const;
  // Adjoint of pinv_apply: (Psi Psi^H + eps I)^{-1} Psi v.
  std::vector<cplx> pinv_adjoint(std::span<const cplx> v) const;
  std::vector<double> pinv_adjoint(std::span<const double> v) const;

 private:
  enum Transfer { kForward, kAdjoint, kGramInverse, kPinv, kPinvAdjoint, kTransferCount };

  std::vector<cplx> filter(std::span<const cplx> in, Transfer which) const;
  std::vector<double> filter_real(std::span<const double> in, Transfer which) const;

  RadarConfig config_;
  ComplexImage window_;
  double epsilon_;
  bool hermitian_ = false;
  std::vector<std::vector<cplx>> transfer_;
  std::shared_ptr<const detail::Fft2d> fft_;
};

// Window spectrum: indicator of the polar (f, phi) support resampled onto
// the rectangular Fourier grid of the reconstruction image (optionally
// Taylor-tapered), symmetrized so that d(k) = d(-k).
ComplexImage band_window(const RadarConfig& config);

Dictionary build_dictionary(const RadarConfig& config);

// Dictionary with an all-pass window, so Psi = I.
Dictionary identity_dictionary(const RadarConfig& config, double epsilon = 1e-8);

// Pixels per axis from a PSC to the first null of its mainlobe; 0 for an
// all-pass window. Index 0 is rows, index 1 is columns.
std::pair<std::size_t, std::size_t> psf_halfwidth_px(const Dictionary& dict);

// EM reconstruction |Psi o|.
RealImage reconstruct_image(const Dictionary& dict, const SparseCoeffs<double>& o);
RealImage reconstruct_image(const Dictionary& dict, const SparseCoeffs<cplx>& o);

// Taylor window sampled at normalized position u in [-1/2, 1/2].
double taylor_weight(double u, int nbar = 4, double sidelobe_db = 30.0);

}  // namespace psckit
