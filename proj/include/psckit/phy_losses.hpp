#pragma once

#include <array>
#include <vector>

#include "psckit/types.hpp"

namespace psckit {

struct FeatureMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;  // row-major (channel, row, col)

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w, std::vector<double> values);
  std::size_t size() const noexcept { return channels * height * width; }
};

// Per-layer features F^1..F^M taken from one discriminator.
struct FeatureStack {
  std::vector<FeatureMap> maps;

  FeatureStack() = default;
  explicit FeatureStack(std::vector<FeatureMap> levels);
};

struct PhyLossWeights {
  double alpha = 0.6;
  double beta = 1.0;
  double gamma = 10.0;

  void validate() const;
};

// [sin t, cos t, sin 2t, cos 2t, ..., sin 5t, cos 5t]
std::array<double, 10> che_embed(double theta_rad);

// alpha * d_img + (1 - alpha) * d_phy
double d_combine(double d_img, double d_phy, double alpha);

// Per-pixel mean squared error between EM reconstructions.
double loss_phy_s(const RealImage& s, const RealImage& s_tilde);

// sum_i ||A_i - B_i||_2 / (C_i H_i W_i)
double loss_phy_f(const FeatureStack& phy_feats, const FeatureStack& img_feats);

// beta * loss_phy_s + gamma * loss_phy_f
double loss_phy_g(const RealImage& s, const RealImage& s_tilde, const FeatureStack& phy_feats,
                  const FeatureStack& img_feats, const PhyLossWeights& weights);

// gamma * sum_i (||F_img(fake) - F_phy(fake)||_2 + ||F_img(real) - F_phy(real)||_2) / (C_i H_i W_i)
double loss_phy_d(const FeatureStack& img_feats_fake, const FeatureStack& phy_feats_fake,
                  const FeatureStack& img_feats_real, const FeatureStack& phy_feats_real,
                  double gamma);

}  // namespace psckit
