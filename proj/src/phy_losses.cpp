#include "psckit/phy_losses.hpp"

#include <string>

namespace psckit {

FeatureMap::FeatureMap(std::size_t c, std::size_t h, std::size_t w, std::vector<double> values)
    : channels(c), height(h), width(w), data(std::move(values)) {
  if (data.size() != c * h * w) {
    throw DimensionError("feature map data length " + std::to_string(data.size()) +
                         " does not match " + std::to_string(c) + "x" + std::to_string(h) + "x" +
                         std::to_string(w));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericalError("feature map value is not finite");
  }
}

FeatureStack::FeatureStack(std::vector<FeatureMap> levels) : maps(std::move(levels)) {
  if (maps.empty()) throw DimensionError("feature stack needs at least one level");
}

void PhyLossWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  if (!(std::isfinite(beta) && beta >= 0.0)) throw ParameterError("beta must be non-negative");
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ParameterError("gamma must be non-negative");
}

std::array<double, 10> che_embed(double theta_rad) {
  std::array<double, 10> out{};
  for (int k = 1; k <= 5; ++k) {
    out[2 * (k - 1)] = std::sin(k * theta_rad);
    out[2 * (k - 1) + 1] = std::cos(k * theta_rad);
  }
  return out;
}

double d_combine(double d_img, double d_phy, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  return alpha * d_img + (1.0 - alpha) * d_phy;
}

double loss_phy_s(const RealImage& s, const RealImage& s_tilde) {
  if (!s.same_shape(s_tilde)) throw DimensionError("EM reconstructions differ in shape");
  if (s.empty()) throw DimensionError("EM reconstructions are empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s.data()[i] - s_tilde.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(s.size());
}

namespace {

double level_distance(const FeatureMap& a, const FeatureMap& b, std::size_t level) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw DimensionError("feature level " + std::to_string(level) + " differs in shape");
  }
  if (a.size() == 0) throw DimensionError("feature level " + std::to_string(level) + " is empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc) / static_cast<double>(a.size());
}

}  // namespace

double loss_phy_f(const FeatureStack& phy_feats, const FeatureStack& img_feats) {
  if (phy_feats.maps.size() != img_feats.maps.size()) {
    throw DimensionError("feature stacks differ in depth");
  }
  if (phy_feats.maps.empty()) throw DimensionError("feature stacks are empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < phy_feats.maps.size(); ++i) {
    acc += level_distance(phy_feats.maps[i], img_feats.maps[i], i);
  }
  return acc;
}

double loss_phy_g(const RealImage& s, const RealImage& s_tilde, const FeatureStack& phy_feats,
                  const FeatureStack& img_feats, const PhyLossWeights& weights) {
  weights.validate();
  return weights.beta * loss_phy_s(s, s_tilde) + weights.gamma * loss_phy_f(phy_feats, img_feats);
}

double loss_phy_d(const FeatureStack& img_feats_fake, const FeatureStack& phy_feats_fake,
                  const FeatureStack& img_feats_real, const FeatureStack& phy_feats_real,
                  double gamma) {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ParameterError("gamma must be non-negative");
  const std::size_t m = img_feats_fake.maps.size();
  if (phy_feats_fake.maps.size() != m || img_feats_real.maps.size() != m ||
      phy_feats_real.maps.size() != m) {
    throw DimensionError("feature stacks differ in depth");
  }
  if (m == 0) throw DimensionError("feature stacks are empty");
  for (std::size_t i = 0; i < m; ++i) {
    const auto& ref = img_feats_fake.maps[i];
    const auto& real = img_feats_real.maps[i];
    if (real.channels != ref.channels || real.height != ref.height || real.width != ref.width) {
      throw DimensionError("real and fake features differ in shape at level " + std::to_string(i));
    }
  }
  // Fake and real terms are summed separately so the result matches
  // gamma * (loss_phy_f(fake) + loss_phy_f(real)) bit for bit.
  const double fake = loss_phy_f(phy_feats_fake, img_feats_fake);
  const double real = loss_phy_f(phy_feats_real, img_feats_real);
  return gamma * (fake + real);
}

}  // namespace psckit
