#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "psckit/forward_model.hpp"
#include "psckit/io.hpp"
#include "psckit/types.hpp"

namespace psckit {

struct SimConfig {
  std::size_t num_targets = 64;
  std::size_t centers_min = 1;
  std::size_t centers_max = 5;
  double amplitude_min = 400.0;
  double amplitude_max = 1000.0;
  double min_separation_px = 5.0;
  std::optional<int> speckle_looks;             // multiplicative gamma speckle
  std::optional<double> anisotropy_sigma_rad;   // Gaussian aspect window per center
  std::uint64_t seed = 0;
  bool complex_amplitudes = false;
  std::size_t num_classes = 1;
  RadarConfig radar;

  void validate() const;
};

json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const json& j, const std::string& path = "sim");

struct Sample {
  RealImage image;
  PscSet truth;
  int class_label = 0;
  double azimuth_deg = 0.0;
};

// Per-sample generator seeded from (seed, index) so samples are independent
// of generation order.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

// Pixel-aligned centers, pairwise separated by at least min_separation_px
// and kept a PSF half-width away from the image border.
PscSet gen_target(const SimConfig& config, const Dictionary& dict, std::mt19937_64& rng);

// exp(-(theta - theta_i)^2 / (2 sigma^2)) with the difference wrapped to (-pi, pi].
double anisotropy_factor(double theta_rad, double theta_i_rad, double sigma_rad);

// Mean-1 gamma draws with shape `looks`.
std::vector<double> speckle_field(std::size_t n, int looks, std::mt19937_64& rng);

// Psi applied to the pixel-aligned coefficient grid of `pscs`.
ComplexImage render_field(const Dictionary& dict, const PscSet& pscs);

// Applies anisotropy (when enabled) to the amplitudes, then forms the
// magnitude image and multiplies speckle (when enabled). The returned truth
// carries the effective amplitudes.
Sample render_sample(const Dictionary& dict, const PscSet& pscs, const SimConfig& config,
                     std::mt19937_64& rng);

std::vector<Sample> gen_dataset(const SimConfig& config);

// Writes one image and one truth file per sample plus manifest.json;
// returns the manifest path.
std::filesystem::path write_dataset(const std::vector<Sample>& samples, const SimConfig& config,
                                    const std::filesystem::path& dir);

struct LoadedDataset {
  SimConfig sim;
  RadarConfig radar;
  std::vector<Sample> samples;
};

LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

// Worker count from PSC_KIT_THREADS, defaulting to the hardware count.
std::size_t worker_threads();

}  // namespace psckit
