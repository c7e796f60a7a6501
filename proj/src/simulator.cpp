#include "psckit/simulator.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <thread>

namespace psckit {

void SimConfig::validate() const {
  radar.validate();
  if (centers_min > centers_max) throw ConfigError("centers_per_target: min exceeds max");
  if (!(std::isfinite(amplitude_min) && amplitude_min > 0.0 && amplitude_min <= amplitude_max &&
        std::isfinite(amplitude_max))) {
    throw ConfigError("amplitude_range must be positive with min <= max");
  }
  if (!(std::isfinite(min_separation_px) && min_separation_px >= 0.0)) {
    throw ConfigError("min_separation_px must be non-negative");
  }
  if (speckle_looks && *speckle_looks < 1) throw ConfigError("speckle_looks must be positive");
  if (anisotropy_sigma_rad && !(std::isfinite(*anisotropy_sigma_rad) && *anisotropy_sigma_rad > 0.0)) {
    throw ConfigError("anisotropy_sigma_rad must be positive");
  }
  if (num_classes < 1) throw ConfigError("num_classes must be at least 1");
}

json to_json(const SimConfig& c) {
  json j = {{"num_targets", c.num_targets},
            {"centers_per_target", {c.centers_min, c.centers_max}},
            {"amplitude_range", {c.amplitude_min, c.amplitude_max}},
            {"min_separation_px", c.min_separation_px},
            {"seed", c.seed},
            {"complex_amplitudes", c.complex_amplitudes},
            {"num_classes", c.num_classes},
            {"radar", to_json(c.radar)}};
  j["speckle_looks"] = c.speckle_looks ? json(*c.speckle_looks) : json("none");
  j["anisotropy_sigma_rad"] = c.anisotropy_sigma_rad ? json(*c.anisotropy_sigma_rad) : json("none");
  return j;
}

namespace {

std::pair<double, double> number_pair(const json& j, const std::string& key, const std::string& path) {
  const json& v = jsonf::require(j, key, path);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(jsonf::join(path, key) + ": expected [min, max]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

bool is_none(const json& v) { return v.is_null() || (v.is_string() && v.get<std::string>() == "none"); }

}  // namespace

SimConfig sim_config_from_json(const json& j, const std::string& path) {
  SimConfig c;
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  c.num_targets = jsonf::count(j, "num_targets", path);
  if (j.contains("centers_per_target")) {
    const auto [lo, hi] = number_pair(j, "centers_per_target", path);
    if (lo < 0 || hi < 0 || lo != std::floor(lo) || hi != std::floor(hi)) {
      throw ConfigError(jsonf::join(path, "centers_per_target") + ": expected non-negative integers");
    }
    c.centers_min = static_cast<std::size_t>(lo);
    c.centers_max = static_cast<std::size_t>(hi);
  }
  if (j.contains("amplitude_range")) {
    std::tie(c.amplitude_min, c.amplitude_max) = number_pair(j, "amplitude_range", path);
  }
  c.min_separation_px = jsonf::number_or(j, "min_separation_px", path, c.min_separation_px);
  if (j.contains("speckle_looks") && !is_none(j.at("speckle_looks"))) {
    c.speckle_looks = static_cast<int>(jsonf::integer(j, "speckle_looks", path));
  }
  if (j.contains("anisotropy_sigma_rad") && !is_none(j.at("anisotropy_sigma_rad"))) {
    c.anisotropy_sigma_rad = jsonf::number(j, "anisotropy_sigma_rad", path);
  }
  c.seed = jsonf::count_or(j, "seed", path, 0);
  c.complex_amplitudes = jsonf::boolean_or(j, "complex_amplitudes", path, false);
  c.num_classes = jsonf::count_or(j, "num_classes", path, 1);
  if (j.contains("radar")) c.radar = radar_config_from_json(j.at("radar"), jsonf::join(path, "radar"));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

PscSet gen_target(const SimConfig& config, const Dictionary& dict, std::mt19937_64& rng) {
  config.validate();
  const auto& radar = config.radar;
  const auto [margin_r, margin_c] = psf_halfwidth_px(dict);
  if (2 * margin_r >= radar.grid_h || 2 * margin_c >= radar.grid_w) {
    throw ConfigError("grid too small to keep centers a PSF half-width from the border");
  }
  std::uniform_int_distribution<std::size_t> count(config.centers_min, config.centers_max);
  std::uniform_int_distribution<std::size_t> row(margin_r, radar.grid_h - 1 - margin_r);
  std::uniform_int_distribution<std::size_t> col(margin_c, radar.grid_w - 1 - margin_c);
  std::uniform_real_distribution<double> amp(config.amplitude_min, config.amplitude_max);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);

  const std::size_t n = count(rng);
  constexpr int kRestarts = 100;
  constexpr int kDrawsPerCenter = 1000;
  const double min_sep2 = config.min_separation_px * config.min_separation_px;

  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    std::vector<PixelIndex> placed;
    bool ok = true;
    while (placed.size() < n && ok) {
      ok = false;
      for (int d = 0; d < kDrawsPerCenter; ++d) {
        const PixelIndex cand{row(rng), col(rng)};
        const bool clear = std::all_of(placed.begin(), placed.end(), [&](const PixelIndex& q) {
          const double dr = static_cast<double>(cand.row) - static_cast<double>(q.row);
          const double dc = static_cast<double>(cand.col) - static_cast<double>(q.col);
          // Distinct pixels even when min_separation_px is zero.
          return dr * dr + dc * dc >= std::max(min_sep2, 1.0);
        });
        if (clear) {
          placed.push_back(cand);
          ok = true;
          break;
        }
      }
    }
    if (!ok) continue;
    PscSet set;
    for (const auto& px : placed) {
      const auto [x, y] = radar.pixel_center(px.row, px.col);
      const double a = amp(rng);
      const cplx amplitude = config.complex_amplitudes ? std::polar(a, phase(rng)) : cplx(a, 0.0);
      set.centers.push_back({amplitude, x, y});
    }
    return set;
  }
  throw ConfigError("cannot place " + std::to_string(n) + " centers " +
                    std::to_string(config.min_separation_px) + " px apart on a " +
                    std::to_string(radar.grid_h) + "x" + std::to_string(radar.grid_w) + " grid");
}

double anisotropy_factor(double theta_rad, double theta_i_rad, double sigma_rad) {
  if (!(sigma_rad > 0.0)) throw ParameterError("anisotropy sigma must be positive");
  double d = std::remainder(theta_rad - theta_i_rad, 2.0 * std::numbers::pi);
  return std::exp(-d * d / (2.0 * sigma_rad * sigma_rad));
}

std::vector<double> speckle_field(std::size_t n, int looks, std::mt19937_64& rng) {
  if (looks < 1) throw ParameterError("speckle looks must be positive");
  const double l = static_cast<double>(looks);
  std::gamma_distribution<double> gamma(l, 1.0 / l);
  std::vector<double> out(n);
  for (auto& v : out) v = gamma(rng);
  return out;
}

ComplexImage render_field(const Dictionary& dict, const PscSet& pscs) {
  const auto& radar = dict.config();
  std::vector<cplx> o(dict.size());
  for (const auto& c : pscs.centers) {
    const PixelIndex px = radar.nearest_pixel(c.x, c.y);
    o[px.row * radar.grid_w + px.col] += c.amplitude;
  }
  return ComplexImage(dict.height(), dict.width(), dict.apply(std::span<const cplx>(o)));
}

Sample render_sample(const Dictionary& dict, const PscSet& pscs, const SimConfig& config,
                     std::mt19937_64& rng) {
  Sample s;
  s.truth = pscs;
  s.class_label = pscs.class_label;
  s.azimuth_deg = pscs.azimuth_deg;
  if (config.anisotropy_sigma_rad) {
    const double sigma = *config.anisotropy_sigma_rad;
    const double theta = pscs.azimuth_rad();
    std::normal_distribution<double> offset(0.0, sigma);
    for (auto& c : s.truth.centers) c.amplitude *= anisotropy_factor(theta, theta + offset(rng), sigma);
  }
  std::vector<double> mag(dict.size());
  const bool real_amplitudes = std::all_of(s.truth.centers.begin(), s.truth.centers.end(),
                                           [](const ScatteringCenter& c) { return c.amplitude.imag() == 0.0; });
  if (real_amplitudes && dict.hermitian()) {
    std::vector<double> o(dict.size(), 0.0);
    for (const auto& c : s.truth.centers) {
      const PixelIndex px = dict.config().nearest_pixel(c.x, c.y);
      o[px.row * dict.width() + px.col] += c.amplitude.real();
    }
    const auto y = dict.apply(std::span<const double>(o));
    for (std::size_t i = 0; i < y.size(); ++i) mag[i] = std::abs(y[i]);
  } else {
    const auto field = render_field(dict, s.truth);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(field.data()[i]);
  }
  if (config.speckle_looks) {
    const auto noise = speckle_field(mag.size(), *config.speckle_looks, rng);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] *= noise[i];
  }
  // Images are stored as f32; rounding here keeps in-memory and reloaded datasets equal.
  for (auto& v : mag) v = static_cast<double>(static_cast<float>(v));
  s.image = RealImage(dict.height(), dict.width(), std::move(mag));
  return s;
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("PSC_KIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Sample> gen_dataset(const SimConfig& config) {
  config.validate();
  const Dictionary dict = build_dictionary(config.radar);
  std::vector<Sample> samples(config.num_targets);
  const std::size_t workers = std::min(worker_threads(), std::max<std::size_t>(config.num_targets, 1));

  auto make = [&](std::size_t i) {
    auto rng = sample_rng(config.seed, i);
    PscSet target = gen_target(config, dict, rng);
    target.azimuth_deg = 360.0 * static_cast<double>(i) / static_cast<double>(config.num_targets);
    target.class_label = static_cast<int>(i % config.num_classes);
    samples[i] = render_sample(dict, target, config, rng);
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) make(i);
    return samples;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < samples.size(); i += workers) make(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return samples;
}

std::filesystem::path write_dataset(const std::vector<Sample>& samples, const SimConfig& config,
                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json entries = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "sample_%05zu", i);
    const std::string image_name = std::string(stem) + ".psci";
    const std::string truth_name = std::string(stem) + "_truth.json";
    save_image(samples[i].image, dir / image_name);
    write_json_file(to_json(samples[i].truth), dir / truth_name);
    entries.push_back({{"image", image_name},
                       {"truth", truth_name},
                       {"class", samples[i].class_label},
                       {"azimuth_deg", samples[i].azimuth_deg}});
  }
  const json manifest = {{"samples", entries}, {"radar", to_json(config.radar)}, {"sim", to_json(config)}};
  const auto path = dir / "manifest.json";
  write_json_file(manifest, path);
  return path;
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
  const json m = read_json_file(manifest_path);
  const auto base = manifest_path.parent_path();
  LoadedDataset out;
  out.radar = radar_config_from_json(jsonf::require(m, "radar", "manifest"), "manifest.radar");
  if (m.contains("sim")) {
    out.sim = sim_config_from_json(m.at("sim"), "manifest.sim");
  } else {
    out.sim.radar = out.radar;
  }
  const json& entries = jsonf::require(m, "samples", "manifest");
  if (!entries.is_array()) throw ConfigError("manifest.samples: expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = "manifest.samples[" + std::to_string(i) + "]";
    const json& e = entries[i];
    Sample s;
    s.image = load_real_image(base / jsonf::string(e, "image", path));
    s.truth = psc_set_from_json(read_json_file(base / jsonf::string(e, "truth", path)), path + ".truth");
    s.class_label = static_cast<int>(jsonf::integer(e, "class", path));
    s.azimuth_deg = jsonf::number(e, "azimuth_deg", path);
    if (s.image.height() != out.radar.grid_h || s.image.width() != out.radar.grid_w) {
      throw ConfigError(path + ": image shape does not match the radar grid");
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace psckit
