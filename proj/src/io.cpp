#include "psckit/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace psckit {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'S', 'C', 'I'};
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[offset + k]) << (8 * k);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  const auto f = static_cast<float>(v);
  if (!std::isfinite(f)) throw NumericalError("sample does not fit in a finite 32-bit float");
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

float get_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  const float f = std::bit_cast<float>(get_u32(bytes, offset));
  if (!std::isfinite(f)) throw FormatError("non-finite sample", offset);
  return f;
}

std::vector<std::uint8_t> header(ImageDtype dtype, std::size_t h, std::size_t w) {
  if (h > std::numeric_limits<std::uint32_t>::max() || w > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("image dimensions exceed the u32 header range");
  }
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_u32(out, kImageFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(w));
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_image(const RealImage& image) {
  auto out = header(ImageDtype::RealF32, image.height(), image.width());
  out.reserve(kHeaderBytes + 4 * image.size());
  for (double v : image.data()) put_f32(out, v);
  return out;
}

std::vector<std::uint8_t> encode_image(const ComplexImage& image) {
  auto out = header(ImageDtype::ComplexF32, image.height(), image.width());
  out.reserve(kHeaderBytes + 8 * image.size());
  for (const cplx& v : image.data()) {
    put_f32(out, v.real());
    put_f32(out, v.imag());
  }
  return out;
}

AnyImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header", bytes.size());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad magic, expected \"PSCI\"", 0);
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kImageFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::uint32_t dtype = get_u32(bytes, 8);
  if (dtype > 1) throw FormatError("unknown dtype " + std::to_string(dtype), 8);
  const std::size_t h = get_u32(bytes, 12);
  const std::size_t w = get_u32(bytes, 16);
  const std::size_t sample_bytes = dtype == 0 ? 4 : 8;
  const std::size_t expected = kHeaderBytes + h * w * sample_bytes;
  if (bytes.size() != expected) {
    throw FormatError("payload length " + std::to_string(bytes.size() - kHeaderBytes) +
                          " does not match " + std::to_string(h) + "x" + std::to_string(w) +
                          " dimensions",
                      std::min(bytes.size(), expected));
  }
  if (dtype == 0) {
    std::vector<double> data(h * w);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_f32(bytes, kHeaderBytes + 4 * i);
    return RealImage(h, w, std::move(data));
  }
  std::vector<cplx> data(h * w);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t off = kHeaderBytes + 8 * i;
    data[i] = cplx(get_f32(bytes, off), get_f32(bytes, off + 4));
  }
  return ComplexImage(h, w, std::move(data));
}

void save_image(const RealImage& image, const std::filesystem::path& path) {
  write_bytes(encode_image(image), path);
}

void save_image(const ComplexImage& image, const std::filesystem::path& path) {
  write_bytes(encode_image(image), path);
}

AnyImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

RealImage load_real_image(const std::filesystem::path& path) {
  auto any = load_image(path);
  if (auto* real = std::get_if<RealImage>(&any)) return std::move(*real);
  return magnitude(std::get<ComplexImage>(any));
}

ComplexImage load_complex_image(const std::filesystem::path& path) {
  auto any = load_image(path);
  if (auto* c = std::get_if<ComplexImage>(&any)) return std::move(*c);
  return to_complex(std::get<RealImage>(any));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  write_text_file(doc.dump(2) + "\n", path);
}

namespace jsonf {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key) + ": missing required field");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

std::size_t count(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(join(path, key) + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t count_or(const json& j, const std::string& key, const std::string& path,
                     std::size_t fallback) {
  return j.contains(key) ? count(j, key, path) : fallback;
}

std::int64_t integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t integer_or(const json& j, const std::string& key, const std::string& path,
                        std::int64_t fallback) {
  return j.contains(key) ? integer(j, key, path) : fallback;
}

bool boolean_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected a boolean");
  return v.get<bool>();
}

std::string string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

}  // namespace jsonf

json to_json(const ScatteringCenter& c) {
  return {{"amplitude", {c.amplitude.real(), c.amplitude.imag()}}, {"x", c.x}, {"y", c.y}};
}

json to_json(const PscSet& set) {
  json centers = json::array();
  for (const auto& c : set.centers) centers.push_back(to_json(c));
  return {{"centers", centers}, {"class_label", set.class_label}, {"azimuth_deg", set.azimuth_deg}};
}

json to_json(const RadarConfig& c) {
  return {{"center_freq_hz", c.center_freq_hz},
          {"bandwidth_hz", c.bandwidth_hz},
          {"num_freq", c.num_freq},
          {"center_aspect_rad", c.center_aspect_rad},
          {"aspect_span_rad", c.aspect_span_rad},
          {"num_aspect", c.num_aspect},
          {"scene_extent_m", c.scene_extent_m},
          {"grid_h", c.grid_h},
          {"grid_w", c.grid_w},
          {"c_mps", c.c_mps},
          {"gram_epsilon", c.gram_epsilon},
          {"taylor_taper", c.taylor_taper}};
}

ScatteringCenter scattering_center_from_json(const json& j, const std::string& path) {
  ScatteringCenter c;
  const json& amp = jsonf::require(j, "amplitude", path);
  if (amp.is_number()) {
    c.amplitude = cplx(amp.get<double>(), 0.0);
  } else if (amp.is_array() && amp.size() == 2 && amp[0].is_number() && amp[1].is_number()) {
    c.amplitude = cplx(amp[0].get<double>(), amp[1].get<double>());
  } else {
    throw ConfigError(jsonf::join(path, "amplitude") + ": expected a number or [re, im]");
  }
  c.x = jsonf::number(j, "x", path);
  c.y = jsonf::number(j, "y", path);
  return c;
}

PscSet psc_set_from_json(const json& j, const std::string& path) {
  PscSet set;
  const json& centers = jsonf::require(j, "centers", path);
  if (!centers.is_array()) throw ConfigError(jsonf::join(path, "centers") + ": expected an array");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    set.centers.push_back(
        scattering_center_from_json(centers[i], jsonf::join(path, "centers[" + std::to_string(i) + "]")));
  }
  set.class_label = static_cast<int>(jsonf::integer_or(j, "class_label", path, 0));
  set.azimuth_deg = jsonf::number_or(j, "azimuth_deg", path, 0.0);
  try {
    set.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return set;
}

RadarConfig radar_config_from_json(const json& j, const std::string& path) {
  RadarConfig c;
  c.center_freq_hz = jsonf::number(j, "center_freq_hz", path);
  c.bandwidth_hz = jsonf::number(j, "bandwidth_hz", path);
  c.num_freq = jsonf::count(j, "num_freq", path);
  c.center_aspect_rad = jsonf::number(j, "center_aspect_rad", path);
  c.aspect_span_rad = jsonf::number(j, "aspect_span_rad", path);
  c.num_aspect = jsonf::count(j, "num_aspect", path);
  c.scene_extent_m = jsonf::number(j, "scene_extent_m", path);
  c.grid_h = jsonf::count(j, "grid_h", path);
  c.grid_w = jsonf::count(j, "grid_w", path);
  c.c_mps = jsonf::number_or(j, "c_mps", path, kSpeedOfLight);
  c.gram_epsilon = jsonf::number_or(j, "gram_epsilon", path, 1e-8);
  c.taylor_taper = jsonf::boolean_or(j, "taylor_taper", path, false);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

}  // namespace psckit
