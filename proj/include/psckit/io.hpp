#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "psckit/types.hpp"

namespace psckit {

using json = nlohmann::json;

// PSCI image container:
//   magic "PSCI" | version u32 = 1 | dtype u32 (0 real f32, 1 complex f32
//   interleaved) | height u32 | width u32 | row-major payload, little endian.
inline constexpr std::uint32_t kImageFormatVersion = 1;
enum class ImageDtype : std::uint32_t { RealF32 = 0, ComplexF32 = 1 };

using AnyImage = std::variant<RealImage, ComplexImage>;

std::vector<std::uint8_t> encode_image(const RealImage& image);
std::vector<std::uint8_t> encode_image(const ComplexImage& image);
AnyImage decode_image(std::span<const std::uint8_t> bytes);

void save_image(const RealImage& image, const std::filesystem::path& path);
void save_image(const ComplexImage& image, const std::filesystem::path& path);
AnyImage load_image(const std::filesystem::path& path);
// Complex payloads are reduced to magnitude.
RealImage load_real_image(const std::filesystem::path& path);
ComplexImage load_complex_image(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& doc, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

// Field accessors that report the dotted field path on failure.
namespace jsonf {

std::string join(const std::string& path, const std::string& key);
const json& require(const json& j, const std::string& key, const std::string& path);
double number(const json& j, const std::string& key, const std::string& path);
double number_or(const json& j, const std::string& key, const std::string& path, double fallback);
std::size_t count(const json& j, const std::string& key, const std::string& path);
std::size_t count_or(const json& j, const std::string& key, const std::string& path,
                     std::size_t fallback);
std::int64_t integer(const json& j, const std::string& key, const std::string& path);
std::int64_t integer_or(const json& j, const std::string& key, const std::string& path,
                        std::int64_t fallback);
bool boolean_or(const json& j, const std::string& key, const std::string& path, bool fallback);
std::string string(const json& j, const std::string& key, const std::string& path);

}  // namespace jsonf

json to_json(const ScatteringCenter& c);
json to_json(const PscSet& set);
json to_json(const RadarConfig& config);

ScatteringCenter scattering_center_from_json(const json& j, const std::string& path = "center");
PscSet psc_set_from_json(const json& j, const std::string& path = "psc_set");
RadarConfig radar_config_from_json(const json& j, const std::string& path = "radar");

}  // namespace psckit
