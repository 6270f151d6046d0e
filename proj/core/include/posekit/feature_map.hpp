#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "posekit/errors.hpp"

namespace posekit {

/// Channel layout of a planar raster. The parenthesized counts follow from
/// the encoding frequency count N.
enum class LayoutTag {
  kCoord3,  // 3: normalized object coordinates
  kGeo,     // 6N: positionally encoded coordinates
  kErr,     // 6N: encoding-error raster
  kRgb3,    // 3: shaded image
  kMask1,   // 1: binary mask
  kRef,     // 6N+5: [GEO | RGB | modal | amodal]
  kQuery,   // 12N+5: [GEO | ERR | RGB | modal | amodal]
  kMedoid,  // 6N+2: [GEO | modal | amodal]
};

std::string_view to_string(LayoutTag tag);
LayoutTag layout_tag_from_string(std::string_view text);

/// Planar-channel float raster: channel-major, row-major within a channel.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  LayoutTag layout = LayoutTag::kGeo;
  std::vector<float> data;

  static FeatureMap zeros(int height, int width, int channels, LayoutTag tag);

  size_t plane() const { return static_cast<size_t>(height) * width; }
  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height + y) * width + x;
  }
  float& at(int c, int y, int x) { return data[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data[index(c, y, x)]; }
  std::span<float> channel(int c) {
    return {data.data() + c * plane(), plane()};
  }
  std::span<const float> channel(int c) const {
    return {data.data() + c * plane(), plane()};
  }
  bool same_shape(const FeatureMap& other) const {
    return height == other.height && width == other.width &&
           channels == other.channels;
  }
};

bool operator==(const FeatureMap& a, const FeatureMap& b);

/// Wire format: one plain-text header line
///   "fmap <h> <w> <channels> <layout_tag>\n"
/// followed by the raster as little-endian float32, planar channel-major.
void write_fmap(std::ostream& out, const FeatureMap& map);
FeatureMap read_fmap(std::istream& in);

void save_fmap(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap load_fmap(const std::filesystem::path& path);

}  // namespace posekit
