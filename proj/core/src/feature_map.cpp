#include "posekit/feature_map.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace posekit {

static_assert(std::endian::native == std::endian::little,
              "fmap wire format assumes a little-endian host");
static_assert(sizeof(float) == 4);

std::string_view to_string(LayoutTag tag) {
  switch (tag) {
    case LayoutTag::kCoord3: return "COORD3";
    case LayoutTag::kGeo: return "GEO";
    case LayoutTag::kErr: return "ERR";
    case LayoutTag::kRgb3: return "RGB3";
    case LayoutTag::kMask1: return "MASK1";
    case LayoutTag::kRef: return "REF";
    case LayoutTag::kQuery: return "QUERY";
    case LayoutTag::kMedoid: return "MEDOID";
  }
  throw ValidationError("unknown layout tag");
}

LayoutTag layout_tag_from_string(std::string_view text) {
  if (text == "COORD3") return LayoutTag::kCoord3;
  if (text == "GEO") return LayoutTag::kGeo;
  if (text == "ERR") return LayoutTag::kErr;
  if (text == "RGB3") return LayoutTag::kRgb3;
  if (text == "MASK1") return LayoutTag::kMask1;
  if (text == "REF") return LayoutTag::kRef;
  if (text == "QUERY") return LayoutTag::kQuery;
  if (text == "MEDOID") return LayoutTag::kMedoid;
  throw ValidationError("unknown layout tag: " + std::string(text));
}

FeatureMap FeatureMap::zeros(int height, int width, int channels, LayoutTag tag) {
  if (height < 1 || width < 1 || channels < 1) {
    throw ShapeMismatch("feature map dimensions must be positive");
  }
  FeatureMap map;
  map.height = height;
  map.width = width;
  map.channels = channels;
  map.layout = tag;
  map.data.assign(static_cast<size_t>(height) * width * channels, 0.0f);
  return map;
}

bool operator==(const FeatureMap& a, const FeatureMap& b) {
  return a.height == b.height && a.width == b.width &&
         a.channels == b.channels && a.layout == b.layout && a.data == b.data;
}

void write_fmap(std::ostream& out, const FeatureMap& map) {
  out << "fmap " << map.height << ' ' << map.width << ' ' << map.channels
      << ' ' << to_string(map.layout) << '\n';
  out.write(reinterpret_cast<const char*>(map.data.data()),
            static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  if (!out) throw IoFailure("fmap: write failed");
}

FeatureMap read_fmap(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CorruptBank("fmap: missing header line");
  std::istringstream header(line);
  std::string magic, tag;
  long long h = 0, w = 0, c = 0;
  header >> magic >> h >> w >> c >> tag;
  if (!header || magic != "fmap") {
    throw CorruptBank("fmap: malformed header: " + line);
  }
  if (h < 1 || w < 1 || c < 1 || h > 1 << 20 || w > 1 << 20 || c > 1 << 20) {
    throw CorruptBank("fmap: implausible dimensions in header");
  }
  FeatureMap map;
  map.height = static_cast<int>(h);
  map.width = static_cast<int>(w);
  map.channels = static_cast<int>(c);
  map.layout = layout_tag_from_string(tag);
  map.data.resize(static_cast<size_t>(h) * w * c);
  in.read(reinterpret_cast<char*>(map.data.data()),
          static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  if (in.gcount() !=
      static_cast<std::streamsize>(map.data.size() * sizeof(float))) {
    throw CorruptBank("fmap: truncated raster payload");
  }
  return map;
}

void save_fmap(const std::filesystem::path& path, const FeatureMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("fmap: cannot open for writing: " + path.string());
  write_fmap(out, map);
}

FeatureMap load_fmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("fmap: cannot open for reading: " + path.string());
  return read_fmap(in);
}

}  // namespace posekit
