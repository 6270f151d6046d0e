#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "posekit/feature_map.hpp"

using namespace posekit;

namespace {

FeatureMap random_map(std::mt19937_64& engine, int h, int w, int c,
                      LayoutTag tag) {
  FeatureMap map = FeatureMap::zeros(h, w, c, tag);
  std::uniform_real_distribution<float> uniform(-2.0f, 2.0f);
  for (float& v : map.data) v = uniform(engine);
  return map;
}

}  // namespace

TEST_SUITE("feature_map") {

TEST_CASE("wire format round trips bit-exactly") {
  std::mt19937_64 engine(31);
  for (LayoutTag tag : {LayoutTag::kGeo, LayoutTag::kRef, LayoutTag::kMask1}) {
    const FeatureMap map = random_map(engine, 13, 7, 5, tag);
    std::stringstream buffer;
    write_fmap(buffer, map);
    const FeatureMap back = read_fmap(buffer);
    CHECK(back == map);
  }
}

TEST_CASE("file save and load round trip") {
  std::mt19937_64 engine(32);
  const auto path = std::filesystem::temp_directory_path() / "posekit_test.fmap";
  const FeatureMap map = random_map(engine, 16, 16, 35, LayoutTag::kRef);
  save_fmap(path, map);
  CHECK(load_fmap(path) == map);
  std::filesystem::remove(path);
}

TEST_CASE("header text matches the wire spec") {
  FeatureMap map = FeatureMap::zeros(4, 6, 2, LayoutTag::kErr);
  std::stringstream buffer;
  write_fmap(buffer, map);
  std::string header;
  std::getline(buffer, header);
  CHECK(header == "fmap 4 6 2 ERR");
}

TEST_CASE("truncated payload is rejected") {
  FeatureMap map = FeatureMap::zeros(8, 8, 3, LayoutTag::kCoord3);
  std::stringstream buffer;
  write_fmap(buffer, map);
  std::string bytes = buffer.str();
  bytes.resize(bytes.size() - 10);
  std::stringstream truncated(bytes);
  CHECK_THROWS_AS(read_fmap(truncated), CorruptBank);
}

TEST_CASE("malformed headers are rejected") {
  std::stringstream no_magic("fmop 4 4 1 MASK1\n");
  CHECK_THROWS_AS(read_fmap(no_magic), CorruptBank);
  std::stringstream bad_tag("fmap 4 4 1 NOPE\n");
  CHECK_THROWS_AS(read_fmap(bad_tag), ValidationError);
  std::stringstream bad_dims("fmap 0 4 1 MASK1\n");
  CHECK_THROWS_AS(read_fmap(bad_dims), CorruptBank);
}

TEST_CASE("layout tags round trip through strings") {
  for (LayoutTag tag :
       {LayoutTag::kCoord3, LayoutTag::kGeo, LayoutTag::kErr, LayoutTag::kRgb3,
        LayoutTag::kMask1, LayoutTag::kRef, LayoutTag::kQuery, LayoutTag::kMedoid}) {
    CHECK(layout_tag_from_string(to_string(tag)) == tag);
  }
}

}  // TEST_SUITE
