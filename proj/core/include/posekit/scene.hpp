#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "posekit/geometry.hpp"

namespace posekit {

struct OccluderPlacement {
  std::string mesh;  // path of the occluder mesh
  Pose pose;
};

/// One synthetic query: ground-truth pose, zoomed-in intrinsics, and an
/// optional occluder in front of the target.
struct Scene {
  std::string object_id;
  Pose gt_pose;
  Intrinsics intrinsics;
  bool symmetric = false;
  uint64_t seed = 0;
  std::optional<OccluderPlacement> occluder;
};

struct SceneSamplingParams {
  int raster = 64;
  std::array<double, 2> depth_range = {0.5, 2.0};   // meters
  std::array<double, 2> focal_range = {300.0, 1200.0};  // pixels
  double center_margin = 0.1;  // frame fraction kept around the object center
};

/// Uniform rotation on SO(3) via the random-quaternion construction.
Mat3 random_rotation(std::mt19937_64& engine);

/// Draws rotation, depth, focal length, and principal point from the
/// configured ranges; x and y are chosen so the projected object center
/// stays at least `center_margin` inside the raster.
Scene sample_scene(const SceneSamplingParams& params, const std::string& object_id,
                   bool symmetric, uint64_t scene_seed);

/// Frozen scene schema:
/// {"object", "pose": {"R": [9 row-major], "t": [3]},
///  "K": {"fx","fy","cx","cy","w","h"}, "symmetric", "seed"}
/// plus an optional "occluder": {"mesh", "pose"}.
void save_scene(const std::filesystem::path& path, const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

}  // namespace posekit
