#include "posekit/scene.hpp"

#include <cmath>
#include <fstream>

#include "json_util.hpp"
#include "posekit/rng.hpp"

namespace posekit {

using detail::ordered_json;

Mat3 random_rotation(std::mt19937_64& engine) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u1 = uniform(engine);
  const double u2 = uniform(engine);
  const double u3 = uniform(engine);
  const Eigen::Quaterniond q(std::sqrt(1.0 - u1) * std::sin(2.0 * M_PI * u2),
                             std::sqrt(1.0 - u1) * std::cos(2.0 * M_PI * u2),
                             std::sqrt(u1) * std::sin(2.0 * M_PI * u3),
                             std::sqrt(u1) * std::cos(2.0 * M_PI * u3));
  return q.toRotationMatrix();
}

Scene sample_scene(const SceneSamplingParams& params, const std::string& object_id,
                   bool symmetric, uint64_t scene_seed) {
  if (params.depth_range[0] <= 0.0 || params.depth_range[1] < params.depth_range[0] ||
      params.focal_range[0] <= 0.0 || params.focal_range[1] < params.focal_range[0]) {
    throw ValidationError("sample_scene: invalid depth or focal range");
  }
  std::mt19937_64 engine(scene_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Scene scene;
  scene.object_id = object_id;
  scene.symmetric = symmetric;
  scene.seed = scene_seed;
  scene.gt_pose.rotation = random_rotation(engine);

  const double w = params.raster;
  const double h = params.raster;
  Intrinsics k;
  k.width = params.raster;
  k.height = params.raster;
  k.fx = params.focal_range[0] +
         uniform(engine) * (params.focal_range[1] - params.focal_range[0]);
  k.fy = k.fx;
  // Principal point within +-25% of the raster center.
  k.cx = 0.5 * w + (uniform(engine) * 2.0 - 1.0) * 0.25 * w;
  k.cy = 0.5 * h + (uniform(engine) * 2.0 - 1.0) * 0.25 * h;
  scene.intrinsics = k;

  const double z = params.depth_range[0] +
                   uniform(engine) * (params.depth_range[1] - params.depth_range[0]);
  // Aim the object center at a pixel inside the margin.
  const double margin = params.center_margin;
  const double u = (margin + uniform(engine) * (1.0 - 2.0 * margin)) * w;
  const double v = (margin + uniform(engine) * (1.0 - 2.0 * margin)) * h;
  scene.gt_pose.translation =
      Vec3((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  ordered_json j;
  j["object"] = scene.object_id;
  j["pose"] = detail::pose_to_json(scene.gt_pose);
  j["K"] = detail::intrinsics_to_json(scene.intrinsics);
  j["symmetric"] = scene.symmetric;
  j["seed"] = scene.seed;
  if (scene.occluder) {
    j["occluder"] = ordered_json{{"mesh", scene.occluder->mesh},
                                 {"pose", detail::pose_to_json(scene.occluder->pose)}};
  }
  std::ofstream out(path);
  if (!out) throw IoFailure("scene: cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoFailure("scene: write failed: " + path.string());
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("scene: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
    Scene scene;
    scene.object_id = j.at("object").get<std::string>();
    scene.gt_pose = detail::pose_from_json(j.at("pose"));
    scene.intrinsics = detail::intrinsics_from_json(j.at("K"));
    scene.symmetric = j.at("symmetric").get<bool>();
    scene.seed = j.at("seed").get<uint64_t>();
    if (j.contains("occluder")) {
      OccluderPlacement occ;
      occ.mesh = j["occluder"].at("mesh").get<std::string>();
      occ.pose = detail::pose_from_json(j["occluder"].at("pose"));
      scene.occluder = occ;
    }
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scene: malformed json in " + path.string() + ": " +
                          e.what());
  }
}

}  // namespace posekit
