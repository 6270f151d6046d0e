#include <doctest.h>

#include <filesystem>

#include "posekit/rendering.hpp"
#include "posekit/scene.hpp"
#include "support/fixtures.hpp"

using namespace posekit;
using namespace posekit::testing;

TEST_SUITE("scene") {

TEST_CASE("sampling is deterministic in the seed") {
  SceneSamplingParams params;
  const Scene a = sample_scene(params, "cube", false, 42);
  const Scene b = sample_scene(params, "cube", false, 42);
  CHECK(a.gt_pose.rotation == b.gt_pose.rotation);
  CHECK(a.gt_pose.translation == b.gt_pose.translation);
  CHECK(a.intrinsics.fx == b.intrinsics.fx);
  CHECK(a.intrinsics.cx == b.intrinsics.cx);
  const Scene c = sample_scene(params, "cube", false, 43);
  CHECK(a.gt_pose.translation != c.gt_pose.translation);
}

TEST_CASE("sampled values respect the configured ranges") {
  SceneSamplingParams params;
  params.depth_range = {0.5, 2.0};
  params.focal_range = {300.0, 1200.0};
  for (uint64_t seed = 0; seed < 500; ++seed) {
    const Scene scene = sample_scene(params, "cube", false, seed);
    CHECK(scene.gt_pose.translation.z() >= 0.5);
    CHECK(scene.gt_pose.translation.z() <= 2.0);
    CHECK(scene.intrinsics.fx >= 300.0);
    CHECK(scene.intrinsics.fx <= 1200.0);
    CHECK(scene.intrinsics.fx == scene.intrinsics.fy);
    CHECK(std::abs(scene.intrinsics.cx - 32.0) <= 16.0 + 1e-9);
    CHECK(std::abs(scene.intrinsics.cy - 32.0) <= 16.0 + 1e-9);
    // The projected center honors the 10% margin.
    const Vec3& t = scene.gt_pose.translation;
    const double u = scene.intrinsics.fx * t.x() / t.z() + scene.intrinsics.cx;
    const double v = scene.intrinsics.fy * t.y() / t.z() + scene.intrinsics.cy;
    CHECK(u >= 6.4);
    CHECK(u <= 57.6);
    CHECK(v >= 6.4);
    CHECK(v <= 57.6);
  }
}

TEST_CASE("every sampled scene renders a nonempty amodal mask") {
  const Mesh mesh = make_cube_mesh(0.1);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  SceneSamplingParams params;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene scene = sample_scene(params, "cube", false, seed);
    const RenderResult r =
        render(model, scene.gt_pose, scene.intrinsics, 64, 64);
    size_t area = 0;
    for (float v : r.amodal.data) area += v != 0.0f;
    CHECK(area > 0);
  }
}

TEST_CASE("scene json round trips through the frozen schema") {
  SceneSamplingParams params;
  Scene scene = sample_scene(params, "driller", true, 7);
  OccluderPlacement occ;
  occ.mesh = "occluder.ply";
  occ.pose = scene.gt_pose;
  occ.pose.translation.z() *= 0.7;
  scene.occluder = occ;

  const auto path = std::filesystem::temp_directory_path() / "posekit_scene.json";
  save_scene(path, scene);
  const Scene back = load_scene(path);
  CHECK(back.object_id == scene.object_id);
  CHECK(back.symmetric == scene.symmetric);
  CHECK(back.seed == scene.seed);
  CHECK(back.gt_pose.rotation == scene.gt_pose.rotation);
  CHECK(back.gt_pose.translation == scene.gt_pose.translation);
  CHECK(back.intrinsics.fx == scene.intrinsics.fx);
  CHECK(back.intrinsics.width == scene.intrinsics.width);
  REQUIRE(back.occluder.has_value());
  CHECK(back.occluder->mesh == occ.mesh);
  CHECK(back.occluder->pose.translation == occ.pose.translation);
  std::filesystem::remove(path);
}

TEST_CASE("invalid ranges are rejected") {
  SceneSamplingParams params;
  params.depth_range = {2.0, 0.5};
  CHECK_THROWS_AS(sample_scene(params, "cube", false, 0), ValidationError);
}

}  // TEST_SUITE
