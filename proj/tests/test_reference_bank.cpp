#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "posekit/reference_bank.hpp"
#include "posekit/refinement.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/pipeline.hpp"

using namespace posekit;
using namespace posekit::testing;

namespace {

Pose pose_with_rotation(const Mat3& r, double z = 1.0) {
  Pose pose;
  pose.rotation = r;
  pose.translation = Vec3(0, 0, z);
  return pose;
}

}  // namespace

TEST_SUITE("reference_bank") {

TEST_CASE("fps picks the two farthest rotations") {
  const std::vector<Pose> pool = {pose_with_rotation(Mat3::Identity()),
                                  pose_with_rotation(rot_z(M_PI / 2)),
                                  pose_with_rotation(rot_z(M_PI))};
  const std::vector<int> picks = fps_select(pool, 2);
  CHECK(picks == std::vector<int>{0, 2});
}

TEST_CASE("fps with the full pool returns every index") {
  std::mt19937_64 engine(81);
  std::vector<Pose> pool;
  for (int i = 0; i < 6; ++i) pool.push_back(random_pose(engine));
  const std::vector<int> picks = fps_select(pool, 6);
  std::vector<int> sorted = picks;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("fps single pick maximizes the total distance") {
  std::mt19937_64 engine(82);
  std::vector<Pose> pool;
  for (int i = 0; i < 15; ++i) pool.push_back(random_pose(engine));
  const std::vector<int> picks = fps_select(pool, 1);
  // Brute force over the pool.
  int best = -1;
  double best_sum = -1.0;
  for (size_t i = 0; i < pool.size(); ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < pool.size(); ++j) {
      sum += geodesic_distance(pool[i].rotation, pool[j].rotation);
    }
    if (sum > best_sum) {
      best_sum = sum;
      best = static_cast<int>(i);
    }
  }
  CHECK(picks == std::vector<int>{best});
}

TEST_CASE("fps greedy property holds on random pools") {
  std::mt19937_64 engine(83);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Pose> pool;
    const int n = 20 + static_cast<int>(engine() % 31);
    for (int i = 0; i < n; ++i) pool.push_back(random_pose(engine));
    const std::vector<int> picks = fps_select(pool, 8);
    CHECK(fps_is_greedy(pool, picks));
  }
}

TEST_CASE("fps rejects an undersized pool") {
  std::vector<Pose> pool = {pose_with_rotation(Mat3::Identity())};
  CHECK_THROWS_AS(fps_select(pool, 2), InsufficientPool);
  CHECK_THROWS_AS(fps_select(pool, 0), InsufficientPool);
}

TEST_CASE("bank holds M references with 6N+5 channels") {
  const Mesh mesh = make_cube_mesh(0.3);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const ReferenceBank bank = make_test_bank(model, 4, 5, 32, 84);
  CHECK(bank.references.size() == 4);
  for (const Reference& ref : bank.references) {
    CHECK(ref.feature.channels == 35);
    CHECK(ref.feature.layout == LayoutTag::kRef);
    CHECK(ref.feature.height == 32);
  }
}

TEST_CASE("a pool of identical poses builds a degenerate but legal bank") {
  const Mesh mesh = make_cube_mesh(0.3);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const Pose pose = pose_with_rotation(rot_x(0.5), 1.2);
  Intrinsics k{40, 40, 16, 16, 32, 32};
  const std::vector<Pose> pool(5, pose);
  const std::vector<Intrinsics> ks(5, k);
  const ReferenceBank bank = build_bank("object", model, pool, ks, 4, 2, 32);
  REQUIRE(bank.references.size() == 4);
  for (const Reference& ref : bank.references) {
    CHECK(ref.feature == bank.references[0].feature);
  }
}

TEST_CASE("references with distinct focal lengths update consistently") {
  const Mesh mesh = make_cube_mesh(0.3);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  std::mt19937_64 engine(85);
  std::vector<Pose> pool = {random_pose(engine), random_pose(engine)};
  std::vector<Intrinsics> ks = {Intrinsics{300, 300, 32, 32, 64, 64},
                                Intrinsics{600, 600, 30, 34, 64, 64}};
  const ReferenceBank bank = build_bank("object", model, pool, ks, 2, 2, 64);

  // The untangled oracle round trip holds against either reference.
  const Pose target = random_pose(engine);
  const Intrinsics query_k = random_intrinsics(engine);
  for (const Reference& ref : bank.references) {
    const RefinementParams params =
        oracle_params(ref.pose, ref.intrinsics, target, query_k);
    const Pose recovered =
        untangled_update(params, ref.pose, ref.intrinsics, query_k).pose;
    CHECK((recovered.translation - target.translation).norm() < 1e-9);
    CHECK(geodesic_distance(recovered.rotation, target.rotation) < 1e-9);
  }
}

TEST_CASE("bank persistence round trips losslessly") {
  const Mesh mesh = make_cube_mesh(0.3);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const ReferenceBank bank = make_test_bank(model, 2, 2, 16, 86);
  const auto dir = std::filesystem::temp_directory_path() / "posekit_bank_rt";
  std::filesystem::remove_all(dir);
  save_bank(bank, dir);
  const ReferenceBank back = load_bank(dir);

  CHECK(back.object_id == bank.object_id);
  CHECK(back.frequencies == bank.frequencies);
  CHECK(back.raster == bank.raster);
  CHECK(back.model.scale == bank.model.scale);
  CHECK(back.model.diameter == bank.model.diameter);
  CHECK(back.model.center_offset == bank.model.center_offset);
  REQUIRE(back.model.vertices.size() == bank.model.vertices.size());
  for (size_t i = 0; i < bank.model.vertices.size(); ++i) {
    CHECK(back.model.vertices[i] == bank.model.vertices[i]);
  }
  CHECK(back.model.triangles == bank.model.triangles);
  REQUIRE(back.references.size() == bank.references.size());
  for (size_t i = 0; i < bank.references.size(); ++i) {
    const Reference& a = bank.references[i];
    const Reference& b = back.references[i];
    CHECK(a.pose.rotation == b.pose.rotation);
    CHECK(a.pose.translation == b.pose.translation);
    CHECK(a.intrinsics.fx == b.intrinsics.fx);
    CHECK(a.intrinsics.cx == b.intrinsics.cx);
    CHECK(a.feature == b.feature);       // bit-exact rasters
    CHECK(a.render.coords == b.render.coords);  // regenerable renders
    CHECK(a.render.amodal == b.render.amodal);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt banks are rejected") {
  const Mesh mesh = make_cube_mesh(0.3);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const ReferenceBank bank = make_test_bank(model, 2, 2, 16, 87);
  const auto dir = std::filesystem::temp_directory_path() / "posekit_bank_bad";

  SUBCASE("truncated feature file") {
    std::filesystem::remove_all(dir);
    save_bank(bank, dir);
    const auto victim = dir / "ref_0.fmap";
    const auto size = std::filesystem::file_size(victim);
    std::filesystem::resize_file(victim, size - 16);
    CHECK_THROWS_AS(load_bank(dir), CorruptBank);
  }

  SUBCASE("missing feature file") {
    std::filesystem::remove_all(dir);
    save_bank(bank, dir);
    std::filesystem::remove(dir / "ref_1.fmap");
    CHECK_THROWS_AS(load_bank(dir), CorruptBank);
  }

  SUBCASE("flipped payload byte") {
    std::filesystem::remove_all(dir);
    save_bank(bank, dir);
    const auto victim = dir / "ref_0.fmap";
    std::fstream file(victim, std::ios::in | std::ios::out | std::ios::binary);
    file.seekp(-1, std::ios::end);
    char byte;
    file.seekg(-1, std::ios::end);
    file.get(byte);
    byte ^= 0x40;
    file.seekp(-1, std::ios::end);
    file.put(byte);
    file.close();
    CHECK_THROWS_AS(load_bank(dir), CorruptBank);
  }

  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_bank(dir / "nowhere"), IoFailure);
  }

  std::filesystem::remove_all(dir);
}

TEST_CASE("space carving recovers a sphere shell") {
  // Sphere of normalized radius 0.8 (0.2 m at scale 0.25), seen from 8
  // directions spread over the view sphere.
  const Mesh sphere = make_icosphere(0.2, 3);
  NormalizedModel model;
  for (const Vec3& v : sphere.vertices) model.vertices.push_back(v / 0.25);
  model.triangles = sphere.triangles;
  model.scale = 0.25;
  model.diameter = 0.4;

  const Intrinsics k{120, 120, 48, 48, 96, 96};
  std::vector<CarveView> views;
  std::mt19937_64 engine(88);
  for (int i = 0; i < 8; ++i) {
    Pose pose;
    pose.rotation = random_rotation(engine);
    pose.translation = Vec3(0, 0, 0.8);
    CarveView view;
    view.amodal = render(model, pose, k, 96, 96).amodal;
    view.pose = pose;
    view.intrinsics = k;
    views.push_back(std::move(view));
  }

  const int resolution = 32;
  const double pitch = 2.0 / resolution;
  const std::vector<Vec3> surface = space_carve(views, resolution, 0.25, Vec3::Zero());
  REQUIRE(!surface.empty());

  size_t in_band = 0;
  for (const Vec3& p : surface) {
    const double r = p.norm();
    if (r >= 0.8 - 2.0 * pitch && r <= 0.8 + 2.0 * pitch) ++in_band;
  }
  CHECK(static_cast<double>(in_band) / surface.size() >= 0.99);

  // Conservative hull: every true surface point has carved support nearby.
  const double diag = std::sqrt(3.0) * pitch;
  for (const Vec3& v : model.vertices) {
    double best = std::numeric_limits<double>::max();
    for (const Vec3& p : surface) best = std::min(best, (v - p).norm());
    CHECK(best <= diag);
  }
}

TEST_CASE("two orthogonal views carve a prism intersection around a cube") {
  const Mesh cube = make_cube_mesh(0.2);
  NormalizedModel model;
  for (const Vec3& v : cube.vertices) model.vertices.push_back(v / 0.25);
  model.triangles = cube.triangles;
  model.scale = 0.25;
  model.diameter = 0.2 * std::sqrt(3.0);

  const Intrinsics k{120, 120, 48, 48, 96, 96};
  std::vector<CarveView> views;
  for (const Mat3& r : {Mat3(Mat3::Identity()), rot_y(M_PI / 2)}) {
    Pose pose;
    pose.rotation = r;
    pose.translation = Vec3(0, 0, 0.8);
    CarveView view;
    view.amodal = render(model, pose, k, 96, 96).amodal;
    view.pose = pose;
    view.intrinsics = k;
    views.push_back(std::move(view));
  }

  const int resolution = 32;
  const double pitch = 2.0 / resolution;
  const std::vector<Vec3> surface = space_carve(views, resolution, 0.25, Vec3::Zero());
  REQUIRE(!surface.empty());

  // The carved hull contains the cube: every corner is near carved support.
  const double diag = std::sqrt(3.0) * pitch;
  for (const Vec3& v : model.vertices) {
    double best = std::numeric_limits<double>::max();
    for (const Vec3& p : surface) best = std::min(best, (v - p).norm());
    CHECK(best <= diag);
  }
  // And it stays within the two prisms (plus perspective slack).
  for (const Vec3& p : surface) {
    CHECK(std::abs(p.x()) <= 0.5);
    CHECK(std::abs(p.y()) <= 0.5);
    CHECK(std::abs(p.z()) <= 0.5);
  }
}

TEST_CASE("all-ones masks keep the full grid boundary shell") {
  FeatureMap ones = FeatureMap::zeros(64, 64, 1, LayoutTag::kMask1);
  for (float& v : ones.data) v = 1.0f;
  const Intrinsics k{40, 40, 32, 32, 64, 64};
  Pose pose;
  pose.translation = Vec3(0, 0, 1.0);
  std::vector<CarveView> views = {{ones, pose, k}, {ones, pose, k}};

  const int resolution = 32;
  const std::vector<Vec3> surface = space_carve(views, resolution, 0.25, Vec3::Zero());
  const size_t shell = static_cast<size_t>(resolution) * resolution * resolution -
                       static_cast<size_t>(resolution - 2) * (resolution - 2) *
                           (resolution - 2);
  CHECK(surface.size() == shell);
}

TEST_CASE("carving failure modes") {
  FeatureMap zeros = FeatureMap::zeros(16, 16, 1, LayoutTag::kMask1);
  const Intrinsics k{20, 20, 8, 8, 16, 16};
  Pose pose;
  pose.translation = Vec3(0, 0, 1.0);
  std::vector<CarveView> views = {{zeros, pose, k}, {zeros, pose, k}};
  CHECK_THROWS_AS(space_carve(views, 16, 0.25, Vec3::Zero()), EmptyCarving);

  std::vector<CarveView> single = {{zeros, pose, k}};
  CHECK_THROWS_AS(space_carve(single, 16, 0.25, Vec3::Zero()), ValidationError);
  CHECK_THROWS_AS(space_carve(views, 4, 0.25, Vec3::Zero()), ValidationError);
}

}  // TEST_SUITE
