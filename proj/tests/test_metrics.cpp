#include <doctest.h>

#include <random>

#include "posekit/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace posekit;
using namespace posekit::testing;

namespace {

NormalizedModel cube_model(double edge = 0.2) {
  const Mesh mesh = make_cube_mesh(edge);
  return normalize_model(mesh.vertices, mesh.triangles);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("add basics") {
  const NormalizedModel model = cube_model();
  std::mt19937_64 engine(51);
  const Pose pose = random_pose(engine);
  CHECK(add(pose, pose, model) == 0.0);

  Pose shifted = pose;
  shifted.translation += Vec3(0.03, -0.04, 0.12);
  CHECK(add(shifted, pose, model) ==
        doctest::Approx(Vec3(0.03, -0.04, 0.12).norm()).epsilon(1e-12));
}

TEST_CASE("cube rotated about its symmetry axis: ADD positive, ADD-S zero") {
  const NormalizedModel model = cube_model(0.2);
  Pose gt;
  gt.translation = Vec3(0, 0, 1);
  Pose est = gt;
  est.rotation = rot_z(M_PI / 2);  // 90 degrees about the cube's own axis

  const double add_err = add(est, gt, model);
  CHECK(add_err > 0.1 * model.diameter);
  CHECK(add_s(est, gt, model) < 1e-9);
}

TEST_CASE("add_s never exceeds add") {
  const NormalizedModel model = cube_model();
  std::mt19937_64 engine(52);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(engine);
    const Pose b = random_pose(engine);
    CHECK(add_s(a, b, model) <= add(a, b, model) + 1e-15);
  }
}

TEST_CASE("add_s equals the brute-force oracle") {
  std::mt19937_64 engine(53);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  // 100-vertex random cloud, in meters.
  std::vector<Vec3> cloud;
  for (int i = 0; i < 100; ++i) {
    cloud.emplace_back(uniform(engine), uniform(engine), uniform(engine));
  }
  const NormalizedModel model = normalize_model(cloud, {});
  std::vector<Vec3> meters;
  for (const Vec3& v : model.vertices) meters.push_back(model.denormalize(v));

  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(engine);
    const Pose b = random_pose(engine);
    CHECK(std::abs(add_s(a, b, model) - add_s_oracle(a, b, meters)) < 1e-12);
  }
}

TEST_CASE("add is a pseudometric on poses") {
  const NormalizedModel model = cube_model();
  std::mt19937_64 engine(54);
  for (int i = 0; i < 30; ++i) {
    const Pose a = random_pose(engine);
    const Pose b = random_pose(engine);
    const Pose c = random_pose(engine);
    const double ab = add(a, b, model);
    const double ba = add(b, a, model);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(add(a, c, model) <= ab + add(b, c, model) + 1e-12);
  }
}

TEST_CASE("evaluate_pose flags follow the symmetric designation") {
  const NormalizedModel model = cube_model(0.2);
  Pose gt;
  gt.translation = Vec3(0, 0, 1);
  Pose est = gt;
  est.rotation = rot_z(M_PI / 2);

  const PoseErrorReport plain = evaluate_pose(est, gt, model, false);
  CHECK_FALSE(plain.passes_01d);
  CHECK(plain.add_s <= plain.add);

  const PoseErrorReport symmetric = evaluate_pose(est, gt, model, true);
  CHECK(symmetric.passes_002d);
  CHECK(symmetric.passes_005d);
  CHECK(symmetric.passes_01d);
}

TEST_CASE("threshold accuracy") {
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  CHECK(threshold_accuracy(zeros, 1.0, 0.1) == 1.0);

  const double d = 0.5;
  const std::vector<double> mixed = {0.05 * d, 0.2 * d};
  CHECK(threshold_accuracy(mixed, d, 0.1) == 0.5);

  CHECK_THROWS_AS(threshold_accuracy(std::vector<double>{}, 1.0, 0.1), EmptyInput);
}

TEST_CASE("auc of the step curve") {
  CHECK(auc_add(std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK(auc_add(std::vector<double>{0.05}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(auc_add(std::vector<double>{0.2, 0.5}) == 0.0);
  CHECK_THROWS_AS(auc_add(std::vector<double>{}), EmptyInput);

  // Halving every error never lowers the area.
  std::mt19937_64 engine(55);
  std::uniform_real_distribution<double> uniform(0.0, 0.2);
  std::vector<double> errors, halved;
  for (int i = 0; i < 50; ++i) {
    errors.push_back(uniform(engine));
    halved.push_back(errors.back() / 2.0);
  }
  CHECK(auc_add(halved) >= auc_add(errors));
}

}  // TEST_SUITE
