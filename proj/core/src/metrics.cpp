#include "posekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "posekit/rng.hpp"

namespace posekit {

namespace {

// Model vertices in meters, optionally subsampled (uniform without
// replacement, seeded) for very dense meshes.
std::vector<Vec3> metric_vertices(const NormalizedModel& model,
                                  std::optional<int> vertex_cap,
                                  uint64_t seed) {
  std::vector<Vec3> verts;
  if (vertex_cap && static_cast<size_t>(*vertex_cap) < model.vertices.size()) {
    std::vector<size_t> order(model.vertices.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 engine(make_engine(seed));
    std::shuffle(order.begin(), order.end(), engine);
    order.resize(static_cast<size_t>(*vertex_cap));
    std::sort(order.begin(), order.end());
    verts.reserve(order.size());
    for (size_t i : order) verts.push_back(model.denormalize(model.vertices[i]));
  } else {
    verts.reserve(model.vertices.size());
    for (const Vec3& v : model.vertices) verts.push_back(model.denormalize(v));
  }
  if (verts.empty()) throw EmptyInput("metrics: model has no vertices");
  return verts;
}

}  // namespace

double add(const Pose& estimated, const Pose& ground_truth,
           const NormalizedModel& model, std::optional<int> vertex_cap,
           uint64_t seed) {
  const std::vector<Vec3> verts = metric_vertices(model, vertex_cap, seed);
  double sum = 0.0;
  for (const Vec3& v : verts) {
    const Vec3 pe = estimated.rotation * v + estimated.translation;
    const Vec3 pg = ground_truth.rotation * v + ground_truth.translation;
    sum += (pe - pg).norm();
  }
  return sum / static_cast<double>(verts.size());
}

double add_s(const Pose& estimated, const Pose& ground_truth,
             const NormalizedModel& model, std::optional<int> vertex_cap,
             uint64_t seed) {
  const std::vector<Vec3> verts = metric_vertices(model, vertex_cap, seed);
  std::vector<Vec3> gt(verts.size());
  for (size_t i = 0; i < verts.size(); ++i) {
    gt[i] = ground_truth.rotation * verts[i] + ground_truth.translation;
  }
  double sum = 0.0;
  for (const Vec3& v : verts) {
    const Vec3 pe = estimated.rotation * v + estimated.translation;
    double best = std::numeric_limits<double>::max();
    for (const Vec3& pg : gt) {
      best = std::min(best, (pe - pg).squaredNorm());
    }
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(verts.size());
}

PoseErrorReport evaluate_pose(const Pose& estimated, const Pose& ground_truth,
                              const NormalizedModel& model, bool symmetric) {
  PoseErrorReport report;
  report.add = add(estimated, ground_truth, model);
  report.add_s = add_s(estimated, ground_truth, model);
  report.diameter = model.diameter;
  const double headline = symmetric ? report.add_s : report.add;
  report.passes_002d = headline < 0.02 * model.diameter;
  report.passes_005d = headline < 0.05 * model.diameter;
  report.passes_01d = headline < 0.1 * model.diameter;
  return report;
}

double threshold_accuracy(std::span<const double> errors, double diameter,
                          double k) {
  if (errors.empty()) throw EmptyInput("threshold_accuracy: no errors given");
  if (diameter <= 0.0) {
    throw ValidationError("threshold_accuracy: diameter must be positive");
  }
  const double threshold = k * diameter;
  size_t passed = 0;
  for (double e : errors) {
    if (e < threshold) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(errors.size());
}

double auc_add(std::span<const double> errors, double max_threshold) {
  if (errors.empty()) throw EmptyInput("auc_add: no errors given");
  if (max_threshold <= 0.0) {
    throw ValidationError("auc_add: max threshold must be positive");
  }
  double sum = 0.0;
  for (double e : errors) {
    sum += std::clamp(1.0 - e / max_threshold, 0.0, 1.0);
  }
  return sum / static_cast<double>(errors.size());
}

}  // namespace posekit
