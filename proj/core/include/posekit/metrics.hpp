#pragma once

#include <optional>
#include <span>

#include "posekit/geometry.hpp"

namespace posekit {

struct PoseErrorReport {
  double add = 0.0;       // meters
  double add_s = 0.0;     // meters
  double diameter = 0.0;  // meters
  bool passes_002d = false;
  bool passes_005d = false;
  bool passes_01d = false;
};

/// Mean distance between correspondingly posed model vertices, in meters.
/// vertex_cap subsamples large meshes uniformly (seeded) when set.
double add(const Pose& estimated, const Pose& ground_truth,
           const NormalizedModel& model,
           std::optional<int> vertex_cap = std::nullopt, uint64_t seed = 0);

/// Symmetric variant: mean nearest-neighbor distance into the ground-truth
/// vertex set (brute force).
double add_s(const Pose& estimated, const Pose& ground_truth,
             const NormalizedModel& model,
             std::optional<int> vertex_cap = std::nullopt, uint64_t seed = 0);

/// ADD and ADD-S plus the 0.02d/0.05d/0.1d pass flags; the flags follow
/// ADD-S when the object is flagged symmetric, ADD otherwise.
PoseErrorReport evaluate_pose(const Pose& estimated, const Pose& ground_truth,
                              const NormalizedModel& model, bool symmetric);

/// Fraction of errors below k * diameter.
double threshold_accuracy(std::span<const double> errors, double diameter,
                          double k);

/// Area under the accuracy-vs-threshold step curve on [0, max_threshold],
/// normalized by max_threshold. Exact step integration:
/// mean over errors of clamp(1 - e/max, 0, 1).
double auc_add(std::span<const double> errors, double max_threshold = 0.10);

}  // namespace posekit
