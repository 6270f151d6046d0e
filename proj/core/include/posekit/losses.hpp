#pragma once

#include <array>
#include <span>
#include <vector>

#include "posekit/feature_map.hpp"
#include "posekit/geometry.hpp"

namespace posekit {

/// 4 x 4 x 2 lattice spanning the normalized cube, posed into the camera
/// frame. Enumeration order: x fastest, then y, then z.
using GridPoints = std::array<Vec3, 32>;

struct LossBreakdown {
  double geometric = 0.0;               // encoded-coordinate term
  double error = 0.0;                   // error-raster term
  double mask = 0.0;                    // modal+amodal term
  std::vector<double> pose_candidates;  // one per candidate
  double pose_query = 0.0;
  double lambda = 20.0;
  double total = 0.0;
};

/// Mean over all h*w*C elements of |modal_gt (x) (g - g_gt)|, the mask
/// broadcast across channels.
double masked_l1_geo(const FeatureMap& g, const FeatureMap& g_gt,
                     const FeatureMap& modal_gt);

/// Elementwise |g - g_gt|; the regression target of the error raster.
FeatureMap error_target(const FeatureMap& g, const FeatureMap& g_gt);

double masked_l1_err(const FeatureMap& e, const FeatureMap& g,
                     const FeatureMap& g_gt, const FeatureMap& modal_gt);

/// mean |modal - modal_gt| + mean |amodal - amodal_gt|.
double mask_l1(const FeatureMap& modal, const FeatureMap& modal_gt,
               const FeatureMap& amodal, const FeatureMap& amodal_gt);

GridPoints make_grid(const Pose& pose, const NormalizedModel& model);

/// Mean per-point distance between the two posed grids plus the absolute
/// difference of translation norms.
double grid_loss(const Pose& estimated, const Pose& ground_truth,
                 const NormalizedModel& model);

/// total = lambda*(geometric + error + mask) + sum(pose_candidates) + pose_query.
LossBreakdown total_loss(double geometric, double error, double mask,
                         std::span<const double> pose_candidates,
                         double pose_query, double lambda = 20.0);

/// Per-channel standardization (population sigma over h*w) followed by the
/// supplied affine transform. Channels with sigma < 1e-12 get sigma + 1e-6.
FeatureMap adain(const FeatureMap& x, std::span<const double> alpha,
                 std::span<const double> beta);

}  // namespace posekit
