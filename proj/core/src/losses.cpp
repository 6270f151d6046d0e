#include "posekit/losses.hpp"

#include <cmath>

namespace posekit {

namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string("loss: shape mismatch between inputs: ") + what);
  }
}

void require_mask_shape(const FeatureMap& m, const FeatureMap& mask,
                        const char* what) {
  if (m.height != mask.height || m.width != mask.width || mask.channels != 1) {
    throw ShapeMismatch(std::string("loss: mask shape mismatch: ") + what);
  }
}

}  // namespace

double masked_l1_geo(const FeatureMap& g, const FeatureMap& g_gt,
                     const FeatureMap& modal_gt) {
  require_same_shape(g, g_gt, "g vs g_gt");
  require_mask_shape(g, modal_gt, "modal_gt");
  const size_t plane = g.plane();
  double sum = 0.0;
  for (int c = 0; c < g.channels; ++c) {
    const float* a = g.data.data() + c * plane;
    const float* b = g_gt.data.data() + c * plane;
    const float* m = modal_gt.data.data();
    for (size_t i = 0; i < plane; ++i) {
      sum += std::abs(static_cast<double>(m[i]) * (a[i] - b[i]));
    }
  }
  return sum / (static_cast<double>(plane) * g.channels);
}

FeatureMap error_target(const FeatureMap& g, const FeatureMap& g_gt) {
  require_same_shape(g, g_gt, "g vs g_gt");
  FeatureMap out = g;
  out.layout = LayoutTag::kErr;
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = std::abs(g.data[i] - g_gt.data[i]);
  }
  return out;
}

double masked_l1_err(const FeatureMap& e, const FeatureMap& g,
                     const FeatureMap& g_gt, const FeatureMap& modal_gt) {
  return masked_l1_geo(e, error_target(g, g_gt), modal_gt);
}

double mask_l1(const FeatureMap& modal, const FeatureMap& modal_gt,
               const FeatureMap& amodal, const FeatureMap& amodal_gt) {
  require_same_shape(modal, modal_gt, "modal");
  require_same_shape(amodal, amodal_gt, "amodal");
  auto mean_abs_diff = [](const FeatureMap& a, const FeatureMap& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
      sum += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
    }
    return sum / static_cast<double>(a.data.size());
  };
  return mean_abs_diff(modal, modal_gt) + mean_abs_diff(amodal, amodal_gt);
}

GridPoints make_grid(const Pose& pose, const NormalizedModel& model) {
  static constexpr std::array<double, 4> kXy = {-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};
  static constexpr std::array<double, 2> kZ = {-1.0, 1.0};
  GridPoints grid;
  size_t i = 0;
  for (double z : kZ) {
    for (double y : kXy) {
      for (double x : kXy) {
        const Vec3 p = model.denormalize(Vec3(x, y, z));
        grid[i++] = pose.rotation * p + pose.translation;
      }
    }
  }
  return grid;
}

double grid_loss(const Pose& estimated, const Pose& ground_truth,
                 const NormalizedModel& model) {
  const GridPoints est = make_grid(estimated, model);
  const GridPoints gt = make_grid(ground_truth, model);
  double sum = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    sum += (gt[i] - est[i]).norm();
  }
  const double match = sum / static_cast<double>(est.size());
  const double dist = std::abs(ground_truth.translation.norm() -
                               estimated.translation.norm());
  return match + dist;
}

LossBreakdown total_loss(double geometric, double error, double mask,
                         std::span<const double> pose_candidates,
                         double pose_query, double lambda) {
  auto check = [](double v, const char* what) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw NegativeLoss(std::string("total_loss: negative or non-finite part: ") + what);
    }
  };
  check(geometric, "geometric");
  check(error, "error");
  check(mask, "mask");
  check(pose_query, "pose_query");
  LossBreakdown out;
  out.geometric = geometric;
  out.error = error;
  out.mask = mask;
  out.pose_query = pose_query;
  out.lambda = lambda;
  out.pose_candidates.assign(pose_candidates.begin(), pose_candidates.end());
  double candidate_sum = 0.0;
  for (double part : out.pose_candidates) {
    check(part, "pose candidate");
    candidate_sum += part;
  }
  out.total = lambda * (geometric + error + mask) + candidate_sum + pose_query;
  return out;
}

FeatureMap adain(const FeatureMap& x, std::span<const double> alpha,
                 std::span<const double> beta) {
  if (alpha.size() != static_cast<size_t>(x.channels) ||
      beta.size() != static_cast<size_t>(x.channels)) {
    throw ShapeMismatch("adain: alpha/beta length must equal channel count");
  }
  FeatureMap out = x;
  const size_t plane = x.plane();
  for (int c = 0; c < x.channels; ++c) {
    const float* src = x.data.data() + c * plane;
    float* dst = out.data.data() + c * plane;
    double mean = 0.0;
    for (size_t i = 0; i < plane; ++i) mean += src[i];
    mean /= static_cast<double>(plane);
    double var = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      const double d = src[i] - mean;
      var += d * d;
    }
    double sigma = std::sqrt(var / static_cast<double>(plane));
    if (sigma < 1e-12) sigma += 1e-6;
    for (size_t i = 0; i < plane; ++i) {
      dst[i] = static_cast<float>(alpha[c] * (src[i] - mean) / sigma + beta[c]);
    }
  }
  return out;
}

}  // namespace posekit
