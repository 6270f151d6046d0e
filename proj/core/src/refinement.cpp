#include "posekit/refinement.hpp"

#include <cmath>

#include "posekit/rng.hpp"

namespace posekit {

Candidate untangled_update(const RefinementParams& params, const Pose& ref_pose,
                           const Intrinsics& ref_intrinsics,
                           const Intrinsics& query_intrinsics,
                           int source_reference) {
  const double f_r = ref_intrinsics.focal();
  const double f_q = query_intrinsics.focal();
  const Vec3& t_r = ref_pose.translation;
  if (t_r.z() <= 0.0) {
    throw ValidationError("untangled_update: reference depth must be positive");
  }
  if (params.translation.z() <= -1.0) {
    throw ValidationError("untangled_update: v_z must stay above -1");
  }

  const double t_cz = t_r.z() * (params.translation.z() + 1.0) * f_q / f_r;

  // Reference object center as a homogeneous pixel point; the third
  // component rides along untouched by the (v_x, v_y, 0) shift.
  const Vec3 o_r = ref_intrinsics.matrix() * t_r / t_r.z();
  const Vec3 o_c = o_r + Vec3(params.translation.x(), params.translation.y(), 0.0);

  const double x = (o_c.x() - query_intrinsics.cx * o_c.z()) / query_intrinsics.fx;
  const double y = (o_c.y() - query_intrinsics.cy * o_c.z()) / query_intrinsics.fy;
  const Vec3 t_c(t_cz * x, t_cz * y, t_cz);

  const Mat3 ref_allo = egocentric_to_allocentric(ref_pose.rotation, t_r);
  const Mat3 delta = rot6d_to_matrix(params.rotation);
  const Mat3 refined_allo = delta * ref_allo;

  Candidate candidate;
  candidate.pose.rotation = allocentric_to_egocentric(refined_allo, t_c);
  candidate.pose.translation = t_c;
  candidate.source_reference = source_reference;
  return candidate;
}

RefinementParams oracle_params(const Pose& ref_pose,
                               const Intrinsics& ref_intrinsics,
                               const Pose& target_pose,
                               const Intrinsics& target_intrinsics) {
  const double f_r = ref_intrinsics.focal();
  const double f_q = target_intrinsics.focal();
  const Vec3& t_r = ref_pose.translation;
  const Vec3& t_q = target_pose.translation;
  if (t_r.z() <= 0.0 || t_q.z() <= 0.0) {
    throw ValidationError("oracle_params: depths must be positive");
  }

  RefinementParams params;
  params.translation.z() = (t_q.z() * f_r) / (t_r.z() * f_q) - 1.0;

  const Vec3 o_r = ref_intrinsics.matrix() * t_r / t_r.z();
  const Vec3 o_q = target_intrinsics.matrix() * t_q / t_q.z();
  params.translation.x() = o_q.x() - o_r.x();
  params.translation.y() = o_q.y() - o_r.y();

  const Mat3 ref_allo = egocentric_to_allocentric(ref_pose.rotation, t_r);
  const Mat3 target_allo = egocentric_to_allocentric(target_pose.rotation, t_q);
  params.rotation = matrix_to_rot6d(target_allo * ref_allo.transpose());
  return params;
}

Pose plain_update(const RefinementParams& params, const Pose& pose,
                  const Intrinsics& intrinsics) {
  return untangled_update(params, pose, intrinsics, intrinsics).pose;
}

Pose medoid_vote(std::span<const Candidate> candidates) {
  if (candidates.empty()) {
    throw EmptyCandidates("medoid_vote: no candidates");
  }
  const size_t n = candidates.size();
  if (n == 1) return candidates[0].pose;

  size_t best_rot = 0, best_trans = 0;
  double best_rot_sum = std::numeric_limits<double>::max();
  double best_trans_sum = std::numeric_limits<double>::max();
  for (size_t i = 0; i < n; ++i) {
    double rot_sum = 0.0;
    double trans_sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      rot_sum += geodesic_distance(candidates[i].pose.rotation,
                                   candidates[k].pose.rotation);
      trans_sum += (candidates[k].pose.translation -
                    candidates[i].pose.translation).norm();
    }
    if (rot_sum < best_rot_sum) {
      best_rot_sum = rot_sum;
      best_rot = i;
    }
    if (trans_sum < best_trans_sum) {
      best_trans_sum = trans_sum;
      best_trans = i;
    }
  }

  Pose medoid;
  medoid.rotation = candidates[best_rot].pose.rotation;
  medoid.translation = candidates[best_trans].pose.translation;
  return medoid;
}

Pose multi_reference_refine(const QueryContext& query, const ReferenceBank& bank,
                            const Predictor& predictor,
                            std::vector<Candidate>* candidates_out) {
  if (bank.references.empty()) {
    throw EmptyCandidates("multi_reference_refine: empty reference bank");
  }
  std::vector<Candidate> candidates;
  candidates.reserve(bank.references.size());
  for (size_t i = 0; i < bank.references.size(); ++i) {
    const Reference& ref = bank.references[i];
    ReferenceContext ctx;
    ctx.feature = &ref.feature;
    ctx.pose = ref.pose;
    ctx.intrinsics = ref.intrinsics;
    const RefinementParams params = predictor.predict(query, ctx);
    candidates.push_back(untangled_update(params, ref.pose, ref.intrinsics,
                                          query.intrinsics,
                                          static_cast<int>(i)));
  }
  const Pose voted = medoid_vote(candidates);
  if (candidates_out) *candidates_out = std::move(candidates);
  return voted;
}

Pose iterative_refine(const QueryContext& query, const Pose& initial,
                      const Predictor& predictor, int iterations,
                      const NormalizedModel& model, int frequencies, int raster,
                      std::vector<Pose>* trace) {
  if (iterations < 1) {
    throw ValidationError("iterative_refine: iterations must be >= 1");
  }
  Pose pose = initial;
  if (trace) trace->clear();
  for (int iter = 0; iter < iterations; ++iter) {
    const RenderResult rendered =
        render(model, pose, query.intrinsics, raster, raster);
    const FeatureMap geo = encode_geometric(rendered, frequencies);
    const FeatureMap medoid_feature =
        assemble_medoid(geo, rendered.modal, rendered.amodal);

    ReferenceContext ctx;
    ctx.feature = &medoid_feature;
    ctx.pose = pose;
    ctx.intrinsics = query.intrinsics;
    const RefinementParams params = predictor.predict(query, ctx);
    pose = plain_update(params, pose, query.intrinsics);
    if (trace) trace->push_back(pose);
  }
  return pose;
}

namespace {

uint64_t reference_stream_seed(uint64_t seed, const ReferenceContext& ref) {
  uint64_t hash = 0xcbf29ce484222325ULL ^ seed;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) hash_append(&hash, ref.pose.rotation(r, c));
    hash_append(&hash, ref.pose.translation[r]);
  }
  hash_append(&hash, ref.intrinsics.fx);
  hash_append(&hash, ref.intrinsics.fy);
  hash_append(&hash, ref.intrinsics.cx);
  hash_append(&hash, ref.intrinsics.cy);
  return hash;
}

class OraclePredictor final : public Predictor {
 public:
  RefinementParams predict(const QueryContext& query,
                           const ReferenceContext& reference) const override {
    if (!query.gt_pose) {
      throw ValidationError("oracle predictor: query context lacks the ground-truth pose");
    }
    return oracle_params(reference.pose, reference.intrinsics, *query.gt_pose,
                         query.intrinsics);
  }
  bool needs_ground_truth() const override { return true; }
};

class NoisyOraclePredictor final : public Predictor {
 public:
  NoisyOraclePredictor(double sigma_rot_rad, double sigma_t_frac, uint64_t seed)
      : sigma_rot_(sigma_rot_rad), sigma_t_(sigma_t_frac), seed_(seed) {}

  RefinementParams predict(const QueryContext& query,
                           const ReferenceContext& reference) const override {
    if (!query.gt_pose) {
      throw ValidationError("noisy oracle: query context lacks the ground-truth pose");
    }
    std::mt19937_64 engine(reference_stream_seed(seed_, reference));
    std::normal_distribution<double> normal(0.0, 1.0);

    Pose target = *query.gt_pose;
    Vec3 axis(normal(engine), normal(engine), normal(engine));
    const double angle = sigma_rot_ * normal(engine);
    if (axis.norm() > 1e-12 && std::abs(angle) > 0.0) {
      target.rotation = target.rotation *
                        Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    }
    for (int i = 0; i < 3; ++i) {
      target.translation[i] *= 1.0 + sigma_t_ * normal(engine);
    }
    return oracle_params(reference.pose, reference.intrinsics, target,
                         query.intrinsics);
  }
  bool needs_ground_truth() const override { return true; }

 private:
  double sigma_rot_;
  double sigma_t_;
  uint64_t seed_;
};

}  // namespace

std::unique_ptr<Predictor> make_oracle_predictor() {
  return std::make_unique<OraclePredictor>();
}

std::unique_ptr<Predictor> make_noisy_oracle_predictor(double sigma_rot_rad,
                                                       double sigma_t_frac,
                                                       uint64_t seed) {
  return std::make_unique<NoisyOraclePredictor>(sigma_rot_rad, sigma_t_frac, seed);
}

}  // namespace posekit
