#pragma once

#include <memory>
#include <optional>

#include "posekit/reference_bank.hpp"

namespace posekit {

/// Intrinsic-untangled refinement parameters: v_xyz holds an image-plane
/// center shift (v_x, v_y in reference pixels) and a relative depth scale
/// v_z > -1; rotation is the 6-D delta applied in the allocentric frame.
struct RefinementParams {
  Rot6d rotation = rot6d_identity();
  Vec3 translation = Vec3::Zero();  // (v_x, v_y, v_z)

  static RefinementParams identity() { return {}; }
};

struct Candidate {
  Pose pose;
  int source_reference = -1;
};

/// What a predictor sees of the query. The feature raster pointer is
/// non-owning and only valid for the duration of a predict call; gt_pose is
/// populated only for predictors that declare needs_ground_truth.
struct QueryContext {
  const FeatureMap* feature = nullptr;  // QUERY layout when present
  Intrinsics intrinsics;
  int frequencies = 5;
  bool symmetric = false;
  std::optional<Pose> gt_pose;
};

/// One reference (or medoid re-render) as seen by a predictor.
struct ReferenceContext {
  const FeatureMap* feature = nullptr;  // REF or MEDOID layout
  Pose pose;
  Intrinsics intrinsics;
};

/// Stand-in for the learned pose head: maps (query, reference) to refinement
/// parameters. Implementations must be deterministic given their seed and
/// independent of call order.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual RefinementParams predict(const QueryContext& query,
                                   const ReferenceContext& reference) const = 0;
  virtual bool needs_ground_truth() const { return false; }
  virtual bool thread_safe() const { return true; }
};

/// The untangled pose update: depth from the focal-ratio-scaled v_z, image
/// center moved on the reference pixel plane then unprojected through the
/// query intrinsics, rotation refined in the allocentric frame.
Candidate untangled_update(const RefinementParams& params, const Pose& ref_pose,
                           const Intrinsics& ref_intrinsics,
                           const Intrinsics& query_intrinsics,
                           int source_reference = -1);

/// Closed-form inverse of untangled_update:
/// untangled_update(oracle_params(r, q), r, K_q) reproduces q.
RefinementParams oracle_params(const Pose& ref_pose,
                               const Intrinsics& ref_intrinsics,
                               const Pose& target_pose,
                               const Intrinsics& target_intrinsics);

/// Single-reference update with shared intrinsics.
Pose plain_update(const RefinementParams& params, const Pose& pose,
                  const Intrinsics& intrinsics);

/// Component-wise medoid: rotation from the candidate minimizing the summed
/// geodesic distance to the others, translation from the candidate
/// minimizing the summed Euclidean distance; ties break to the lowest index.
Pose medoid_vote(std::span<const Candidate> candidates);

/// Per-reference prediction + untangled update, then medoid voting.
/// Optionally reports the individual candidates.
Pose multi_reference_refine(const QueryContext& query, const ReferenceBank& bank,
                            const Predictor& predictor,
                            std::vector<Candidate>* candidates_out = nullptr);

/// Render-and-compare loop: each iteration re-renders the current pose with
/// the query intrinsics, assembles the imageless medoid feature, and applies
/// the plain update. Per-iteration poses are recorded when trace is given.
Pose iterative_refine(const QueryContext& query, const Pose& initial,
                      const Predictor& predictor, int iterations,
                      const NormalizedModel& model, int frequencies, int raster,
                      std::vector<Pose>* trace = nullptr);

/// Exact inverse-model predictor; requires gt_pose in the query context.
std::unique_ptr<Predictor> make_oracle_predictor();

/// Oracle aimed at a perturbed ground truth: rotation composed with a random
/// axis-angle of N(0, sigma_rot) radians, translation scaled per axis by
/// (1 + N(0, sigma_t_frac)). The perturbation stream is derived from the
/// seed and the reference parameters, so it is call-order independent.
std::unique_ptr<Predictor> make_noisy_oracle_predictor(double sigma_rot_rad,
                                                       double sigma_t_frac,
                                                       uint64_t seed);

struct SearchSettings {
  int budget = 2000;    // objective evaluations per predict call
  uint64_t seed = 0;
  bool symmetric = false;  // compare cosine channels only
};

/// Derivative-free stand-in for the learned head: Nelder-Mead over the
/// 9-vector (v_xyz, v_rot), seeded at identity with seeded perturbation
/// restarts, minimizing the mean masked L1 between the candidate's rendered
/// geometric feature and the supplied target. Runs out of budget gracefully,
/// returning the best parameters found.
std::unique_ptr<Predictor> make_search_predictor(FeatureMap target_geo,
                                                 const NormalizedModel& model,
                                                 int frequencies, int raster,
                                                 const SearchSettings& settings);

}  // namespace posekit
