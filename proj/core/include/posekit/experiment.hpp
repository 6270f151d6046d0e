#pragma once

#include <optional>
#include <string>

#include "posekit/metrics.hpp"
#include "posekit/refinement.hpp"
#include "posekit/scene.hpp"

namespace posekit {

/// Predictor selection string: "oracle" | "noisy:<sigma_rot_deg>,<sigma_t_frac>"
/// | "search:<budget>".
struct PredictorSpec {
  enum class Kind { kOracle, kNoisy, kSearch };
  Kind kind = Kind::kOracle;
  double sigma_rot_deg = 10.0;
  double sigma_t_frac = 0.05;
  int budget = 2000;

  static PredictorSpec parse(const std::string& text);
  std::string to_string() const;
};

struct OcclusionSettings {
  std::string mesh;            // occluder mesh path
  double min_overlap = 0.2;    // fraction of the target amodal area
  double max_overlap = 0.6;
  int max_attempts = 100;
};

struct ExperimentConfig {
  std::string mesh;
  std::string object_id = "object";
  int frequencies = 5;   // N
  int references = 4;    // M
  int iterations = 4;
  int raster = 64;
  PredictorSpec predictor;
  int trials = 50;
  uint64_t seed = 0;
  int pose_pool = 256;
  std::array<double, 2> depth_range = {0.5, 2.0};
  std::array<double, 2> focal_range = {300.0, 1200.0};
  bool symmetric = false;
  std::optional<OcclusionSettings> occlusion;
  bool emit_timings = false;  // timings vary run to run; opt-in for reports

  SceneSamplingParams sampling() const {
    return {raster, depth_range, focal_range, 0.1};
  }
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Everything derived from one scene's ground truth: the target render, the
/// GT geometric feature, the zero error raster, the (possibly occluded)
/// image and modal mask, and the assembled query feature.
struct QueryArtifacts {
  RenderResult render;
  FeatureMap geo;
  FeatureMap err;
  FeatureMap rgb;
  FeatureMap modal;
  FeatureMap feature;  // QUERY layout
};

/// Renders the ground-truth query rasters and composites the occluder when
/// the scene carries one.
QueryArtifacts make_query_artifacts(const NormalizedModel& model,
                                    const Scene& scene,
                                    const NormalizedModel* occluder_model,
                                    int frequencies, int raster);

/// Places the occluder in front of the target so that it hides between
/// min_overlap and max_overlap of the target's amodal area; rejection
/// sampling with a bounded attempt count, keeping the best attempt on
/// failure.
OccluderPlacement sample_occluder_placement(const NormalizedModel& model,
                                            const Scene& scene,
                                            const NormalizedModel& occluder_model,
                                            const OcclusionSettings& settings,
                                            int raster, uint64_t seed);

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          uint64_t seed,
                                          const QueryArtifacts* artifacts,
                                          const NormalizedModel& model,
                                          int frequencies, int raster,
                                          bool symmetric);

struct StageTimings {
  double query_ms = 0.0;
  double multi_ms = 0.0;
  double iterative_ms = 0.0;
};

struct ResultRecord {
  int trial = 0;
  uint64_t scene_seed = 0;
  Scene scene;
  Pose candidate0;
  Pose medoid;                       // P_m
  std::vector<Pose> iteration_poses; // per refinement step
  Pose final_pose;                   // P_q
  PoseErrorReport report;
  double candidate0_rot_error = 0.0; // geodesic to GT, radians
  double medoid_rot_error = 0.0;
  std::optional<std::string> failure;
  StageTimings timings;
};

struct ExperimentSummary {
  int trials = 0;
  int failures = 0;
  double accuracy_002d = 0.0;
  double accuracy_005d = 0.0;
  double accuracy_01d = 0.0;
  double auc = 0.0;
  double mean_add = 0.0;
  double mean_add_s = 0.0;
  double candidate0_mean_rot_error = 0.0;
  double medoid_mean_rot_error = 0.0;
  double medoid_win_rate = 0.0;
  double bank_ms = 0.0;
  StageTimings mean_timings;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRecord> records;
  ExperimentSummary summary;
};

/// One scene through the full pipeline: query rasters, multi-reference
/// refinement, medoid voting, iterative refinement, metrics.
ResultRecord run_trial(const NormalizedModel& model,
                       const NormalizedModel* occluder_model,
                       const ReferenceBank& bank, const Scene& scene, int trial,
                       const ExperimentConfig& config, uint64_t trial_seed);

/// Builds the bank once, then runs all trials (parallel across trials, with
/// per-trial seed streams so results are independent of the thread count).
ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentSummary compute_summary(const ExperimentConfig& config,
                                  std::span<const ResultRecord> records,
                                  const NormalizedModel& model, double bank_ms);

}  // namespace posekit
