#include "posekit/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json_util.hpp"
#include "posekit/mesh_io.hpp"
#include "posekit/parallel.hpp"
#include "posekit/rng.hpp"

namespace posekit {

using detail::ordered_json;

PredictorSpec PredictorSpec::parse(const std::string& text) {
  PredictorSpec spec;
  if (text == "oracle") {
    spec.kind = Kind::kOracle;
    return spec;
  }
  if (text.rfind("noisy:", 0) == 0) {
    spec.kind = Kind::kNoisy;
    const std::string args = text.substr(6);
    const size_t comma = args.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("predictor spec: expected noisy:<sigma_rot_deg>,<sigma_t_frac>");
    }
    try {
      spec.sigma_rot_deg = std::stod(args.substr(0, comma));
      spec.sigma_t_frac = std::stod(args.substr(comma + 1));
    } catch (const std::exception&) {
      throw ValidationError("predictor spec: bad noisy parameters: " + args);
    }
    return spec;
  }
  if (text.rfind("search:", 0) == 0) {
    spec.kind = Kind::kSearch;
    try {
      spec.budget = std::stoi(text.substr(7));
    } catch (const std::exception&) {
      throw ValidationError("predictor spec: bad search budget: " + text);
    }
    if (spec.budget < 0) throw ValidationError("predictor spec: budget must be >= 0");
    return spec;
  }
  throw ValidationError("predictor spec: unknown predictor: " + text);
}

std::string PredictorSpec::to_string() const {
  switch (kind) {
    case Kind::kOracle:
      return "oracle";
    case Kind::kNoisy: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "noisy:%.17g,%.17g", sigma_rot_deg,
                    sigma_t_frac);
      return buf;
    }
    case Kind::kSearch:
      return "search:" + std::to_string(budget);
  }
  throw ValidationError("predictor spec: unknown kind");
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("config: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
    ExperimentConfig config;
    config.mesh = j.at("mesh").get<std::string>();
    config.object_id = j.value("object_id", config.object_id);
    config.frequencies = j.value("frequencies", config.frequencies);
    config.references = j.value("references", config.references);
    config.iterations = j.value("iterations", config.iterations);
    config.raster = j.value("raster", config.raster);
    if (j.contains("predictor")) {
      config.predictor = PredictorSpec::parse(j["predictor"].get<std::string>());
    }
    config.trials = j.value("trials", config.trials);
    config.seed = j.value("seed", config.seed);
    config.pose_pool = j.value("pose_pool", config.pose_pool);
    if (j.contains("depth_range")) {
      const auto r = j["depth_range"].get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError("config: depth_range needs 2 values");
      config.depth_range = {r[0], r[1]};
    }
    if (j.contains("focal_range")) {
      const auto r = j["focal_range"].get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError("config: focal_range needs 2 values");
      config.focal_range = {r[0], r[1]};
    }
    config.symmetric = j.value("symmetric", config.symmetric);
    config.emit_timings = j.value("emit_timings", config.emit_timings);
    if (j.contains("occlusion")) {
      OcclusionSettings occ;
      occ.mesh = j["occlusion"].at("mesh").get<std::string>();
      occ.min_overlap = j["occlusion"].value("min_overlap", occ.min_overlap);
      occ.max_overlap = j["occlusion"].value("max_overlap", occ.max_overlap);
      occ.max_attempts = j["occlusion"].value("max_attempts", occ.max_attempts);
      config.occlusion = occ;
    }
    if (config.frequencies < 1 || config.references < 1 ||
        config.iterations < 1 || config.raster < 8 || config.trials < 1 ||
        config.pose_pool < config.references) {
      throw ValidationError("config: counts must be positive and pose_pool >= references");
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config: malformed json in " + path.string() + ": " +
                          e.what());
  }
}

QueryArtifacts make_query_artifacts(const NormalizedModel& model,
                                    const Scene& scene,
                                    const NormalizedModel* occluder_model,
                                    int frequencies, int raster) {
  QueryArtifacts artifacts;
  artifacts.render = render(model, scene.gt_pose, scene.intrinsics, raster, raster);
  artifacts.geo = encode_geometric(artifacts.render, frequencies);
  // At pipeline level the query feature is exact, so the error raster is the
  // zero ground truth |G - G| = 0.
  artifacts.err = FeatureMap::zeros(raster, raster, 6 * frequencies, LayoutTag::kErr);
  artifacts.rgb = render_rgb(artifacts.render, model, scene.gt_pose);
  artifacts.modal = artifacts.render.modal;

  if (scene.occluder) {
    if (!occluder_model) {
      throw ValidationError("query: scene has an occluder but no occluder model was given");
    }
    const RenderResult occ = render(*occluder_model, scene.occluder->pose,
                                    scene.intrinsics, raster, raster);
    const FeatureMap occ_rgb = render_rgb(occ, *occluder_model, scene.occluder->pose);
    OcclusionResult composited =
        composite_occlusion(artifacts.render, artifacts.rgb, occ, occ_rgb);
    artifacts.rgb = std::move(composited.rgb);
    artifacts.modal = std::move(composited.modal);
  }

  artifacts.feature = assemble_query(artifacts.geo, artifacts.err, artifacts.rgb,
                                     artifacts.modal, artifacts.render.amodal);
  return artifacts;
}

OccluderPlacement sample_occluder_placement(const NormalizedModel& model,
                                            const Scene& scene,
                                            const NormalizedModel& occluder_model,
                                            const OcclusionSettings& settings,
                                            int raster, uint64_t seed) {
  const RenderResult target =
      render(model, scene.gt_pose, scene.intrinsics, raster, raster);
  double target_area = 0.0;
  std::vector<std::pair<int, int>> masked;
  for (int y = 0; y < raster; ++y) {
    for (int x = 0; x < raster; ++x) {
      if (target.amodal.at(0, y, x) != 0.0f) {
        masked.emplace_back(y, x);
        target_area += 1.0;
      }
    }
  }
  if (masked.empty()) {
    throw ValidationError("occluder: target renders to an empty mask");
  }

  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  OccluderPlacement best;
  double best_gap = std::numeric_limits<double>::max();
  for (int attempt = 0; attempt < settings.max_attempts; ++attempt) {
    // Aim the occluder center at a random masked pixel, in front of the
    // target along that pixel's ray.
    const auto [py, px] = masked[static_cast<size_t>(uniform(engine) * masked.size()) %
                                 masked.size()];
    const double u = px + 0.5;
    const double v = py + 0.5;
    const double z = scene.gt_pose.translation.z() * (0.45 + 0.4 * uniform(engine));

    OccluderPlacement placement;
    placement.mesh = settings.mesh;
    placement.pose.rotation = random_rotation(engine);
    placement.pose.translation =
        Vec3((u - scene.intrinsics.cx) * z / scene.intrinsics.fx,
             (v - scene.intrinsics.cy) * z / scene.intrinsics.fy, z);

    const RenderResult occ = render(occluder_model, placement.pose,
                                    scene.intrinsics, raster, raster);
    double hidden = 0.0;
    for (const auto& [y, x] : masked) {
      const size_t idx = static_cast<size_t>(y) * raster + x;
      if (occ.amodal.at(0, y, x) != 0.0f && occ.depth[idx] < target.depth[idx]) {
        hidden += 1.0;
      }
    }
    const double overlap = hidden / target_area;
    if (overlap >= settings.min_overlap && overlap <= settings.max_overlap) {
      return placement;
    }
    const double mid = 0.5 * (settings.min_overlap + settings.max_overlap);
    if (std::abs(overlap - mid) < best_gap) {
      best_gap = std::abs(overlap - mid);
      best = placement;
    }
  }
  return best;  // attempt cap reached; closest overlap wins
}

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          uint64_t seed,
                                          const QueryArtifacts* artifacts,
                                          const NormalizedModel& model,
                                          int frequencies, int raster,
                                          bool symmetric) {
  switch (spec.kind) {
    case PredictorSpec::Kind::kOracle:
      return make_oracle_predictor();
    case PredictorSpec::Kind::kNoisy:
      return make_noisy_oracle_predictor(spec.sigma_rot_deg * M_PI / 180.0,
                                         spec.sigma_t_frac, seed);
    case PredictorSpec::Kind::kSearch: {
      if (!artifacts) {
        throw ValidationError("search predictor: query artifacts required");
      }
      SearchSettings settings;
      settings.budget = spec.budget;
      settings.seed = seed;
      settings.symmetric = symmetric;
      return make_search_predictor(artifacts->geo, model, frequencies, raster,
                                   settings);
    }
  }
  throw ValidationError("predictor spec: unknown kind");
}

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

ResultRecord run_trial(const NormalizedModel& model,
                       const NormalizedModel* occluder_model,
                       const ReferenceBank& bank, const Scene& scene, int trial,
                       const ExperimentConfig& config, uint64_t trial_seed) {
  ResultRecord record;
  record.trial = trial;
  record.scene_seed = scene.seed;
  record.scene = scene;

  auto start = std::chrono::steady_clock::now();
  const QueryArtifacts artifacts = make_query_artifacts(
      model, scene, occluder_model, config.frequencies, config.raster);
  record.timings.query_ms = elapsed_ms(start);

  const auto predictor =
      make_predictor(config.predictor, trial_seed, &artifacts, model,
                     config.frequencies, config.raster, scene.symmetric);

  QueryContext query;
  query.feature = &artifacts.feature;
  query.intrinsics = scene.intrinsics;
  query.frequencies = config.frequencies;
  query.symmetric = scene.symmetric;
  if (predictor->needs_ground_truth()) query.gt_pose = scene.gt_pose;

  start = std::chrono::steady_clock::now();
  std::vector<Candidate> candidates;
  record.medoid = multi_reference_refine(query, bank, *predictor, &candidates);
  record.timings.multi_ms = elapsed_ms(start);
  record.candidate0 = candidates.front().pose;
  record.candidate0_rot_error =
      geodesic_distance(record.candidate0.rotation, scene.gt_pose.rotation);
  record.medoid_rot_error =
      geodesic_distance(record.medoid.rotation, scene.gt_pose.rotation);

  start = std::chrono::steady_clock::now();
  record.final_pose =
      iterative_refine(query, record.medoid, *predictor, config.iterations,
                       model, config.frequencies, config.raster,
                       &record.iteration_poses);
  record.timings.iterative_ms = elapsed_ms(start);

  record.report =
      evaluate_pose(record.final_pose, scene.gt_pose, model, scene.symmetric);
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = config;

  const Mesh mesh = load_mesh(config.mesh);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  std::optional<NormalizedModel> occluder_model;
  if (config.occlusion) {
    const Mesh occ = load_mesh(config.occlusion->mesh);
    occluder_model = normalize_model(occ.vertices, occ.triangles);
  }

  // Reference pool: poses and per-pose intrinsics drawn like scenes, from a
  // dedicated seed stream so trial streams stay independent.
  const auto bank_start = std::chrono::steady_clock::now();
  const SceneSamplingParams sampling = config.sampling();
  std::vector<Pose> pool;
  std::vector<Intrinsics> pool_intrinsics;
  pool.reserve(config.pose_pool);
  for (int i = 0; i < config.pose_pool; ++i) {
    const Scene draw = sample_scene(sampling, config.object_id, config.symmetric,
                                    derive_seed(config.seed, 1000000 + i));
    pool.push_back(draw.gt_pose);
    pool_intrinsics.push_back(draw.intrinsics);
  }
  const ReferenceBank bank =
      build_bank(config.object_id, model, pool, pool_intrinsics,
                 config.references, config.frequencies, config.raster);
  const double bank_ms = elapsed_ms(bank_start);

  result.records.resize(config.trials);
  const NormalizedModel* occluder_ptr =
      occluder_model ? &*occluder_model : nullptr;

  parallel_for(config.trials, thread_count_from_env(), [&](size_t trial) {
    const uint64_t scene_seed = derive_seed(config.seed, trial);
    const uint64_t predictor_seed = derive_seed(config.seed, trial + 500000);
    Scene scene = sample_scene(sampling, config.object_id, config.symmetric,
                               scene_seed);
    try {
      if (config.occlusion) {
        scene.occluder = sample_occluder_placement(
            model, scene, *occluder_ptr, *config.occlusion, config.raster,
            derive_seed(config.seed, trial + 750000));
      }
      result.records[trial] =
          run_trial(model, occluder_ptr, bank, scene, static_cast<int>(trial),
                    config, predictor_seed);
    } catch (const Error& e) {
      ResultRecord failed;
      failed.trial = static_cast<int>(trial);
      failed.scene_seed = scene_seed;
      failed.scene = scene;
      failed.failure = e.what();
      result.records[trial] = std::move(failed);
    }
  });

  result.summary = compute_summary(config, result.records, model, bank_ms);
  return result;
}

ExperimentSummary compute_summary(const ExperimentConfig& config,
                                  std::span<const ResultRecord> records,
                                  const NormalizedModel& model, double bank_ms) {
  ExperimentSummary summary;
  summary.trials = static_cast<int>(records.size());
  summary.bank_ms = bank_ms;

  std::vector<double> errors;
  int wins = 0;
  int voted = 0;
  for (const ResultRecord& record : records) {
    if (record.failure) {
      ++summary.failures;
      continue;
    }
    const double headline =
        record.scene.symmetric ? record.report.add_s : record.report.add;
    errors.push_back(headline);
    summary.mean_add += record.report.add;
    summary.mean_add_s += record.report.add_s;
    summary.candidate0_mean_rot_error += record.candidate0_rot_error;
    summary.medoid_mean_rot_error += record.medoid_rot_error;
    if (record.medoid_rot_error < record.candidate0_rot_error) ++wins;
    ++voted;
    summary.mean_timings.query_ms += record.timings.query_ms;
    summary.mean_timings.multi_ms += record.timings.multi_ms;
    summary.mean_timings.iterative_ms += record.timings.iterative_ms;
  }
  if (!errors.empty()) {
    summary.accuracy_002d = threshold_accuracy(errors, model.diameter, 0.02);
    summary.accuracy_005d = threshold_accuracy(errors, model.diameter, 0.05);
    summary.accuracy_01d = threshold_accuracy(errors, model.diameter, 0.1);
    summary.auc = auc_add(errors);
    const double n = static_cast<double>(voted);
    summary.mean_add /= n;
    summary.mean_add_s /= n;
    summary.candidate0_mean_rot_error /= n;
    summary.medoid_mean_rot_error /= n;
    summary.medoid_win_rate = wins / n;
    summary.mean_timings.query_ms /= n;
    summary.mean_timings.multi_ms /= n;
    summary.mean_timings.iterative_ms /= n;
  }
  (void)config;
  return summary;
}

}  // namespace posekit
