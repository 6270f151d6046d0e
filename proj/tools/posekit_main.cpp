#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "posekit/experiment.hpp"
#include "posekit/mesh_io.hpp"
#include "posekit/reports.hpp"
#include "posekit/rng.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace posekit;

ordered_json pose_json(const Pose& pose) {
  ordered_json j;
  auto& r = j["R"] = ordered_json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(pose.rotation(row, col));
  }
  j["t"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  return j;
}

Pose pose_from(const ordered_json& j) {
  const auto r = j.at("R").get<std::vector<double>>();
  const auto t = j.at("t").get<std::vector<double>>();
  if (r.size() != 9 || t.size() != 3) {
    throw ValidationError("pose json: expected 9 rotation and 3 translation floats");
  }
  Pose pose;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) pose.rotation(row, col) = r[row * 3 + col];
  }
  pose.translation = Vec3(t[0], t[1], t[2]);
  return pose;
}

struct SamplingFlags {
  int pool = 256;
  std::vector<double> depth_range = {0.5, 2.0};
  std::vector<double> focal_range = {300.0, 1200.0};

  void attach(CLI::App* cmd) {
    cmd->add_option("--pool", pool, "Pose pool size sampled before FPS selection")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--depth-range", depth_range, "Scene depth range in meters")
        ->expected(2);
    cmd->add_option("--focal-range", focal_range, "Focal length range in pixels")
        ->expected(2);
  }

  SceneSamplingParams params(int raster) const {
    SceneSamplingParams p;
    p.raster = raster;
    p.depth_range = {depth_range[0], depth_range[1]};
    p.focal_range = {focal_range[0], focal_range[1]};
    return p;
  }
};

int cmd_gen_refs(const std::string& mesh_path, int count, int frequencies,
                 int raster, const std::string& out_dir, uint64_t seed,
                 const SamplingFlags& flags, const std::string& object_id) {
  const Mesh mesh = load_mesh(mesh_path);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const SceneSamplingParams sampling = flags.params(raster);

  std::vector<Pose> pool;
  std::vector<Intrinsics> intrinsics;
  for (int i = 0; i < flags.pool; ++i) {
    const Scene draw =
        sample_scene(sampling, object_id, false, derive_seed(seed, 1000000 + i));
    pool.push_back(draw.gt_pose);
    intrinsics.push_back(draw.intrinsics);
  }
  const ReferenceBank bank = build_bank(object_id, model, pool, intrinsics,
                                        count, frequencies, raster);
  save_bank(bank, out_dir);
  std::cout << "wrote bank with " << bank.references.size() << " references to "
            << out_dir << "\n";
  return 0;
}

int cmd_refine(const std::string& bank_dir, const std::string& scene_path,
               const std::string& predictor_spec, int iterations,
               const std::string& out_path, uint64_t seed) {
  const ReferenceBank bank = load_bank(bank_dir);
  const Scene scene = load_scene(scene_path);
  if (!scene.object_id.empty() && scene.object_id != bank.object_id) {
    throw ValidationError("refine: scene object '" + scene.object_id +
                          "' does not match bank object '" + bank.object_id + "'");
  }
  std::optional<NormalizedModel> occluder;
  if (scene.occluder) {
    const Mesh mesh = load_mesh(scene.occluder->mesh);
    occluder = normalize_model(mesh.vertices, mesh.triangles);
  }

  const PredictorSpec spec = PredictorSpec::parse(predictor_spec);
  const QueryArtifacts artifacts =
      make_query_artifacts(bank.model, scene, occluder ? &*occluder : nullptr,
                           bank.frequencies, bank.raster);
  const auto predictor = make_predictor(spec, seed, &artifacts, bank.model,
                                        bank.frequencies, bank.raster,
                                        scene.symmetric);

  QueryContext query;
  query.feature = &artifacts.feature;
  query.intrinsics = scene.intrinsics;
  query.frequencies = bank.frequencies;
  query.symmetric = scene.symmetric;
  if (predictor->needs_ground_truth()) query.gt_pose = scene.gt_pose;

  std::vector<Candidate> candidates;
  const Pose medoid = multi_reference_refine(query, bank, *predictor, &candidates);
  std::vector<Pose> trace;
  const Pose final_pose =
      iterative_refine(query, medoid, *predictor, iterations, bank.model,
                       bank.frequencies, bank.raster, &trace);
  const PoseErrorReport report =
      evaluate_pose(final_pose, scene.gt_pose, bank.model, scene.symmetric);

  ordered_json out;
  out["scene"] = scene_path;
  out["predictor"] = spec.to_string();
  auto& cand = out["candidates"] = ordered_json::array();
  for (const Candidate& c : candidates) {
    ordered_json entry = pose_json(c.pose);
    entry["source_reference"] = c.source_reference;
    cand.push_back(std::move(entry));
  }
  out["p_m"] = pose_json(medoid);
  auto& iters = out["iterations"] = ordered_json::array();
  for (const Pose& pose : trace) iters.push_back(pose_json(pose));
  out["p_q"] = pose_json(final_pose);
  out["metrics"] = ordered_json{{"add", report.add},
                                {"add_s", report.add_s},
                                {"diameter", report.diameter},
                                {"passes_002d", report.passes_002d},
                                {"passes_005d", report.passes_005d},
                                {"passes_01d", report.passes_01d}};
  std::ofstream file(out_path);
  if (!file) throw IoFailure("refine: cannot write " + out_path);
  file << out.dump(2) << '\n';
  if (!file) throw IoFailure("refine: write failed: " + out_path);
  std::cout << "refined pose written to " << out_path << " (add "
            << report.add << " m)\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<uint64_t> seed_override) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (seed_override) config.seed = *seed_override;
  const ExperimentResult result = run_experiment(config);
  emit_reports(result, out_dir);
  std::cout << "trials " << result.summary.trials << ", failures "
            << result.summary.failures << ", add(-s) 0.1d accuracy "
            << result.summary.accuracy_01d << ", auc " << result.summary.auc
            << "\nreports in " << out_dir << "\n";
  return 0;
}

int cmd_carve(const std::string& views_dir, int resolution,
              const std::string& out_path) {
  const auto manifest_path = std::filesystem::path(views_dir) / "views.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoFailure("carve: cannot open " + manifest_path.string());
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("carve: malformed views.json: ") + e.what());
  }

  double scale = 1.0;
  Vec3 offset = Vec3::Zero();
  std::vector<CarveView> views;
  try {
    scale = manifest.at("scale").get<double>();
    const auto off = manifest.at("center_offset").get<std::vector<double>>();
    if (off.size() != 3) throw ValidationError("carve: center_offset needs 3 floats");
    offset = Vec3(off[0], off[1], off[2]);
    for (const auto& entry : manifest.at("views")) {
      CarveView view;
      view.pose = pose_from(entry.at("pose"));
      const auto& k = entry.at("K");
      view.intrinsics.fx = k.at("fx").get<double>();
      view.intrinsics.fy = k.at("fy").get<double>();
      view.intrinsics.cx = k.at("cx").get<double>();
      view.intrinsics.cy = k.at("cy").get<double>();
      view.intrinsics.width = k.at("w").get<int>();
      view.intrinsics.height = k.at("h").get<int>();
      view.amodal = load_fmap(std::filesystem::path(views_dir) /
                              entry.at("mask").get<std::string>());
      views.push_back(std::move(view));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("carve: views.json field error: ") + e.what());
  }

  const std::vector<Vec3> surface = space_carve(views, resolution, scale, offset);
  save_ply_points(out_path, surface);
  std::cout << "carved " << surface.size() << " surface points to " << out_path
            << "\n";
  return 0;
}

int cmd_synth(const std::string& mesh_path, int trials, uint64_t seed,
              const std::string& out_dir, int raster,
              const SamplingFlags& flags, const std::string& object_id,
              bool symmetric) {
  const Mesh mesh = load_mesh(mesh_path);
  const NormalizedModel model = normalize_model(mesh.vertices, mesh.triangles);
  const SceneSamplingParams sampling = flags.params(raster);

  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(out_dir) / "views", ec);
  if (ec) throw IoFailure("synth: cannot create " + out_dir);

  ordered_json views_manifest;
  views_manifest["scale"] = model.scale;
  views_manifest["center_offset"] = {model.center_offset.x(),
                                     model.center_offset.y(),
                                     model.center_offset.z()};
  auto& views = views_manifest["views"] = ordered_json::array();

  for (int i = 0; i < trials; ++i) {
    const Scene scene =
        sample_scene(sampling, object_id, symmetric, derive_seed(seed, i));
    save_scene(std::filesystem::path(out_dir) /
                   ("scene_" + std::to_string(i) + ".json"),
               scene);

    const RenderResult rendered =
        render(model, scene.gt_pose, scene.intrinsics, raster, raster);
    const std::string mask_name = "mask_" + std::to_string(i) + ".fmap";
    save_fmap(std::filesystem::path(out_dir) / "views" / mask_name,
              rendered.amodal);
    ordered_json entry;
    entry["pose"] = pose_json(scene.gt_pose);
    entry["K"] = ordered_json{{"fx", scene.intrinsics.fx},
                              {"fy", scene.intrinsics.fy},
                              {"cx", scene.intrinsics.cx},
                              {"cy", scene.intrinsics.cy},
                              {"w", scene.intrinsics.width},
                              {"h", scene.intrinsics.height}};
    entry["mask"] = mask_name;
    views.push_back(std::move(entry));
  }

  std::ofstream file(std::filesystem::path(out_dir) / "views" / "views.json");
  if (!file) throw IoFailure("synth: cannot write views.json");
  file << views_manifest.dump(2) << '\n';
  if (!file) throw IoFailure("synth: views.json write failed");
  std::cout << "wrote " << trials << " scenes and silhouette views to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posekit: multi-reference render-and-compare pose refinement toolkit"};
  app.require_subcommand(1);

  // gen-refs
  std::string mesh_path, out_path, object_id = "object";
  int count = 4, frequencies = 5, raster = 64;
  uint64_t seed = 0;
  SamplingFlags gen_flags;
  auto* gen = app.add_subcommand("gen-refs", "Build and persist a reference bank");
  gen->add_option("--mesh", mesh_path, "Object mesh (PLY or OBJ)")->required();
  gen->add_option("--count", count, "Number of references M")->required();
  gen->add_option("--frequencies", frequencies, "Positional encoding frequencies N")
      ->required();
  gen->add_option("--raster", raster, "Feature raster size in pixels")->required();
  gen->add_option("--out", out_path, "Output bank directory")->required();
  gen->add_option("--seed", seed, "Pose pool seed")->required();
  gen->add_option("--object-id", object_id, "Object identifier");
  gen_flags.attach(gen);

  // refine
  std::string bank_dir, scene_path, predictor_spec = "oracle", refine_out;
  int iterations = 4;
  uint64_t refine_seed = 0;
  auto* refine = app.add_subcommand("refine", "Refine one scene against a bank");
  refine->add_option("--bank", bank_dir, "Reference bank directory")->required();
  refine->add_option("--scene", scene_path, "Scene json")->required();
  refine->add_option("--predictor", predictor_spec,
                     "oracle | noisy:<deg>,<frac> | search:<budget>")
      ->required();
  refine->add_option("--iters", iterations, "Single-reference iterations")->required();
  refine->add_option("--out", refine_out, "Output json")->required();
  refine->add_option("--seed", refine_seed, "Predictor seed");

  // run
  std::string config_path, run_out;
  uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "Run a full synthetic experiment");
  run->add_option("--config", config_path, "Experiment config json")->required();
  run->add_option("--out", run_out, "Report directory")->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "Override the config seed");

  // carve
  std::string views_dir, carve_out;
  int resolution = 32;
  auto* carve = app.add_subcommand("carve", "Space-carve silhouette views");
  carve->add_option("--views", views_dir, "Views directory (views.json + masks)")
      ->required();
  carve->add_option("--resolution", resolution, "Voxels per grid edge")->required();
  carve->add_option("--out", carve_out, "Output PLY point cloud")->required();

  // synth
  std::string synth_mesh, synth_out, synth_object = "object";
  int synth_trials = 16, synth_raster = 64;
  uint64_t synth_seed = 0;
  bool synth_symmetric = false;
  SamplingFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Sample scenes and silhouette views");
  synth->add_option("--mesh", synth_mesh, "Object mesh (PLY or OBJ)")->required();
  synth->add_option("--trials", synth_trials, "Number of scenes")->required();
  synth->add_option("--seed", synth_seed, "Sampling seed")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--raster", synth_raster, "Intrinsics raster size");
  synth->add_option("--object-id", synth_object, "Object identifier");
  synth->add_flag("--symmetric", synth_symmetric, "Flag the object symmetric");
  synth_flags.attach(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_refs(mesh_path, count, frequencies, raster, out_path, seed,
                          gen_flags, object_id);
    }
    if (refine->parsed()) {
      return cmd_refine(bank_dir, scene_path, predictor_spec, iterations,
                        refine_out, refine_seed);
    }
    if (run->parsed()) {
      return cmd_run(config_path, run_out,
                     seed_opt->count() ? std::optional<uint64_t>(run_seed)
                                       : std::nullopt);
    }
    if (carve->parsed()) {
      return cmd_carve(views_dir, resolution, carve_out);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_mesh, synth_trials, synth_seed, synth_out,
                       synth_raster, synth_flags, synth_object, synth_symmetric);
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
