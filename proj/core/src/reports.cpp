#include "posekit/reports.hpp"

#include <algorithm>
#include <fstream>

#include "json_util.hpp"

namespace posekit {

using detail::ordered_json;

namespace {

ordered_json scene_to_json(const Scene& scene) {
  ordered_json j;
  j["object"] = scene.object_id;
  j["pose"] = detail::pose_to_json(scene.gt_pose);
  j["K"] = detail::intrinsics_to_json(scene.intrinsics);
  j["symmetric"] = scene.symmetric;
  j["seed"] = scene.seed;
  if (scene.occluder) {
    j["occluder"] = ordered_json{{"mesh", scene.occluder->mesh},
                                 {"pose", detail::pose_to_json(scene.occluder->pose)}};
  }
  return j;
}

Scene scene_from_json(const ordered_json& j) {
  Scene scene;
  scene.object_id = j.at("object").get<std::string>();
  scene.gt_pose = detail::pose_from_json(j.at("pose"));
  scene.intrinsics = detail::intrinsics_from_json(j.at("K"));
  scene.symmetric = j.at("symmetric").get<bool>();
  scene.seed = j.at("seed").get<uint64_t>();
  if (j.contains("occluder")) {
    OccluderPlacement occ;
    occ.mesh = j["occluder"].at("mesh").get<std::string>();
    occ.pose = detail::pose_from_json(j["occluder"].at("pose"));
    scene.occluder = occ;
  }
  return scene;
}

ordered_json config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["mesh"] = config.mesh;
  j["object_id"] = config.object_id;
  j["frequencies"] = config.frequencies;
  j["references"] = config.references;
  j["iterations"] = config.iterations;
  j["raster"] = config.raster;
  j["predictor"] = config.predictor.to_string();
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["pose_pool"] = config.pose_pool;
  j["depth_range"] = {config.depth_range[0], config.depth_range[1]};
  j["focal_range"] = {config.focal_range[0], config.focal_range[1]};
  j["symmetric"] = config.symmetric;
  j["emit_timings"] = config.emit_timings;
  if (config.occlusion) {
    j["occlusion"] = ordered_json{{"mesh", config.occlusion->mesh},
                                  {"min_overlap", config.occlusion->min_overlap},
                                  {"max_overlap", config.occlusion->max_overlap},
                                  {"max_attempts", config.occlusion->max_attempts}};
  }
  return j;
}

ordered_json record_to_json(const ResultRecord& record, bool include_timings) {
  ordered_json j;
  j["trial"] = record.trial;
  j["scene_seed"] = record.scene_seed;
  j["scene"] = scene_to_json(record.scene);
  if (record.failure) {
    j["failure"] = *record.failure;
    return j;
  }
  j["candidate0"] = detail::pose_to_json(record.candidate0);
  j["medoid"] = detail::pose_to_json(record.medoid);
  auto& iterations = j["iterations"] = ordered_json::array();
  for (const Pose& pose : record.iteration_poses) {
    iterations.push_back(detail::pose_to_json(pose));
  }
  j["final"] = detail::pose_to_json(record.final_pose);
  j["metrics"] = ordered_json{
      {"add", record.report.add},
      {"add_s", record.report.add_s},
      {"diameter", record.report.diameter},
      {"passes_002d", record.report.passes_002d},
      {"passes_005d", record.report.passes_005d},
      {"passes_01d", record.report.passes_01d},
  };
  j["candidate0_rot_error"] = record.candidate0_rot_error;
  j["medoid_rot_error"] = record.medoid_rot_error;
  if (include_timings) {
    j["timings_ms"] = ordered_json{{"query", record.timings.query_ms},
                                   {"multi", record.timings.multi_ms},
                                   {"iterative", record.timings.iterative_ms}};
  }
  return j;
}

ResultRecord record_from_json(const ordered_json& j) {
  ResultRecord record;
  record.trial = j.at("trial").get<int>();
  record.scene_seed = j.at("scene_seed").get<uint64_t>();
  record.scene = scene_from_json(j.at("scene"));
  if (j.contains("failure")) {
    record.failure = j["failure"].get<std::string>();
    return record;
  }
  record.candidate0 = detail::pose_from_json(j.at("candidate0"));
  record.medoid = detail::pose_from_json(j.at("medoid"));
  for (const auto& pose : j.at("iterations")) {
    record.iteration_poses.push_back(detail::pose_from_json(pose));
  }
  record.final_pose = detail::pose_from_json(j.at("final"));
  const auto& metrics = j.at("metrics");
  record.report.add = metrics.at("add").get<double>();
  record.report.add_s = metrics.at("add_s").get<double>();
  record.report.diameter = metrics.at("diameter").get<double>();
  record.report.passes_002d = metrics.at("passes_002d").get<bool>();
  record.report.passes_005d = metrics.at("passes_005d").get<bool>();
  record.report.passes_01d = metrics.at("passes_01d").get<bool>();
  record.candidate0_rot_error = j.at("candidate0_rot_error").get<double>();
  record.medoid_rot_error = j.at("medoid_rot_error").get<double>();
  if (j.contains("timings_ms")) {
    record.timings.query_ms = j["timings_ms"].at("query").get<double>();
    record.timings.multi_ms = j["timings_ms"].at("multi").get<double>();
    record.timings.iterative_ms = j["timings_ms"].at("iterative").get<double>();
  }
  return record;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("reports: cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("reports: write failed: " + path.string());
}

std::string format_value(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

void emit_reports(const ExperimentResult& result,
                  const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoFailure("reports: cannot create " + directory.string());

  ordered_json results;
  results["config"] = config_to_json(result.config);
  auto& records = results["records"] = ordered_json::array();
  for (const ResultRecord& record : result.records) {
    records.push_back(record_to_json(record, result.config.emit_timings));
  }
  write_text(directory / "results.json", results.dump(2) + "\n");

  const ExperimentSummary& summary = result.summary;
  std::string csv = "metric,value\n";
  auto row = [&](const std::string& name, double value) {
    csv += name + ',' + format_value(value) + '\n';
  };
  if (summary.trials > 0 && summary.failures < summary.trials) {
    row("accuracy_0.02d", summary.accuracy_002d);
    row("accuracy_0.05d", summary.accuracy_005d);
    row("accuracy_0.1d", summary.accuracy_01d);
    row("auc_add", summary.auc);
    row("mean_add_m", summary.mean_add);
    row("mean_add_s_m", summary.mean_add_s);
    row("candidate0_mean_rot_error_rad", summary.candidate0_mean_rot_error);
    row("medoid_mean_rot_error_rad", summary.medoid_mean_rot_error);
    row("medoid_win_rate", summary.medoid_win_rate);
    row("trials", summary.trials);
    row("failures", summary.failures);
    row("mean_ms_bank", summary.bank_ms);
    row("mean_ms_query", summary.mean_timings.query_ms);
    row("mean_ms_multi_reference", summary.mean_timings.multi_ms);
    row("mean_ms_iterative", summary.mean_timings.iterative_ms);
  }
  write_text(directory / "summary.csv", csv);

  std::string curves = "threshold_m,accuracy\n";
  std::vector<double> errors;
  for (const ResultRecord& record : result.records) {
    if (record.failure) continue;
    errors.push_back(record.scene.symmetric ? record.report.add_s
                                            : record.report.add);
  }
  if (!errors.empty()) {
    constexpr int kSamples = 201;
    constexpr double kMax = 0.10;
    for (int i = 0; i < kSamples; ++i) {
      const double threshold = kMax * i / (kSamples - 1);
      size_t passed = 0;
      for (double e : errors) {
        if (e < threshold) ++passed;
      }
      curves += format_value(threshold) + ',' +
                format_value(static_cast<double>(passed) / errors.size()) + '\n';
    }
  }
  write_text(directory / "curves.csv", curves);
}

std::vector<ResultRecord> load_result_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("reports: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
    std::vector<ResultRecord> records;
    for (const auto& record : j.at("records")) {
      records.push_back(record_from_json(record));
    }
    return records;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("reports: malformed results json: " +
                          std::string(e.what()));
  }
}

}  // namespace posekit
