#pragma once

#include "posekit/experiment.hpp"

namespace posekit {

/// Writes results.json (config echo + per-trial records, stable field order,
/// lossless doubles), summary.csv (one metric per row), and curves.csv
/// (accuracy-vs-threshold samples). Timings enter results.json only when the
/// config opts in, keeping the default output byte-stable across runs.
void emit_reports(const ExperimentResult& result,
                  const std::filesystem::path& directory);

/// Reads the records back from an emitted results.json.
std::vector<ResultRecord> load_result_records(const std::filesystem::path& path);

}  // namespace posekit
