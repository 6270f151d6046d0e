#pragma once

#include <nlohmann/json.hpp>

#include "posekit/errors.hpp"
#include "posekit/geometry.hpp"

namespace posekit::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json pose_to_json(const Pose& pose) {
  ordered_json j;
  auto& r = j["R"] = ordered_json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(pose.rotation(row, col));
  }
  j["t"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  return j;
}

inline Pose pose_from_json(const ordered_json& j) {
  const auto r = j.at("R").get<std::vector<double>>();
  const auto t = j.at("t").get<std::vector<double>>();
  if (r.size() != 9 || t.size() != 3) {
    throw ValidationError("pose json: R must have 9 floats and t 3 floats");
  }
  Pose pose;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) pose.rotation(row, col) = r[row * 3 + col];
  }
  pose.translation = Vec3(t[0], t[1], t[2]);
  return pose;
}

inline ordered_json intrinsics_to_json(const Intrinsics& k) {
  return ordered_json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
                      {"cy", k.cy}, {"w", k.width}, {"h", k.height}};
}

inline Intrinsics intrinsics_from_json(const ordered_json& j) {
  Intrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("w").get<int>();
  k.height = j.at("h").get<int>();
  return k;
}

}  // namespace posekit::detail
