#pragma once

#include <limits>
#include <vector>

#include "posekit/geometry.hpp"

namespace posekit::testing {

// Analytic inverse of the pinhole projection: pixel + depth back to the
// camera frame.
inline Vec3 unproject(const Intrinsics& k, double u, double v, double depth) {
  return Vec3((u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth);
}

// Brute-force ADD-S oracle: mean nearest-neighbor distance over posed
// vertex sets, written against plain arrays.
inline double add_s_oracle(const Pose& est, const Pose& gt,
                           const std::vector<Vec3>& vertices_m) {
  double total = 0.0;
  for (const Vec3& v : vertices_m) {
    const Vec3 pe = est.rotation * v + est.translation;
    double best = std::numeric_limits<double>::max();
    for (const Vec3& w : vertices_m) {
      const Vec3 pg = gt.rotation * w + gt.translation;
      best = std::min(best, (pe - pg).norm());
    }
    total += best;
  }
  return total / static_cast<double>(vertices_m.size());
}

// Checks the greedy FPS property directly: each selection after the first
// maximizes the min geodesic distance to the already-selected set, with
// ties broken to the lowest index; the first maximizes the total distance.
inline bool fps_is_greedy(const std::vector<Pose>& pool,
                          const std::vector<int>& picks) {
  const int n = static_cast<int>(pool.size());
  auto dist = [&](int a, int b) {
    return geodesic_distance(pool[a].rotation, pool[b].rotation);
  };
  {
    double best_sum = -1.0;
    int best = -1;
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += dist(i, j);
      if (sum > best_sum) {
        best_sum = sum;
        best = i;
      }
    }
    if (picks.empty() || picks[0] != best) return false;
  }
  for (size_t step = 1; step < picks.size(); ++step) {
    double best_min = -1.0;
    int best = -1;
    for (int i = 0; i < n; ++i) {
      bool taken = false;
      for (size_t s = 0; s < step; ++s) {
        if (picks[s] == i) taken = true;
      }
      if (taken) continue;
      double min_d = std::numeric_limits<double>::max();
      for (size_t s = 0; s < step; ++s) min_d = std::min(min_d, dist(i, picks[s]));
      if (min_d > best_min) {
        best_min = min_d;
        best = i;
      }
    }
    if (picks[step] != best) return false;
  }
  return true;
}

}  // namespace posekit::testing
