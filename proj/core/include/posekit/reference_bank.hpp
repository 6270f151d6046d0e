#pragma once

#include <filesystem>
#include <string>

#include "posekit/rendering.hpp"

namespace posekit {

/// One persisted reference view: the feature is regenerable bit-identically
/// from (pose, intrinsics, model).
struct Reference {
  Pose pose;
  Intrinsics intrinsics;
  FeatureMap feature;   // REF layout, 6N+5 channels
  RenderResult render;
};

struct ReferenceBank {
  std::string object_id;
  NormalizedModel model;
  int frequencies = 5;  // N
  int raster = 64;
  std::vector<Reference> references;  // length M
};

/// Greedy farthest-point sampling under rotation geodesic distance. The
/// first pick maximizes the total distance to the rest of the pool; each
/// following pick maximizes the min distance to the already-selected set.
/// Ties break to the lowest index. The seed is reserved for a randomized
/// first-pick mode and unused by default.
std::vector<int> fps_select(std::span<const Pose> pool, int count,
                            uint64_t seed = 0);

/// FPS selection followed by render + encode + reference assembly per pick.
/// References may carry distinct intrinsics.
ReferenceBank build_bank(const std::string& object_id,
                         const NormalizedModel& model,
                         std::span<const Pose> pose_pool,
                         std::span<const Intrinsics> intrinsics_per_pose,
                         int count, int frequencies, int raster);

/// Writes bank.json (poses as 12 floats row-major [R|t], intrinsics as 6
/// floats, raster checksums), ref_<i>.fmap per reference, and model.ply. All
/// floats survive the round trip exactly.
void save_bank(const ReferenceBank& bank, const std::filesystem::path& directory);

/// Throws CorruptBank on checksum or field validation failures, IoFailure on
/// filesystem errors. Render results are regenerated from the persisted
/// poses.
ReferenceBank load_bank(const std::filesystem::path& directory);

/// One calibrated silhouette for space carving.
struct CarveView {
  FeatureMap amodal;  // MASK1
  Pose pose;
  Intrinsics intrinsics;
};

/// Visual-hull carving over a resolution^3 voxel grid spanning [-1,1]^3 in
/// normalized coordinates. A voxel survives iff its center projects inside
/// the mask (bilinear sample > 0.5) in every view; returned points are the
/// centers of surviving voxels with at least one of their 6 neighbors
/// missing (grid boundary counts as missing).
std::vector<Vec3> space_carve(std::span<const CarveView> views, int resolution,
                              double scale, const Vec3& center_offset);

}  // namespace posekit
