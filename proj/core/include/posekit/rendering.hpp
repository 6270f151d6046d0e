#pragma once

#include <limits>
#include <vector>

#include "posekit/feature_map.hpp"
#include "posekit/geometry.hpp"

namespace posekit {

/// Per-pixel rasters from one ray-cast pass. Depth is +inf where no surface
/// was hit; modal starts equal to amodal and shrinks under occlusion
/// compositing (modal <= amodal everywhere).
struct RenderResult {
  FeatureMap coords;        // COORD3, normalized object coordinates
  std::vector<float> depth; // h*w row-major, meters
  FeatureMap amodal;        // MASK1
  FeatureMap modal;         // MASK1
  std::vector<int> hit_triangle;  // h*w, -1 where empty; vertex index on splat paths
  int height = 0;
  int width = 0;
};

/// Exact per-pixel ray casting: the ray through each pixel center is
/// intersected with every triangle (Moller-Trumbore), nearest hit wins, ties
/// broken by smallest triangle index. Coordinates at a hit are the
/// barycentric interpolation of the normalized vertices.
///
/// A model with no triangles is treated as a point set and splatted with a
/// 1-px footprint under a z-buffer.
///
/// Throws BehindCamera when the whole model sits at z <= 0.
RenderResult render(const NormalizedModel& model, const Pose& pose,
                    const Intrinsics& k, int height, int width);

/// Positional encoding of the coordinate channels, zeros outside the amodal
/// mask; 6N channels.
FeatureMap encode_geometric(const RenderResult& r, int frequencies);

/// Flat Lambertian gray shading of a render: fixed directional light
/// (0,0,-1), albedo 0.8, face normals oriented toward the camera.
FeatureMap render_rgb(const RenderResult& r, const NormalizedModel& model,
                      const Pose& pose);

/// [GEO | RGB | modal | amodal], 6N+5 channels.
FeatureMap assemble_reference(const FeatureMap& geo, const FeatureMap& image,
                              const FeatureMap& modal, const FeatureMap& amodal);

/// [GEO | ERR | RGB | modal | amodal], 12N+5 channels.
FeatureMap assemble_query(const FeatureMap& geo, const FeatureMap& err,
                          const FeatureMap& image, const FeatureMap& modal,
                          const FeatureMap& amodal);

/// [GEO | modal | amodal], 6N+2 channels.
FeatureMap assemble_medoid(const FeatureMap& geo, const FeatureMap& modal,
                           const FeatureMap& amodal);

struct OcclusionResult {
  FeatureMap rgb;    // target image with the occluder composited in front
  FeatureMap modal;  // target modal mask minus occluded pixels
};

/// Where the occluder is present and strictly nearer, its color replaces the
/// target color and the target modal mask is cleared; amodal is untouched.
OcclusionResult composite_occlusion(const RenderResult& target,
                                    const FeatureMap& target_rgb,
                                    const RenderResult& occluder,
                                    const FeatureMap& occluder_rgb);

}  // namespace posekit
