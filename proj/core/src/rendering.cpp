#include "posekit/rendering.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace posekit {

namespace {

constexpr double kMinDepth = 1e-6;
constexpr float kInf = std::numeric_limits<float>::infinity();

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

// Conservative raster rectangle covering the projected vertices. Any vertex
// near or behind the camera widens the rectangle to the full raster.
PixelRect project_bounds(const std::vector<Vec3>& cam, const Intrinsics& k,
                         int height, int width) {
  double umin = std::numeric_limits<double>::max(), umax = -umin;
  double vmin = umin, vmax = -umin;
  for (const Vec3& p : cam) {
    if (p.z() <= kMinDepth) return {0, 0, width, height};
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  PixelRect rect;
  rect.x0 = std::clamp(static_cast<int>(std::floor(umin)), 0, width);
  rect.x1 = std::clamp(static_cast<int>(std::ceil(umax)) + 1, 0, width);
  rect.y0 = std::clamp(static_cast<int>(std::floor(vmin)), 0, height);
  rect.y1 = std::clamp(static_cast<int>(std::ceil(vmax)) + 1, 0, height);
  return rect;
}

struct Hit {
  double t = std::numeric_limits<double>::max();
  double b1 = 0.0, b2 = 0.0;  // barycentric weights of vertices 1 and 2
  int triangle = -1;
};

// Moller-Trumbore with an unnormalized direction whose z component is 1, so
// the ray parameter equals camera depth. Boundaries are inclusive; ties on
// depth keep the earlier (smaller-index) triangle via strict comparison.
inline bool intersect(const Vec3& dir, const Vec3& v0, const Vec3& e1,
                      const Vec3& e2, double* t, double* b1, double* b2) {
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 tvec = -v0;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double dist = e2.dot(qvec) * inv;
  if (dist <= kMinDepth) return false;
  *t = dist;
  *b1 = u;
  *b2 = v;
  return true;
}

}  // namespace

RenderResult render(const NormalizedModel& model, const Pose& pose,
                    const Intrinsics& k, int height, int width) {
  if (height < 8 || width < 8) {
    throw ShapeMismatch("render: raster must be at least 8x8");
  }
  if (model.vertices.empty()) {
    throw DegenerateMesh("render: model has no vertices");
  }

  std::vector<Vec3> cam(model.vertices.size());
  double max_z = -std::numeric_limits<double>::max();
  for (size_t i = 0; i < model.vertices.size(); ++i) {
    cam[i] = pose.rotation * model.denormalize(model.vertices[i]) +
             pose.translation;
    max_z = std::max(max_z, cam[i].z());
  }
  if (max_z <= kMinDepth) {
    throw BehindCamera("render: model entirely behind the camera");
  }

  RenderResult out;
  out.height = height;
  out.width = width;
  out.coords = FeatureMap::zeros(height, width, 3, LayoutTag::kCoord3);
  out.amodal = FeatureMap::zeros(height, width, 1, LayoutTag::kMask1);
  out.depth.assign(static_cast<size_t>(height) * width, kInf);
  out.hit_triangle.assign(static_cast<size_t>(height) * width, -1);

  if (model.triangles.empty()) {
    // Point-splat path for space-carved surface points: 1-px footprint,
    // z-buffered, ties kept by the earlier point.
    for (size_t i = 0; i < cam.size(); ++i) {
      const Vec3& p = cam[i];
      if (p.z() <= kMinDepth) continue;
      const int px = static_cast<int>(std::floor(k.fx * p.x() / p.z() + k.cx));
      const int py = static_cast<int>(std::floor(k.fy * p.y() / p.z() + k.cy));
      if (px < 0 || px >= width || py < 0 || py >= height) continue;
      const size_t idx = static_cast<size_t>(py) * width + px;
      if (static_cast<float>(p.z()) < out.depth[idx]) {
        out.depth[idx] = static_cast<float>(p.z());
        out.hit_triangle[idx] = static_cast<int>(i);
        const Vec3& n = model.vertices[i];
        out.coords.at(0, py, px) = static_cast<float>(n.x());
        out.coords.at(1, py, px) = static_cast<float>(n.y());
        out.coords.at(2, py, px) = static_cast<float>(n.z());
        out.amodal.at(0, py, px) = 1.0f;
      }
    }
    out.modal = out.amodal;
    out.modal.layout = LayoutTag::kMask1;
    return out;
  }

  const PixelRect rect = project_bounds(cam, k, height, width);
  const size_t tri_count = model.triangles.size();
  std::vector<Vec3> tv0(tri_count), te1(tri_count), te2(tri_count);
  for (size_t t = 0; t < tri_count; ++t) {
    const auto& tri = model.triangles[t];
    tv0[t] = cam[tri[0]];
    te1[t] = cam[tri[1]] - cam[tri[0]];
    te2[t] = cam[tri[2]] - cam[tri[0]];
  }

  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      const Vec3 dir((x + 0.5 - k.cx) / k.fx, (y + 0.5 - k.cy) / k.fy, 1.0);
      Hit hit;
      for (size_t t = 0; t < tri_count; ++t) {
        double dist, b1, b2;
        if (intersect(dir, tv0[t], te1[t], te2[t], &dist, &b1, &b2) &&
            dist < hit.t) {
          hit.t = dist;
          hit.b1 = b1;
          hit.b2 = b2;
          hit.triangle = static_cast<int>(t);
        }
      }
      if (hit.triangle < 0) continue;
      const auto& tri = model.triangles[hit.triangle];
      const Vec3 p = (1.0 - hit.b1 - hit.b2) * model.vertices[tri[0]] +
                     hit.b1 * model.vertices[tri[1]] +
                     hit.b2 * model.vertices[tri[2]];
      const size_t idx = static_cast<size_t>(y) * width + x;
      out.depth[idx] = static_cast<float>(hit.t);
      out.hit_triangle[idx] = hit.triangle;
      out.coords.at(0, y, x) = static_cast<float>(p.x());
      out.coords.at(1, y, x) = static_cast<float>(p.y());
      out.coords.at(2, y, x) = static_cast<float>(p.z());
      out.amodal.at(0, y, x) = 1.0f;
    }
  }

  out.modal = out.amodal;
  return out;
}

FeatureMap encode_geometric(const RenderResult& r, int frequencies) {
  if (frequencies < 1) {
    throw InvalidFrequency("encode_geometric: frequency count must be >= 1");
  }
  const int h = r.height;
  const int w = r.width;
  FeatureMap geo = FeatureMap::zeros(h, w, 6 * frequencies, LayoutTag::kGeo);
  std::vector<double> enc(2 * static_cast<size_t>(frequencies));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (r.amodal.at(0, y, x) == 0.0f) continue;
      for (int axis = 0; axis < 3; ++axis) {
        positional_encode(r.coords.at(axis, y, x), frequencies, enc.data());
        const int base = 2 * frequencies * axis;
        for (int c = 0; c < 2 * frequencies; ++c) {
          geo.at(base + c, y, x) = static_cast<float>(enc[c]);
        }
      }
    }
  }
  return geo;
}

FeatureMap render_rgb(const RenderResult& r, const NormalizedModel& model,
                      const Pose& pose) {
  constexpr double kAlbedo = 0.8;
  FeatureMap rgb = FeatureMap::zeros(r.height, r.width, 3, LayoutTag::kRgb3);
  const bool has_triangles = !model.triangles.empty();
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const int tri = r.hit_triangle[static_cast<size_t>(y) * r.width + x];
      if (tri < 0) continue;
      double intensity = kAlbedo;  // flat value on splat paths
      if (has_triangles) {
        const auto& t = model.triangles[tri];
        const Vec3 a = pose.rotation * model.vertices[t[0]];
        const Vec3 b = pose.rotation * model.vertices[t[1]];
        const Vec3 c = pose.rotation * model.vertices[t[2]];
        Vec3 n = (b - a).cross(c - a);
        const double norm = n.norm();
        if (norm < 1e-18) continue;
        n /= norm;
        if (n.z() > 0.0) n = -n;  // orient toward the camera
        intensity = kAlbedo * std::max(0.0, -n.z());
      }
      for (int c = 0; c < 3; ++c) {
        rgb.at(c, y, x) = static_cast<float>(intensity);
      }
    }
  }
  return rgb;
}

namespace {

void require_same_raster(const FeatureMap& a, const FeatureMap& b,
                         const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeMismatch(std::string("assemble: raster size mismatch in ") + what);
  }
}

void require_channels(const FeatureMap& m, int channels, const char* what) {
  if (m.channels != channels) {
    throw ShapeMismatch(std::string("assemble: unexpected channel count for ") + what);
  }
}

void append_channels(FeatureMap* dst, int* next, const FeatureMap& src) {
  std::memcpy(dst->data.data() + static_cast<size_t>(*next) * dst->plane(),
              src.data.data(), src.data.size() * sizeof(float));
  *next += src.channels;
}

}  // namespace

FeatureMap assemble_reference(const FeatureMap& geo, const FeatureMap& image,
                              const FeatureMap& modal, const FeatureMap& amodal) {
  require_same_raster(geo, image, "image");
  require_same_raster(geo, modal, "modal");
  require_same_raster(geo, amodal, "amodal");
  if (geo.channels % 6 != 0 || geo.channels < 6) {
    throw ShapeMismatch("assemble_reference: geometric channels must be 6N");
  }
  require_channels(image, 3, "image");
  require_channels(modal, 1, "modal");
  require_channels(amodal, 1, "amodal");
  FeatureMap out = FeatureMap::zeros(geo.height, geo.width, geo.channels + 5,
                                     LayoutTag::kRef);
  int next = 0;
  append_channels(&out, &next, geo);
  append_channels(&out, &next, image);
  append_channels(&out, &next, modal);
  append_channels(&out, &next, amodal);
  return out;
}

FeatureMap assemble_query(const FeatureMap& geo, const FeatureMap& err,
                          const FeatureMap& image, const FeatureMap& modal,
                          const FeatureMap& amodal) {
  require_same_raster(geo, err, "err");
  require_same_raster(geo, image, "image");
  require_same_raster(geo, modal, "modal");
  require_same_raster(geo, amodal, "amodal");
  if (geo.channels % 6 != 0 || geo.channels < 6) {
    throw ShapeMismatch("assemble_query: geometric channels must be 6N");
  }
  require_channels(err, geo.channels, "err");
  require_channels(image, 3, "image");
  require_channels(modal, 1, "modal");
  require_channels(amodal, 1, "amodal");
  FeatureMap out = FeatureMap::zeros(geo.height, geo.width,
                                     2 * geo.channels + 5, LayoutTag::kQuery);
  int next = 0;
  append_channels(&out, &next, geo);
  append_channels(&out, &next, err);
  append_channels(&out, &next, image);
  append_channels(&out, &next, modal);
  append_channels(&out, &next, amodal);
  return out;
}

FeatureMap assemble_medoid(const FeatureMap& geo, const FeatureMap& modal,
                           const FeatureMap& amodal) {
  require_same_raster(geo, modal, "modal");
  require_same_raster(geo, amodal, "amodal");
  if (geo.channels % 6 != 0 || geo.channels < 6) {
    throw ShapeMismatch("assemble_medoid: geometric channels must be 6N");
  }
  require_channels(modal, 1, "modal");
  require_channels(amodal, 1, "amodal");
  FeatureMap out = FeatureMap::zeros(geo.height, geo.width, geo.channels + 2,
                                     LayoutTag::kMedoid);
  int next = 0;
  append_channels(&out, &next, geo);
  append_channels(&out, &next, modal);
  append_channels(&out, &next, amodal);
  return out;
}

OcclusionResult composite_occlusion(const RenderResult& target,
                                    const FeatureMap& target_rgb,
                                    const RenderResult& occluder,
                                    const FeatureMap& occluder_rgb) {
  if (target.height != occluder.height || target.width != occluder.width) {
    throw ShapeMismatch("composite_occlusion: raster size mismatch");
  }
  require_same_raster(target_rgb, occluder_rgb, "occluder rgb");
  if (target_rgb.height != target.height || target_rgb.width != target.width) {
    throw ShapeMismatch("composite_occlusion: rgb raster size mismatch");
  }
  OcclusionResult out;
  out.rgb = target_rgb;
  out.modal = target.modal;
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      const size_t idx = static_cast<size_t>(y) * target.width + x;
      if (occluder.amodal.at(0, y, x) == 0.0f) continue;
      if (!(occluder.depth[idx] < target.depth[idx])) continue;
      for (int c = 0; c < 3; ++c) {
        out.rgb.at(c, y, x) = occluder_rgb.at(c, y, x);
      }
      out.modal.at(0, y, x) = 0.0f;
    }
  }
  return out;
}

}  // namespace posekit
