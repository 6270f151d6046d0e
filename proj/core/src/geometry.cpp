#include "posekit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace posekit {

namespace {
constexpr double kParallelTol = 1e-12;
// Reject directions within 1 degree of the negative optical axis.
const double kMaxViewAngle = M_PI * 179.0 / 180.0;
}  // namespace

double Intrinsics::focal() const {
  if (fx <= 0.0 || fy <= 0.0) {
    throw ValidationError("intrinsics: focal lengths must be positive");
  }
  if (std::abs(fx - fy) / fx >= 1e-6) {
    throw NonSquarePixels("intrinsics: fx and fy differ beyond square-pixel tolerance");
  }
  return fx;
}

bool is_rotation(const Mat3& r, double tol) {
  const Mat3 gram = r.transpose() * r - Mat3::Identity();
  if (gram.cwiseAbs().maxCoeff() >= tol) return false;
  return std::abs(r.determinant() - 1.0) < tol;
}

Mat3 rot6d_to_matrix(const Rot6d& v) {
  const Vec3 a1 = v.head<3>();
  const Vec3 a2 = v.tail<3>();
  const double n1 = a1.norm();
  if (n1 < kParallelTol) {
    throw DegenerateRotation("rot6d: first column has near-zero norm");
  }
  const Vec3 b1 = a1 / n1;
  const Vec3 residual = a2 - b1.dot(a2) * b1;
  const double n2 = residual.norm();
  if (n2 < kParallelTol) {
    throw DegenerateRotation("rot6d: columns are parallel");
  }
  const Vec3 b2 = residual / n2;
  Mat3 r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b1.cross(b2);
  return r;
}

Rot6d matrix_to_rot6d(const Mat3& r) {
  Rot6d v;
  v.head<3>() = r.col(0);
  v.tail<3>() = r.col(1);
  return v;
}

Mat3 view_rotation(const Vec3& t) {
  const double norm = t.norm();
  if (norm <= 1e-9) {
    throw DegenerateDirection("view_rotation: zero-length direction");
  }
  const Vec3 d = t / norm;
  const double cos_angle = std::clamp(d.z(), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  if (angle < 1e-9) return Mat3::Identity();
  if (angle > kMaxViewAngle) {
    throw DegenerateDirection("view_rotation: direction anti-parallel to the optical axis");
  }
  const Vec3 axis = Vec3(-d.y(), d.x(), 0.0).normalized();
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Mat3 egocentric_to_allocentric(const Mat3& r, const Vec3& t) {
  return view_rotation(t).transpose() * r;
}

Mat3 allocentric_to_egocentric(const Mat3& r_allo, const Vec3& t) {
  return view_rotation(t) * r_allo;
}

double geodesic_distance(const Mat3& r1, const Mat3& r2) {
  const Mat3 rel = r1.transpose() * r2;
  // arccos((tr-1)/2), evaluated as atan2(sin, cos): the axial part supplies
  // sin(theta), which keeps tiny angles conditioned where arccos is not.
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vec3 axial(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                   rel(1, 0) - rel(0, 1));
  return std::atan2(0.5 * axial.norm(), c);
}

void positional_encode(double p, int frequencies, double* out) {
  if (frequencies < 1) {
    throw InvalidFrequency("positional_encode: frequency count must be >= 1");
  }
  // sin/cos at 2^k pi p via exact angle doubling from the base frequency.
  double s = std::sin(M_PI * p);
  double c = std::cos(M_PI * p);
  for (int k = 0; k < frequencies; ++k) {
    out[2 * k] = s;
    out[2 * k + 1] = c;
    const double s2 = 2.0 * s * c;
    const double c2 = c * c - s * s;
    s = s2;
    c = c2;
  }
}

std::vector<double> positional_encode(double p, int frequencies) {
  if (frequencies < 1) {
    throw InvalidFrequency("positional_encode: frequency count must be >= 1");
  }
  std::vector<double> out(2 * static_cast<size_t>(frequencies));
  positional_encode(p, frequencies, out.data());
  return out;
}

std::vector<double> positional_encode(const Vec3& p, int frequencies) {
  if (frequencies < 1) {
    throw InvalidFrequency("positional_encode: frequency count must be >= 1");
  }
  std::vector<double> out(6 * static_cast<size_t>(frequencies));
  for (int axis = 0; axis < 3; ++axis) {
    positional_encode(p[axis], frequencies, out.data() + 2 * frequencies * axis);
  }
  return out;
}

std::vector<ProjectedPoint> project(const Intrinsics& k, const Pose& pose,
                                    std::span<const Vec3> points,
                                    const NormalizedModel& model) {
  std::vector<ProjectedPoint> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    const Vec3 cam = pose.rotation * model.denormalize(p) + pose.translation;
    if (cam.z() <= 1e-6) {
      throw BehindCamera("project: point at or behind the camera");
    }
    out.push_back({k.fx * cam.x() / cam.z() + k.cx,
                   k.fy * cam.y() / cam.z() + k.cy, cam.z()});
  }
  return out;
}

NormalizedModel normalize_model(std::span<const Vec3> vertices_m,
                                TriangleList triangles) {
  if (vertices_m.size() < 3) {
    throw DegenerateMesh("normalize_model: fewer than 3 vertices");
  }
  Vec3 lo = vertices_m[0];
  Vec3 hi = vertices_m[0];
  for (const Vec3& v : vertices_m) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 extent = hi - lo;
  const double longest = extent.maxCoeff();
  if (longest < 1e-12) {
    throw DegenerateMesh("normalize_model: bounding box has zero extent");
  }
  // Collinearity check: all vertices on one line cannot span a surface.
  {
    const Vec3 base = vertices_m[0];
    Vec3 dir = Vec3::Zero();
    bool collinear = true;
    for (const Vec3& v : vertices_m) {
      const Vec3 d = v - base;
      if (dir.squaredNorm() < 1e-24) {
        dir = d;
        continue;
      }
      if (dir.cross(d).norm() > 1e-12 * longest * longest) {
        collinear = false;
        break;
      }
    }
    if (collinear) {
      throw DegenerateMesh("normalize_model: vertices are collinear");
    }
  }

  NormalizedModel model;
  model.center_offset = 0.5 * (lo + hi);
  model.scale = 0.5 * longest;
  model.triangles = std::move(triangles);
  model.vertices.reserve(vertices_m.size());
  for (const Vec3& v : vertices_m) {
    model.vertices.push_back((v - model.center_offset) / model.scale);
  }

  double best_sq = 0.0;
  for (size_t i = 0; i < vertices_m.size(); ++i) {
    for (size_t j = i + 1; j < vertices_m.size(); ++j) {
      best_sq = std::max(best_sq, (vertices_m[i] - vertices_m[j]).squaredNorm());
    }
  }
  model.diameter = std::sqrt(best_sq);
  return model;
}

}  // namespace posekit
