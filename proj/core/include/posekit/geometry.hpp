#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <span>
#include <vector>

#include "posekit/errors.hpp"

namespace posekit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Six-dimensional rotation parametrization: the first two columns of a
/// rotation matrix, stacked (v[0..2] = column 0, v[3..5] = column 1).
using Rot6d = Eigen::Matrix<double, 6, 1>;

using TriangleList = std::vector<std::array<int, 3>>;

constexpr double kRotationTol = 1e-9;

/// Rigid transform of the object in the camera frame. Translation in meters,
/// z > 0 for an object in front of the camera.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Pinhole camera. Focal lengths and principal point in pixels.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  /// Scalar focal length; requires square pixels (|fx - fy|/fx < 1e-6).
  double focal() const;
};

/// Mesh in normalized object coordinates: vertices fill [-1,1]^3, and
/// v * scale + center_offset reproduces the source mesh in meters.
/// An empty triangle list marks a point set (space-carved surface points),
/// rendered by splatting instead of ray casting.
struct NormalizedModel {
  std::vector<Vec3> vertices;
  TriangleList triangles;
  double diameter = 0.0;  // meters, max pairwise vertex distance
  double scale = 1.0;     // meters per normalized unit
  Vec3 center_offset = Vec3::Zero();

  Vec3 denormalize(const Vec3& p) const { return p * scale + center_offset; }
};

struct ProjectedPoint {
  double u = 0.0;      // pixels
  double v = 0.0;      // pixels
  double depth = 0.0;  // meters
};

bool is_rotation(const Mat3& r, double tol = kRotationTol);

/// Gram-Schmidt recovery of a rotation matrix from its 6-D representation.
/// Throws DegenerateRotation when the two column vectors are (near) parallel.
Mat3 rot6d_to_matrix(const Rot6d& v);

Rot6d matrix_to_rot6d(const Mat3& r);

inline Rot6d rot6d_identity() {
  Rot6d v;
  v << 1, 0, 0, 0, 1, 0;
  return v;
}

/// Minimal-angle rotation mapping the optical axis (0,0,1) onto t/|t|.
/// Throws DegenerateDirection for |t| ~ 0 or t within 1 degree of the
/// negative optical axis.
Mat3 view_rotation(const Vec3& t);

/// R_a = R_view(t)^T * R.
Mat3 egocentric_to_allocentric(const Mat3& r, const Vec3& t);

/// R = R_view(t) * R_a.
Mat3 allocentric_to_egocentric(const Mat3& r_allo, const Vec3& t);

/// arccos((tr(R1^T R2) - 1)/2), clamped; in [0, pi].
double geodesic_distance(const Mat3& r1, const Mat3& r2);

/// Sinusoids at N octave-spaced frequencies:
/// [sin(pi p), cos(pi p), sin(2 pi p), cos(2 pi p), ..., sin(2^{N-1} pi p), ...].
/// Writes 2n values to out. Throws InvalidFrequency for n < 1.
void positional_encode(double p, int frequencies, double* out);

std::vector<double> positional_encode(double p, int frequencies);

/// Per-coordinate encoding of a 3-vector: all X pairs by ascending frequency,
/// then Y, then Z; 6n values.
std::vector<double> positional_encode(const Vec3& p, int frequencies);

/// Pinhole projection of normalized object coordinates:
/// x_cam = R (p scale + offset) + t, u = fx x/z + cx, v = fy y/z + cy.
/// Throws BehindCamera if any transformed depth <= 1e-6 m.
std::vector<ProjectedPoint> project(const Intrinsics& k, const Pose& pose,
                                    std::span<const Vec3> points,
                                    const NormalizedModel& model);

/// Bounding-box normalization: offset = box center, scale = half the longest
/// box edge, so coordinates fill [-1,1]^3. Diameter is the max pairwise
/// vertex distance in meters.
NormalizedModel normalize_model(std::span<const Vec3> vertices_m,
                                TriangleList triangles);

}  // namespace posekit
