#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "posekit/geometry.hpp"
#include "posekit/mesh_io.hpp"

namespace posekit::testing {

// Axis-aligned cube mesh: 8 corners, 12 triangles.
inline Mesh make_cube_mesh(double edge = 1.0, const Vec3& center = Vec3::Zero()) {
  Mesh mesh;
  const double h = edge / 2.0;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back(center + Vec3((i & 1) ? h : -h, (i & 2) ? h : -h,
                                          (i & 4) ? h : -h));
  }
  mesh.triangles = {
      {0, 1, 3}, {0, 3, 2},  // z = -h
      {4, 6, 7}, {4, 7, 5},  // z = +h
      {0, 4, 5}, {0, 5, 1},  // y = -h
      {2, 3, 7}, {2, 7, 6},  // y = +h
      {0, 2, 6}, {0, 6, 4},  // x = -h
      {1, 5, 7}, {1, 7, 3},  // x = +h
  };
  return mesh;
}

// Icosphere: subdivided icosahedron pushed onto a sphere of the given radius.
inline Mesh make_icosphere(double radius = 1.0, int subdivisions = 2) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (Vec3& v : verts) v.normalize();
  TriangleList tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int s = 0; s < subdivisions; ++s) {
    TriangleList next;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    for (const auto& t : tris) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  Mesh mesh;
  for (const Vec3& v : verts) mesh.vertices.push_back(v * radius);
  mesh.triangles = std::move(tris);
  return mesh;
}

inline Mat3 rot_x(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}
inline Mat3 rot_y(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}
inline Mat3 rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

// Shoemake uniform rotation, seeded independently of library code.
inline Mat3 random_rotation(std::mt19937_64& engine) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u1 = uniform(engine);
  const double u2 = uniform(engine);
  const double u3 = uniform(engine);
  const Eigen::Quaterniond q(std::sqrt(1.0 - u1) * std::sin(2.0 * M_PI * u2),
                             std::sqrt(1.0 - u1) * std::cos(2.0 * M_PI * u2),
                             std::sqrt(u1) * std::sin(2.0 * M_PI * u3),
                             std::sqrt(u1) * std::cos(2.0 * M_PI * u3));
  return q.toRotationMatrix();
}

inline Pose random_pose(std::mt19937_64& engine, double min_z = 0.5,
                        double max_z = 2.0) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Pose pose;
  pose.rotation = random_rotation(engine);
  const double z = min_z + uniform(engine) * (max_z - min_z);
  pose.translation = Vec3((uniform(engine) - 0.5) * 0.4 * z,
                          (uniform(engine) - 0.5) * 0.4 * z, z);
  return pose;
}

// Independently sampled intrinsics: focal 300-1200 px, principal point up to
// 64 px off a 256 px center.
inline Intrinsics random_intrinsics(std::mt19937_64& engine, int raster = 256) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Intrinsics k;
  k.width = raster;
  k.height = raster;
  k.fx = 300.0 + uniform(engine) * 900.0;
  k.fy = k.fx;
  k.cx = raster / 2.0 + (uniform(engine) * 2.0 - 1.0) * 64.0;
  k.cy = raster / 2.0 + (uniform(engine) * 2.0 - 1.0) * 64.0;
  return k;
}

}  // namespace posekit::testing
