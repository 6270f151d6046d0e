#pragma once

#include <filesystem>
#include <span>

#include "posekit/geometry.hpp"

namespace posekit {

struct Mesh {
  std::vector<Vec3> vertices;  // meters
  TriangleList triangles;
};

/// Reads a PLY (ascii or binary little-endian; float32/float64 vertex
/// coordinates; polygon faces fan-triangulated) or a basic OBJ (v/f lines,
/// 1-based indices, negative indices relative to the end, polygon fans).
/// Throws UnsupportedFormat for unknown extensions or PLY variants, and
/// MalformedMesh naming the first offending line/element otherwise.
Mesh load_mesh(const std::filesystem::path& path);

/// Binary little-endian PLY with float64 coordinates; round-trips doubles
/// bit-exactly through load_mesh.
void save_mesh_ply(const std::filesystem::path& path,
                   std::span<const Vec3> vertices,
                   const TriangleList& triangles);

/// ASCII PLY point cloud (no faces), 17 significant digits per coordinate.
void save_ply_points(const std::filesystem::path& path,
                     std::span<const Vec3> points);

}  // namespace posekit
