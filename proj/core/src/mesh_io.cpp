#include "posekit/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace posekit {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void malformed(const std::string& what, size_t line) {
  throw MalformedMesh("mesh: " + what + " (line " + std::to_string(line) + ")");
}

void check_finite(const Vec3& v, size_t line) {
  if (!v.allFinite()) malformed("non-finite vertex coordinate", line);
}

void check_triangle(const std::array<int, 3>& tri, size_t vertex_count,
                    size_t element) {
  for (int idx : tri) {
    if (idx < 0 || static_cast<size_t>(idx) >= vertex_count) {
      throw MalformedMesh("mesh: face index out of range (element " +
                          std::to_string(element) + ")");
    }
  }
}

// ---- PLY -------------------------------------------------------------------

struct PlyProperty {
  std::string name;
  int size = 0;        // bytes per scalar
  bool is_float = false;
  bool is_list = false;
  int count_size = 0;  // list length prefix size
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

int scalar_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
  if (type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

bool scalar_is_float(const std::string& type) {
  return type == "float" || type == "float32" || type == "double" ||
         type == "float64";
}

double read_binary_scalar(std::istream& in, int size, bool is_float,
                          size_t line) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), size);
  if (in.gcount() != size) malformed("truncated binary payload", line);
  if (is_float) {
    if (size == 4) {
      float f;
      std::memcpy(&f, buf, 4);
      return f;
    }
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  // Integer types are stored little-endian; sign-extend via the width.
  int64_t value = 0;
  for (int i = size - 1; i >= 0; --i) value = (value << 8) | buf[i];
  if (size == 1 && value > 127) value -= 256;
  if (size == 2 && value > 32767) value -= 65536;
  if (size == 4 && value > 2147483647LL) value -= 4294967296LL;
  return static_cast<double>(value);
}

Mesh load_ply(std::ifstream& in) {
  std::string line;
  size_t line_no = 1;  // "ply" already consumed by the caller
  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        throw UnsupportedFormat("mesh: unsupported PLY format: " + kind);
      }
      format_seen = true;
    } else if (keyword == "element") {
      PlyElement element;
      ls >> element.name >> element.count;
      if (!ls) malformed("bad element declaration", line_no);
      elements.push_back(element);
    } else if (keyword == "property") {
      if (elements.empty()) malformed("property before element", line_no);
      PlyProperty prop;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, index_type;
        ls >> count_type >> index_type >> prop.name;
        prop.is_list = true;
        prop.count_size = scalar_size(count_type);
        prop.size = scalar_size(index_type);
        if (prop.count_size == 0 || prop.size == 0 || scalar_is_float(index_type)) {
          malformed("unsupported list property types", line_no);
        }
      } else {
        ls >> prop.name;
        prop.size = scalar_size(type);
        prop.is_float = scalar_is_float(type);
        if (prop.size == 0) malformed("unsupported property type: " + type, line_no);
      }
      if (!ls) malformed("bad property declaration", line_no);
      elements.back().properties.push_back(prop);
    } else if (keyword == "end_header") {
      break;
    } else {
      malformed("unrecognized header keyword: " + keyword, line_no);
    }
  }
  if (!format_seen) throw MalformedMesh("mesh: PLY header missing format line");

  Mesh mesh;
  for (const PlyElement& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    int ix = -1, iy = -1, iz = -1;
    if (is_vertex) {
      for (size_t p = 0; p < element.properties.size(); ++p) {
        if (element.properties[p].name == "x") ix = static_cast<int>(p);
        if (element.properties[p].name == "y") iy = static_cast<int>(p);
        if (element.properties[p].name == "z") iz = static_cast<int>(p);
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        throw MalformedMesh("mesh: PLY vertex element lacks x/y/z properties");
      }
    }

    for (size_t row = 0; row < element.count; ++row) {
      std::vector<double> scalars;
      std::vector<long long> list_values;
      if (binary) {
        for (const PlyProperty& prop : element.properties) {
          if (prop.is_list) {
            const double n = read_binary_scalar(in, prop.count_size, false, line_no);
            for (int i = 0; i < static_cast<int>(n); ++i) {
              list_values.push_back(static_cast<long long>(
                  read_binary_scalar(in, prop.size, false, line_no)));
            }
          } else {
            scalars.push_back(
                read_binary_scalar(in, prop.size, prop.is_float, line_no));
          }
        }
      } else {
        if (!std::getline(in, line)) malformed("truncated element data", line_no);
        ++line_no;
        std::istringstream ls(line);
        for (const PlyProperty& prop : element.properties) {
          if (prop.is_list) {
            long long n = 0;
            if (!(ls >> n)) malformed("bad list count", line_no);
            for (long long i = 0; i < n; ++i) {
              long long v = 0;
              if (!(ls >> v)) malformed("bad list entry", line_no);
              list_values.push_back(v);
            }
          } else {
            double v = 0;
            if (!(ls >> v)) malformed("bad scalar entry", line_no);
            scalars.push_back(v);
          }
        }
      }

      if (is_vertex) {
        const Vec3 v(scalars[ix], scalars[iy], scalars[iz]);
        check_finite(v, line_no);
        mesh.vertices.push_back(v);
      } else if (is_face) {
        if (list_values.size() < 3) {
          throw MalformedMesh("mesh: PLY face with fewer than 3 indices (element " +
                              std::to_string(row) + ")");
        }
        for (size_t i = 1; i + 1 < list_values.size(); ++i) {
          std::array<int, 3> tri = {static_cast<int>(list_values[0]),
                                    static_cast<int>(list_values[i]),
                                    static_cast<int>(list_values[i + 1])};
          mesh.triangles.push_back(tri);
        }
      }
    }
  }

  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    check_triangle(mesh.triangles[t], mesh.vertices.size(), t);
  }
  return mesh;
}

// ---- OBJ -------------------------------------------------------------------

int resolve_obj_index(long long raw, size_t vertex_count, size_t line_no) {
  long long idx = raw;
  if (idx < 0) idx = static_cast<long long>(vertex_count) + idx;  // -1 = last
  else idx -= 1;                                                  // 1-based
  if (idx < 0 || idx >= static_cast<long long>(vertex_count)) {
    malformed("face index out of range", line_no);
  }
  return static_cast<int>(idx);
}

Mesh load_obj(std::ifstream& in) {
  Mesh mesh;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) malformed("bad vertex line", line_no);
      check_finite(v, line_no);
      mesh.vertices.push_back(v);
    } else if (keyword == "f") {
      std::vector<int> polygon;
      std::string token;
      while (ls >> token) {
        // Accept i, i/t, i/t/n, i//n; only the vertex index matters.
        const size_t slash = token.find('/');
        const std::string head = token.substr(0, slash);
        long long raw = 0;
        const auto result =
            std::from_chars(head.data(), head.data() + head.size(), raw);
        if (result.ec != std::errc() || result.ptr != head.data() + head.size()) {
          malformed("bad face token: " + token, line_no);
        }
        polygon.push_back(resolve_obj_index(raw, mesh.vertices.size(), line_no));
      }
      if (polygon.size() < 3) malformed("face with fewer than 3 vertices", line_no);
      for (size_t i = 1; i + 1 < polygon.size(); ++i) {
        mesh.triangles.push_back({polygon[0], polygon[i], polygon[i + 1]});
      }
    }
    // All other OBJ keywords (vn, vt, usemtl, o, g, s, #, ...) are ignored.
  }
  return mesh;
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("mesh: cannot open " + path.string());
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") {
    std::string magic;
    std::getline(in, magic);
    if (!magic.empty() && magic.back() == '\r') magic.pop_back();
    if (magic != "ply") throw MalformedMesh("mesh: missing 'ply' magic line");
    return load_ply(in);
  }
  if (ext == ".obj") {
    return load_obj(in);
  }
  throw UnsupportedFormat("mesh: unsupported file extension: " + ext);
}

void save_mesh_ply(const std::filesystem::path& path,
                   std::span<const Vec3> vertices,
                   const TriangleList& triangles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("mesh: cannot open for writing: " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << vertices.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << triangles.size() << '\n'
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : vertices) {
    const double xyz[3] = {v.x(), v.y(), v.z()};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  for (const auto& tri : triangles) {
    const unsigned char count = 3;
    const int32_t idx[3] = {tri[0], tri[1], tri[2]};
    out.write(reinterpret_cast<const char*>(&count), 1);
    out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
  if (!out) throw IoFailure("mesh: write failed: " + path.string());
}

void save_ply_points(const std::filesystem::path& path,
                     std::span<const Vec3> points) {
  std::ofstream out(path);
  if (!out) throw IoFailure("mesh: cannot open for writing: " + path.string());
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << points.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face 0\nproperty list uchar int vertex_indices\nend_header\n";
  char buf[96];
  for (const Vec3& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  if (!out) throw IoFailure("mesh: write failed: " + path.string());
}

}  // namespace posekit
