#include "posekit/reference_bank.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "posekit/mesh_io.hpp"
#include "posekit/rng.hpp"

namespace posekit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> pose_to_floats(const Pose& pose) {
  std::vector<double> out(12);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = pose.rotation(r, c);
    out[r * 4 + 3] = pose.translation[r];
  }
  return out;
}

Pose pose_from_floats(const std::vector<double>& v) {
  if (v.size() != 12) throw CorruptBank("bank: pose must have 12 floats");
  Pose pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[r * 4 + c];
    pose.translation[r] = v[r * 4 + 3];
  }
  return pose;
}

std::vector<double> intrinsics_to_floats(const Intrinsics& k) {
  return {k.fx, k.fy, k.cx, k.cy, static_cast<double>(k.width),
          static_cast<double>(k.height)};
}

Intrinsics intrinsics_from_floats(const std::vector<double>& v) {
  if (v.size() != 6) throw CorruptBank("bank: intrinsics must have 6 floats");
  Intrinsics k;
  k.fx = v[0];
  k.fy = v[1];
  k.cx = v[2];
  k.cy = v[3];
  k.width = static_cast<int>(v[4]);
  k.height = static_cast<int>(v[5]);
  return k;
}

uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("bank: cannot open " + path.string());
  uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    hash = fnv1a64({reinterpret_cast<const unsigned char*>(buf),
                    static_cast<size_t>(in.gcount())},
                   hash);
  }
  return hash;
}

}  // namespace

std::vector<int> fps_select(std::span<const Pose> pool, int count,
                            uint64_t /*seed*/) {
  const int n = static_cast<int>(pool.size());
  if (count < 1 || n < count) {
    throw InsufficientPool("fps_select: pool smaller than requested count");
  }

  std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = geodesic_distance(pool[i].rotation, pool[j].rotation);
      dist[static_cast<size_t>(i) * n + j] = d;
      dist[static_cast<size_t>(j) * n + i] = d;
    }
  }

  std::vector<int> selected;
  selected.reserve(count);
  std::vector<bool> taken(n, false);

  // First pick: the pose farthest from the whole pool in total distance.
  int best = 0;
  double best_sum = -1.0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += dist[static_cast<size_t>(i) * n + j];
    if (sum > best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  selected.push_back(best);
  taken[best] = true;

  std::vector<double> min_dist(n);
  for (int i = 0; i < n; ++i) {
    min_dist[i] = dist[static_cast<size_t>(i) * n + best];
  }
  while (static_cast<int>(selected.size()) < count) {
    int pick = -1;
    double pick_dist = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (min_dist[i] > pick_dist) {
        pick_dist = min_dist[i];
        pick = i;
      }
    }
    selected.push_back(pick);
    taken[pick] = true;
    for (int i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], dist[static_cast<size_t>(i) * n + pick]);
    }
  }
  return selected;
}

ReferenceBank build_bank(const std::string& object_id,
                         const NormalizedModel& model,
                         std::span<const Pose> pose_pool,
                         std::span<const Intrinsics> intrinsics_per_pose,
                         int count, int frequencies, int raster) {
  if (pose_pool.size() != intrinsics_per_pose.size()) {
    throw ValidationError("build_bank: one intrinsics entry per pose required");
  }
  if (frequencies < 1) throw InvalidFrequency("build_bank: frequencies must be >= 1");
  const std::vector<int> picks = fps_select(pose_pool, count);

  ReferenceBank bank;
  bank.object_id = object_id;
  bank.model = model;
  bank.frequencies = frequencies;
  bank.raster = raster;
  bank.references.reserve(picks.size());
  for (int idx : picks) {
    Reference ref;
    ref.pose = pose_pool[idx];
    ref.intrinsics = intrinsics_per_pose[idx];
    ref.render = render(model, ref.pose, ref.intrinsics, raster, raster);
    const FeatureMap geo = encode_geometric(ref.render, frequencies);
    const FeatureMap rgb = render_rgb(ref.render, model, ref.pose);
    ref.feature = assemble_reference(geo, rgb, ref.render.modal, ref.render.amodal);
    bank.references.push_back(std::move(ref));
  }
  return bank;
}

void save_bank(const ReferenceBank& bank, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoFailure("bank: cannot create " + directory.string());

  std::vector<Vec3> verts(bank.model.vertices.begin(), bank.model.vertices.end());
  save_mesh_ply(directory / "model.ply", verts, bank.model.triangles);

  ordered_json manifest;
  manifest["object_id"] = bank.object_id;
  manifest["references"] = bank.references.size();
  manifest["frequencies"] = bank.frequencies;
  manifest["raster"] = bank.raster;
  manifest["model"] = ordered_json{
      {"file", "model.ply"},
      {"scale", bank.model.scale},
      {"center_offset",
       {bank.model.center_offset.x(), bank.model.center_offset.y(),
        bank.model.center_offset.z()}},
      {"diameter", bank.model.diameter},
  };

  ordered_json poses = ordered_json::array();
  ordered_json intrinsics = ordered_json::array();
  ordered_json features = ordered_json::array();
  for (size_t i = 0; i < bank.references.size(); ++i) {
    const Reference& ref = bank.references[i];
    poses.push_back(pose_to_floats(ref.pose));
    intrinsics.push_back(intrinsics_to_floats(ref.intrinsics));
    const std::string name = "ref_" + std::to_string(i) + ".fmap";
    save_fmap(directory / name, ref.feature);
    char checksum[20];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(file_checksum(directory / name)));
    features.push_back(ordered_json{
        {"file", name},
        {"bytes", std::filesystem::file_size(directory / name)},
        {"fnv1a64", checksum},
    });
  }
  manifest["poses"] = std::move(poses);
  manifest["intrinsics"] = std::move(intrinsics);
  manifest["features"] = std::move(features);

  std::ofstream out(directory / "bank.json");
  if (!out) throw IoFailure("bank: cannot write manifest");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoFailure("bank: manifest write failed");
}

ReferenceBank load_bank(const std::filesystem::path& directory) {
  const auto manifest_path = directory / "bank.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoFailure("bank: cannot open " + manifest_path.string());
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptBank(std::string("bank: malformed manifest: ") + e.what());
  }

  ReferenceBank bank;
  try {
    bank.object_id = manifest.at("object_id").get<std::string>();
    bank.frequencies = manifest.at("frequencies").get<int>();
    bank.raster = manifest.at("raster").get<int>();
    const size_t count = manifest.at("references").get<size_t>();

    const auto& model_info = manifest.at("model");
    const Mesh mesh =
        load_mesh(directory / model_info.at("file").get<std::string>());
    bank.model.vertices = mesh.vertices;
    bank.model.triangles = mesh.triangles;
    bank.model.scale = model_info.at("scale").get<double>();
    bank.model.diameter = model_info.at("diameter").get<double>();
    const auto offset = model_info.at("center_offset").get<std::vector<double>>();
    if (offset.size() != 3) throw CorruptBank("bank: center_offset must have 3 floats");
    bank.model.center_offset = Vec3(offset[0], offset[1], offset[2]);

    const auto& poses = manifest.at("poses");
    const auto& intrinsics = manifest.at("intrinsics");
    const auto& features = manifest.at("features");
    if (poses.size() != count || intrinsics.size() != count ||
        features.size() != count) {
      throw CorruptBank("bank: manifest reference count mismatch");
    }
    if (bank.frequencies < 1 || bank.raster < 8 || count < 1) {
      throw CorruptBank("bank: implausible manifest fields");
    }

    bank.references.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      Reference ref;
      ref.pose = pose_from_floats(poses.at(i).get<std::vector<double>>());
      ref.intrinsics =
          intrinsics_from_floats(intrinsics.at(i).get<std::vector<double>>());

      const auto& entry = features.at(i);
      const auto path = directory / entry.at("file").get<std::string>();
      if (!std::filesystem::exists(path)) {
        throw CorruptBank("bank: missing feature file " + path.string());
      }
      if (std::filesystem::file_size(path) != entry.at("bytes").get<uintmax_t>()) {
        throw CorruptBank("bank: feature file size mismatch: " + path.string());
      }
      char checksum[20];
      std::snprintf(checksum, sizeof(checksum), "%016llx",
                    static_cast<unsigned long long>(file_checksum(path)));
      if (entry.at("fnv1a64").get<std::string>() != checksum) {
        throw CorruptBank("bank: feature checksum mismatch: " + path.string());
      }
      ref.feature = load_fmap(path);
      if (ref.feature.channels != 6 * bank.frequencies + 5 ||
          ref.feature.height != bank.raster || ref.feature.width != bank.raster) {
        throw CorruptBank("bank: feature raster shape disagrees with manifest");
      }
      ref.render = render(bank.model, ref.pose, ref.intrinsics, bank.raster,
                          bank.raster);
      bank.references.push_back(std::move(ref));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptBank(std::string("bank: manifest field error: ") + e.what());
  }
  return bank;
}

std::vector<Vec3> space_carve(std::span<const CarveView> views, int resolution,
                              double scale, const Vec3& center_offset) {
  if (views.size() < 2) {
    throw ValidationError("space_carve: at least 2 views required");
  }
  if (resolution < 8) {
    throw ValidationError("space_carve: resolution must be >= 8");
  }

  auto mask_inside = [](const FeatureMap& mask, double u, double v) {
    // Bilinear sample with pixel centers at (x+0.5, y+0.5), zero outside.
    const double gx = u - 0.5;
    const double gy = v - 0.5;
    const int x0 = static_cast<int>(std::floor(gx));
    const int y0 = static_cast<int>(std::floor(gy));
    const double wx = gx - x0;
    const double wy = gy - y0;
    auto sample = [&](int y, int x) -> double {
      if (x < 0 || x >= mask.width || y < 0 || y >= mask.height) return 0.0;
      return mask.at(0, y, x);
    };
    const double value = (1 - wy) * ((1 - wx) * sample(y0, x0) + wx * sample(y0, x0 + 1)) +
                         wy * ((1 - wx) * sample(y0 + 1, x0) + wx * sample(y0 + 1, x0 + 1));
    return value > 0.5;
  };

  const int n = resolution;
  const double pitch = 2.0 / n;
  std::vector<uint8_t> kept(static_cast<size_t>(n) * n * n, 0);
  auto at = [&](int ix, int iy, int iz) -> uint8_t& {
    return kept[(static_cast<size_t>(iz) * n + iy) * n + ix];
  };

  size_t kept_count = 0;
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const Vec3 center(-1.0 + (ix + 0.5) * pitch, -1.0 + (iy + 0.5) * pitch,
                          -1.0 + (iz + 0.5) * pitch);
        const Vec3 meters = center * scale + center_offset;
        bool inside = true;
        for (const CarveView& view : views) {
          const Vec3 cam = view.pose.rotation * meters + view.pose.translation;
          if (cam.z() <= 1e-6) {
            inside = false;
            break;
          }
          const double u = view.intrinsics.fx * cam.x() / cam.z() + view.intrinsics.cx;
          const double v = view.intrinsics.fy * cam.y() / cam.z() + view.intrinsics.cy;
          if (!mask_inside(view.amodal, u, v)) {
            inside = false;
            break;
          }
        }
        if (inside) {
          at(ix, iy, iz) = 1;
          ++kept_count;
        }
      }
    }
  }
  if (kept_count == 0) {
    throw EmptyCarving("space_carve: no voxel survived all silhouettes");
  }

  std::vector<Vec3> surface;
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        if (!at(ix, iy, iz)) continue;
        const bool boundary =
            ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1 || iz == 0 ||
            iz == n - 1 || !at(ix - 1, iy, iz) || !at(ix + 1, iy, iz) ||
            !at(ix, iy - 1, iz) || !at(ix, iy + 1, iz) ||
            !at(ix, iy, iz - 1) || !at(ix, iy, iz + 1);
        if (boundary) {
          surface.emplace_back(-1.0 + (ix + 0.5) * pitch,
                               -1.0 + (iy + 0.5) * pitch,
                               -1.0 + (iz + 0.5) * pitch);
        }
      }
    }
  }
  return surface;
}

}  // namespace posekit
