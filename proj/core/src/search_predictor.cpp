#include <algorithm>
#include <cmath>

#include "posekit/refinement.hpp"
#include "posekit/rng.hpp"

namespace posekit {

namespace {

using Params9 = Eigen::Matrix<double, 9, 1>;  // (v_x, v_y, v_z, rot6d)

constexpr double kPenalty = 1e6;

RefinementParams unpack(const Params9& x) {
  RefinementParams params;
  params.translation = x.head<3>();
  params.rotation = x.tail<6>();
  return params;
}

Params9 pack(const RefinementParams& params) {
  Params9 x;
  x.head<3>() = params.translation;
  x.tail<6>() = params.rotation;
  return x;
}

// Minimal Nelder-Mead on a fixed-size simplex with an eval budget shared by
// the caller. Deterministic for a given start and step vector.
template <typename F>
void nelder_mead(const F& objective, const Params9& start, const Params9& steps,
                 int max_evals, int* evals, Params9* best_x, double* best_f) {
  constexpr int kDim = 9;
  constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;

  auto eval = [&](const Params9& x) {
    const double f = objective(x);
    ++*evals;
    if (f < *best_f) {
      *best_f = f;
      *best_x = x;
    }
    return f;
  };
  if (max_evals <= 0) return;

  std::array<Params9, kDim + 1> xs;
  std::array<double, kDim + 1> fs;
  int used = 0;
  xs[0] = start;
  fs[0] = eval(xs[0]);
  ++used;
  for (int i = 0; i < kDim && used < max_evals; ++i) {
    xs[i + 1] = start;
    xs[i + 1][i] += steps[i];
    fs[i + 1] = eval(xs[i + 1]);
    ++used;
  }
  if (used < kDim + 1) return;

  std::array<int, kDim + 1> order;
  for (int i = 0; i <= kDim; ++i) order[i] = i;

  while (used < max_evals) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[a] < fs[b]; });
    const int lo = order[0], hi = order[kDim], second_hi = order[kDim - 1];
    if (fs[hi] - fs[lo] < 1e-14) break;

    Params9 centroid = Params9::Zero();
    for (int i = 0; i < kDim; ++i) centroid += xs[order[i]];
    centroid /= static_cast<double>(kDim);

    const Params9 reflected = centroid + kAlpha * (centroid - xs[hi]);
    const double f_reflected = eval(reflected);
    ++used;
    if (f_reflected < fs[lo]) {
      if (used >= max_evals) break;
      const Params9 expanded = centroid + kGamma * (reflected - centroid);
      const double f_expanded = eval(expanded);
      ++used;
      if (f_expanded < f_reflected) {
        xs[hi] = expanded;
        fs[hi] = f_expanded;
      } else {
        xs[hi] = reflected;
        fs[hi] = f_reflected;
      }
      continue;
    }
    if (f_reflected < fs[second_hi]) {
      xs[hi] = reflected;
      fs[hi] = f_reflected;
      continue;
    }
    if (used >= max_evals) break;
    const Params9 contracted = centroid + kRho * (xs[hi] - centroid);
    const double f_contracted = eval(contracted);
    ++used;
    if (f_contracted < fs[hi]) {
      xs[hi] = contracted;
      fs[hi] = f_contracted;
      continue;
    }
    for (int i = 1; i <= kDim && used < max_evals; ++i) {
      xs[order[i]] = xs[lo] + kSigma * (xs[order[i]] - xs[lo]);
      fs[order[i]] = eval(xs[order[i]]);
      ++used;
    }
  }
}

// The 24 det(+1) signed permutation matrices: a deterministic coarse cover
// of SO(3) for restart probes.
const std::vector<Mat3>& octahedral_rotations() {
  static const std::vector<Mat3> rotations = [] {
    std::vector<Mat3> out;
    int perm[3] = {0, 1, 2};
    std::sort(perm, perm + 3);
    do {
      for (int signs = 0; signs < 8; ++signs) {
        Mat3 r = Mat3::Zero();
        for (int row = 0; row < 3; ++row) {
          r(row, perm[row]) = (signs >> row) & 1 ? -1.0 : 1.0;
        }
        if (r.determinant() > 0.5) out.push_back(r);
      }
    } while (std::next_permutation(perm, perm + 3));
    return out;
  }();
  return rotations;
}

struct SilhouetteStats {
  double area = 0.0;  // pixels
  double u = 0.0;     // centroid, pixels
  double v = 0.0;
};

class SearchPredictor final : public Predictor {
 public:
  SearchPredictor(FeatureMap target_geo, const NormalizedModel& model,
                  int frequencies, int raster, const SearchSettings& settings)
      : model_(model),
        frequencies_(frequencies),
        raster_(raster),
        settings_(settings) {
    if (target_geo.channels != 6 * frequencies_) {
      throw ShapeMismatch("search predictor: target must have 6N channels");
    }
    if (target_geo.height != raster_ || target_geo.width != raster_) {
      throw ShapeMismatch("search predictor: target raster size mismatch");
    }
    // The objective compares all channels, or cosine channels only for
    // symmetric objects (in-pair odd index).
    const int channels = target_geo.channels;
    std::vector<int> used;
    for (int c = 0; c < channels; ++c) {
      if (!settings_.symmetric || c % 2 == 1) used.push_back(c);
    }
    used_channels_ = static_cast<int>(used.size());

    // Pixel-major copy of the compared target channels plus the per-pixel
    // absolute mass; a candidate pays for every target pixel it fails to
    // cover, which makes the pixel loop below exactly the full-raster L1.
    const size_t plane = target_geo.plane();
    plane_ = plane;
    target_px_.assign(plane * used.size(), 0.0f);
    target_mass_.assign(plane, 0.0);
    total_mass_ = 0.0;
    for (size_t u = 0; u < used.size(); ++u) {
      const float* src = target_geo.data.data() + used[u] * plane;
      for (size_t i = 0; i < plane; ++i) {
        target_px_[i * used.size() + u] = src[i];
        target_mass_[i] += std::abs(static_cast<double>(src[i]));
      }
    }
    for (double m : target_mass_) total_mass_ += m;

    // Silhouette moments of the target feature, used to seed the translation
    // parameters so restarts start with overlapping silhouettes.
    for (size_t i = 0; i < plane; ++i) {
      if (target_mass_[i] <= 0.0) continue;
      target_silhouette_.area += 1.0;
      target_silhouette_.u += static_cast<double>(i % raster_) + 0.5;
      target_silhouette_.v += static_cast<double>(i / raster_) + 0.5;
    }
    if (target_silhouette_.area > 0.0) {
      target_silhouette_.u /= target_silhouette_.area;
      target_silhouette_.v /= target_silhouette_.area;
    }
  }

  RefinementParams predict(const QueryContext& query,
                           const ReferenceContext& reference) const override {
    const int budget = settings_.budget;
    if (budget <= 1) return RefinementParams::identity();

    int evals = 0;
    Params9 best_x = pack(RefinementParams::identity());
    double best_f = kPenalty;

    auto tracked = [&](const Params9& x, SilhouetteStats* stats = nullptr) {
      const double f = evaluate(x, reference, query.intrinsics, stats);
      ++evals;
      if (f < best_f) {
        best_f = f;
        best_x = x;
      }
      return f;
    };

    // Silhouette-moment alignment: shift the projected center onto the
    // target centroid and match apparent area through the depth scale. A few
    // rounds absorb the perspective feedback between the two corrections.
    Params9 base = pack(RefinementParams::identity());
    tracked(base);
    if (target_silhouette_.area > 0.0) {
      Params9 aligned = base;
      for (int round = 0; round < 3 && evals + 1 < budget; ++round) {
        SilhouetteStats stats;
        const double f = tracked(aligned, &stats);
        if (f >= kPenalty || stats.area <= 0.0) break;
        const double du = target_silhouette_.u - stats.u;
        const double dv = target_silhouette_.v - stats.v;
        const double ratio = std::sqrt(stats.area / target_silhouette_.area);
        Params9 next = aligned;
        next[0] += du;
        next[1] += dv;
        next[2] = std::max(-0.9, (next[2] + 1.0) * ratio - 1.0);
        if (std::abs(du) < 0.25 && std::abs(dv) < 0.25 &&
            std::abs(ratio - 1.0) < 5e-3) {
          aligned = next;
          break;
        }
        aligned = next;
      }
      base = aligned;
    }

    // Restart probes around the aligned base: the octahedral rotations as a
    // deterministic coarse cover, then seeded random perturbations.
    std::mt19937_64 engine(reference_stream_seed(reference));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<std::pair<double, Params9>> starts;
    starts.emplace_back(tracked(base), base);
    if (budget > 128) {
      for (const Mat3& delta : octahedral_rotations()) {
        if (evals >= budget) break;
        Params9 x = base;
        x.tail<6>() = matrix_to_rot6d(delta);
        starts.emplace_back(tracked(x), x);
      }
    }
    const int random_probes = std::min(10, std::max(0, budget / 16));
    for (int p = 0; p < random_probes && evals < budget; ++p) {
      Params9 x = base;
      Vec3 axis(normal(engine), normal(engine), normal(engine));
      if (axis.norm() < 1e-9) axis = Vec3::UnitZ();
      const double angle = (p % 2 == 0) ? uniform(engine) * M_PI
                                        : std::abs(normal(engine)) * 0.3;
      x.tail<6>() = matrix_to_rot6d(
          Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() *
          rot6d_to_matrix(Rot6d(base.tail<6>())));
      x[0] += normal(engine) * 0.02 * raster_;
      x[1] += normal(engine) * 0.02 * raster_;
      x[2] = std::max(-0.9, x[2] + normal(engine) * 0.05);
      starts.emplace_back(tracked(x), x);
    }
    std::stable_sort(starts.begin(), starts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    Params9 steps;
    steps << 0.02 * raster_, 0.02 * raster_, 0.04, 0.08, 0.08, 0.08, 0.08, 0.08,
        0.08;

    // Nelder-Mead does its own eval counting and best tracking.
    auto objective = [&](const Params9& x) {
      return evaluate(x, reference, query.intrinsics, nullptr);
    };
    const int restarts = std::min<int>(4, static_cast<int>(starts.size()));
    const double shares[4] = {0.3, 0.15, 0.1, 0.08};
    for (int r = 0; r < restarts && evals < budget; ++r) {
      const int allowance = std::min(
          budget - evals, std::max(20, static_cast<int>(shares[r] * budget)));
      nelder_mead(objective, starts[r].second, steps, allowance, &evals,
                  &best_x, &best_f);
    }
    if (evals < budget) {
      const Params9 fine = 0.1 * steps;
      const Params9 from = best_x;
      nelder_mead(objective, from, fine, budget - evals, &evals, &best_x,
                  &best_f);
    }
    return unpack(best_x);
  }

 private:
  uint64_t reference_stream_seed(const ReferenceContext& ref) const {
    uint64_t hash = 0xcbf29ce484222325ULL ^ settings_.seed;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) hash_append(&hash, ref.pose.rotation(r, c));
      hash_append(&hash, ref.pose.translation[r]);
    }
    hash_append(&hash, ref.intrinsics.fx);
    hash_append(&hash, ref.intrinsics.cx);
    hash_append(&hash, ref.intrinsics.cy);
    return hash;
  }

  // Mean masked L1 between the candidate's rendered geometric feature and
  // the target over the compared channels: the sum over candidate-covered
  // pixels plus the uncovered target mass equals the full-raster sum while
  // touching only masked pixels.
  double evaluate(const Params9& x, const ReferenceContext& reference,
                  const Intrinsics& query_k) const {
    if (x[2] <= -0.999) return kPenalty;
    Candidate candidate;
    try {
      candidate = untangled_update(unpack(x), reference.pose,
                                   reference.intrinsics, query_k);
    } catch (const ValidationError&) {
      return kPenalty;
    }
    if (candidate.pose.translation.z() < 1e-3) return kPenalty;

    RenderResult rendered;
    try {
      rendered = render(model_, candidate.pose, query_k, raster_, raster_);
    } catch (const ValidationError&) {
      return kPenalty;
    }

    const int pairs = frequencies_;
    const bool cosine_only = settings_.symmetric;
    double sum = 0.0;
    double covered_mass = 0.0;
    double enc[2 * 16];  // frequencies capped well below 16 in practice
    const float* amodal = rendered.amodal.data.data();
    for (size_t px = 0; px < plane_; ++px) {
      if (amodal[px] == 0.0f) continue;
      covered_mass += target_mass_[px];
      const float* target = target_px_.data() + px * used_channels_;
      int u = 0;
      for (int axis = 0; axis < 3; ++axis) {
        positional_encode(rendered.coords.data[axis * plane_ + px], pairs, enc);
        for (int k = 0; k < 2 * pairs; ++k) {
          if (cosine_only && k % 2 == 0) continue;
          const float value = static_cast<float>(enc[k]);
          sum += std::abs(static_cast<double>(value) - target[u++]);
        }
      }
    }
    sum += total_mass_ - covered_mass;
    return sum / (static_cast<double>(plane_) * used_channels_);
  }

  const NormalizedModel& model_;
  int frequencies_;
  int raster_;
  SearchSettings settings_;
  size_t plane_ = 0;
  int used_channels_ = 0;
  std::vector<float> target_px_;     // pixel-major, compared channels only
  std::vector<double> target_mass_;  // per-pixel |target| over compared channels
  double total_mass_ = 0.0;
};

}  // namespace

std::unique_ptr<Predictor> make_search_predictor(FeatureMap target_geo,
                                                 const NormalizedModel& model,
                                                 int frequencies, int raster,
                                                 const SearchSettings& settings) {
  if (frequencies > 15) {
    throw InvalidFrequency("search predictor: frequency count above 15 unsupported");
  }
  return std::make_unique<SearchPredictor>(std::move(target_geo), model,
                                           frequencies, raster, settings);
}

}  // namespace posekit
