#include <benchmark/benchmark.h>

#include <random>

#include "posekit/reference_bank.hpp"
#include "posekit/refinement.hpp"
#include "posekit/scene.hpp"

namespace {

using namespace posekit;

NormalizedModel cube_model() {
  std::vector<Vec3> verts;
  const double h = 0.05;
  for (int i = 0; i < 8; ++i) {
    verts.emplace_back((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
  }
  TriangleList tris = {{0, 1, 3}, {0, 3, 2}, {4, 6, 7}, {4, 7, 5},
                       {0, 4, 5}, {0, 5, 1}, {2, 3, 7}, {2, 7, 6},
                       {0, 2, 6}, {0, 6, 4}, {1, 5, 7}, {1, 7, 3}};
  return normalize_model(verts, tris);
}

Pose bench_pose(uint64_t seed) {
  std::mt19937_64 engine(seed);
  Pose pose;
  pose.rotation = random_rotation(engine);
  pose.translation = Vec3(0.02, -0.01, 0.9);
  return pose;
}

const Intrinsics kBenchK{180, 180, 32, 32, 64, 64};

void BM_RenderCube64(benchmark::State& state) {
  const NormalizedModel model = cube_model();
  const Pose pose = bench_pose(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(model, pose, kBenchK, 64, 64));
  }
}
BENCHMARK(BM_RenderCube64);

void BM_EncodeGeometric(benchmark::State& state) {
  const NormalizedModel model = cube_model();
  const RenderResult r = render(model, bench_pose(2), kBenchK, 64, 64);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_geometric(r, n));
  }
}
BENCHMARK(BM_EncodeGeometric)->Arg(1)->Arg(5)->Arg(7);

void BM_UntangledUpdate(benchmark::State& state) {
  const Pose ref = bench_pose(3);
  const Pose target = bench_pose(4);
  const Intrinsics ref_k{320, 320, 120, 136, 256, 256};
  const Intrinsics query_k{610, 610, 128, 128, 256, 256};
  const RefinementParams params = oracle_params(ref, ref_k, target, query_k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(untangled_update(params, ref, ref_k, query_k));
  }
}
BENCHMARK(BM_UntangledUpdate);

void BM_OracleParams(benchmark::State& state) {
  const Pose ref = bench_pose(5);
  const Pose target = bench_pose(6);
  const Intrinsics ref_k{320, 320, 120, 136, 256, 256};
  const Intrinsics query_k{610, 610, 128, 128, 256, 256};
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_params(ref, ref_k, target, query_k));
  }
}
BENCHMARK(BM_OracleParams);

void BM_MedoidVote(benchmark::State& state) {
  std::mt19937_64 engine(7);
  std::vector<Candidate> candidates;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    Candidate c;
    c.pose = bench_pose(engine());
    c.source_reference = i;
    candidates.push_back(c);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(medoid_vote(candidates));
  }
}
BENCHMARK(BM_MedoidVote)->Arg(4)->Arg(16);

void BM_FpsSelect(benchmark::State& state) {
  std::mt19937_64 engine(8);
  std::vector<Pose> pool;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    pool.push_back(bench_pose(engine()));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fps_select(pool, 4));
  }
}
BENCHMARK(BM_FpsSelect)->Arg(64)->Arg(256);

void BM_SpaceCarve(benchmark::State& state) {
  const NormalizedModel model = cube_model();
  const Intrinsics k{120, 120, 48, 48, 96, 96};
  std::mt19937_64 engine(9);
  std::vector<CarveView> views;
  for (int i = 0; i < 8; ++i) {
    Pose pose;
    pose.rotation = random_rotation(engine);
    pose.translation = Vec3(0, 0, 0.6);
    views.push_back({render(model, pose, k, 96, 96).amodal, pose, k});
  }
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(space_carve(views, resolution, model.scale,
                                         model.center_offset));
  }
}
BENCHMARK(BM_SpaceCarve)->Arg(16)->Arg(32);

void BM_SearchPredict(benchmark::State& state) {
  const NormalizedModel model = cube_model();
  const Pose gt = bench_pose(10);
  const FeatureMap target =
      encode_geometric(render(model, gt, kBenchK, 64, 64), 5);
  SearchSettings settings;
  settings.budget = static_cast<int>(state.range(0));
  settings.seed = 11;
  const auto predictor = make_search_predictor(target, model, 5, 64, settings);
  QueryContext query;
  query.intrinsics = kBenchK;
  ReferenceContext ref;
  ref.pose = bench_pose(12);
  ref.intrinsics = kBenchK;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predictor->predict(query, ref));
  }
}
BENCHMARK(BM_SearchPredict)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
