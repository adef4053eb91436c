#include <benchmark/benchmark.h>

#include <random>

#include "deeppco/model.hpp"
#include "deeppco/synthetic.hpp"
#include "deeppco/trainer.hpp"

using namespace deeppco;

namespace {

PointCloud bench_cloud(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-60, 60);
  PointCloud pc;
  while (pc.points.size() < n) {
    Eigen::Vector3d p{u(rng), u(rng), 0.2 * u(rng)};
    if (p.norm() > 1e-3) pc.points.push_back(p);
  }
  return pc;
}

void BM_ProjectCloud(benchmark::State& state) {
  const PointCloud pc = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const ProjectionConfig cfg = tiny_projection();
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_cloud(pc, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProjectCloud)->Arg(2000)->Arg(20000)->Arg(120000);

void BM_PoseCompose(benchmark::State& state) {
  const Pose a(euler_to_rotation({0.1, 0.2, 0.3}), {1, 2, 3});
  Pose acc;
  for (auto _ : state) {
    acc = compose(acc, a);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PoseCompose);

void BM_ConvForward(benchmark::State& state) {
  Rng init(1), r(0);
  Conv2d conv(ConvSpec{2, 8, 3, 2, 1}, init);
  Tensor in({2, 16, 64});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& x : in.v) x = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.forward(in, Mode::kEval, r));
  }
}
BENCHMARK(BM_ConvForward);

void BM_ConvBackward(benchmark::State& state) {
  Rng init(1), r(0);
  Conv2d conv(ConvSpec{2, 8, 3, 2, 1}, init);
  Tensor in({2, 16, 64});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& x : in.v) x = u(rng);
  Tensor out = conv.forward(in, Mode::kEval, r);
  Tensor grad = out;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.backward(grad));
  }
}
BENCHMARK(BM_ConvBackward);

void BM_ModelForward(benchmark::State& state) {
  const ModelProfile prof = tiny_profile();
  DeepPcoModel model(prof.translation, prof.orientation, 3);
  SamplePair s;
  s.input.translation_input = Tensor({2, 16, 64});
  s.input.orientation_input = Tensor({6, 16, 64});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& x : s.input.translation_input.v) x = u(rng);
  for (double& x : s.input.orientation_input.v) x = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(s.input, Mode::kEval));
  }
}
BENCHMARK(BM_ModelForward);

void BM_AdamStep(benchmark::State& state) {
  const ModelProfile prof = tiny_profile();
  DeepPcoModel model(prof.translation, prof.orientation, 5);
  auto params = model.params();
  for (auto& [name, t] : params) {
    t->ensure_grad();
    for (double& g : t->g) g = 1e-3;
  }
  Adam adam(0.9, 0.999, 1e-8);
  for (auto _ : state) {
    adam.step(params, 1e-4);
  }
}
BENCHMARK(BM_AdamStep);

}  // namespace

BENCHMARK_MAIN();
