#include <benchmark/benchmark.h>

#include "adverin/attack.hpp"
#include "adverin/intensity_map.hpp"
#include "adverin/metrics.hpp"
#include "adverin/region_mask.hpp"
#include "adverin/rng.hpp"
#include "adverin/segnet.hpp"
#include "adverin/synthdata.hpp"

namespace {

using namespace adverin;

Sample make_sample(int size) {
    Rng rng(42);
    Sample s = generate_sample(builtin_styles(4)[1], size, rng);
    s.sample_id = "bench";
    s.region_labels = compute_region_labels(s.image, 20, 1.0, 7);
    return s;
}

SegNet make_net() {
    Rng rng(mix_seed({0, kStreamInit}));
    return init_segnet(rng, 2);
}

void BM_Forward(benchmark::State& state) {
    const Sample s = make_sample(64);
    const SegNet net = make_net();
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(net, s.image));
    }
}
BENCHMARK(BM_Forward);

void BM_LossAndGrads(benchmark::State& state) {
    const Sample s = make_sample(64);
    const SegNet net = make_net();
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_and_grads(net, s.image, s.truth));
    }
}
BENCHMARK(BM_LossAndGrads);

void BM_ApplyImage(benchmark::State& state) {
    const Sample s = make_sample(64);
    Rng rng(3);
    std::vector<double> rho(11);
    for (double& r : rho) {
        r = rng.normal();
    }
    const auto mapper = IntensityMapper::from_rho(rho);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_image(mapper, s.image));
    }
}
BENCHMARK(BM_ApplyImage);

void BM_RegionLabels(benchmark::State& state) {
    const Sample s = make_sample(64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_region_labels(s.image, 20, 1.0, 7));
    }
}
BENCHMARK(BM_RegionLabels);

void BM_Attack(benchmark::State& state) {
    const Sample s = make_sample(64);
    const SegNet net = make_net();
    const AttackConfig cfg;
    Rng rng(mix_seed({0, kStreamAttack}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(adverin_example(net, s, cfg, rng));
    }
}
BENCHMARK(BM_Attack);

void BM_Hd95(benchmark::State& state) {
    const Sample s = make_sample(64);
    const BinaryMask truth = truth_mask(s.truth, 0);
    BinaryMask shifted = truth;
    for (int r = 0; r < shifted.height; ++r) {
        for (int c = shifted.width - 1; c > 0; --c) {
            shifted.at(r, c) = shifted.at(r, c - 1);
        }
        shifted.at(r, 0) = 0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(hd95(truth, shifted));
    }
}
BENCHMARK(BM_Hd95);

}  // namespace

BENCHMARK_MAIN();
