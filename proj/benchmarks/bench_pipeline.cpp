#include <benchmark/benchmark.h>

#include <random>

#include "gphmm/features.hpp"
#include "gphmm/gabor_bank.hpp"
#include "gphmm/phmm.hpp"
#include "gphmm/sampling.hpp"

using namespace gphmm;

namespace {

Image noise_image(std::size_t w, std::size_t h) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image img(w, h);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

std::vector<double> noise_seq(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(1000.0, 200.0);
  std::vector<double> v(len);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_ConvolveDirect(benchmark::State& state) {
  const auto img = noise_image(92, 112);
  const auto k = make_kernel(GaborParams{}, 2, 1, 33);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(img, k, ConvolutionMethod::Direct));
}
BENCHMARK(BM_ConvolveDirect)->Unit(benchmark::kMillisecond);

void BM_ConvolveSeparable(benchmark::State& state) {
  const auto img = noise_image(92, 112);
  const auto k = make_kernel(GaborParams{}, 2, 1, 33);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(img, k, ConvolutionMethod::Separable));
}
BENCHMARK(BM_ConvolveSeparable)->Unit(benchmark::kMillisecond);

void BM_FuseBank(benchmark::State& state) {
  const auto img = noise_image(92, 112);
  const GaborBank bank(GaborParams{}, 33);
  for (auto _ : state) benchmark::DoNotOptimize(fuse(img, bank));
}
BENCHMARK(BM_FuseBank)->Unit(benchmark::kMillisecond);

void BM_ExtractObservations(benchmark::State& state) {
  const GaborBank bank(GaborParams{}, 33);
  const auto gf = fuse(noise_image(92, 112), bank);
  const auto plan = plan_sampling(92, 112, 16, 12, 16);
  const auto order = scan_order(plan);
  for (auto _ : state) benchmark::DoNotOptimize(extract_observations(gf, plan, order));
}
BENCHMARK(BM_ExtractObservations);

void BM_Forward(benchmark::State& state) {
  const auto seq = noise_seq(500, 1);
  const std::vector<SequenceView> views{seq};
  const auto m = init_model(7, views);
  for (auto _ : state) benchmark::DoNotOptimize(forward_log_likelihood(m, seq));
}
BENCHMARK(BM_Forward);

void BM_Viterbi(benchmark::State& state) {
  const auto seq = noise_seq(500, 2);
  const std::vector<SequenceView> views{seq};
  const auto m = init_model(7, views);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(m, seq));
}
BENCHMARK(BM_Viterbi);

void BM_BaumWelchIteration(benchmark::State& state) {
  std::vector<std::vector<double>> data;
  for (std::uint64_t s = 0; s < 10; ++s) data.push_back(noise_seq(500, 10 + s));
  const std::vector<SequenceView> views(data.begin(), data.end());
  const auto m = init_model(7, views);
  BaumWelchOptions opts;
  opts.max_iters = 1;
  for (auto _ : state) benchmark::DoNotOptimize(baum_welch(m, views, opts));
}
BENCHMARK(BM_BaumWelchIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
