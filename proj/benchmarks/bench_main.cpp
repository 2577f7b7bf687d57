#include <benchmark/benchmark.h>

#include <random>

#include "zgs/evaluate.hpp"
#include "zgs/predictor.hpp"
#include "zgs/rng.hpp"
#include "zgs/skipgram.hpp"
#include "zgs/synthzoo.hpp"
#include "zgs/transferability.hpp"
#include "zgs/walks.hpp"

using namespace zgs;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

const ZooGraph& synth_graph() {
  static const ZooGraph graph = [] {
    const auto s = generate(SynthConfig{});
    const auto phi = pipeline_similarity(s.zoo, Aggregation::Sum);
    return build_graph(s.zoo, phi);
  }();
  return graph;
}

void BM_LogME(benchmark::State& state) {
  const auto n = state.range(0), d = state.range(1);
  const Eigen::MatrixXd f = gaussian(n, d, 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) benchmark::DoNotOptimize(logme_score(f, labels, 10));
}
BENCHMARK(BM_LogME)->Args({500, 64})->Args({2000, 256});

void BM_Walks(benchmark::State& state) {
  WalkConfig c;
  c.threads = 1;
  c.variant = state.range(0) ? WalkVariant::Node2VecPlus : WalkVariant::Node2Vec;
  for (auto _ : state) benchmark::DoNotOptimize(sample_walks(synth_graph(), c));
}
BENCHMARK(BM_Walks)->Arg(0)->Arg(1);

void BM_SkipGram(benchmark::State& state) {
  WalkConfig c;
  c.threads = 1;
  c.dim = static_cast<int>(state.range(0));
  c.epochs = 1;
  const auto walks = sample_walks(synth_graph(), c);
  for (auto _ : state) benchmark::DoNotOptimize(train_skipgram(walks, c));
}
BENCHMARK(BM_SkipGram)->Arg(32)->Arg(128);

void BM_Forest(benchmark::State& state) {
  const Eigen::MatrixXd X = gaussian(state.range(0), 40, 2);
  const Eigen::VectorXd y = X.col(0).array().sin() + X.col(1).array() * X.col(2).array();
  for (auto _ : state) benchmark::DoNotOptimize(ForestModel::fit(X, y, {100, 5, 42}));
}
BENCHMARK(BM_Forest)->Arg(300)->Arg(1000);

void BM_Gbm(benchmark::State& state) {
  const Eigen::MatrixXd X = gaussian(state.range(0), 40, 3);
  const Eigen::VectorXd y = X.col(0).array().sin() + X.col(1).array() * X.col(2).array();
  for (auto _ : state) benchmark::DoNotOptimize(GbmModel::fit(X, y, {500, 5, 0.05, 42}));
}
BENCHMARK(BM_Gbm)->Arg(300);

}  // namespace
BENCHMARK_MAIN();
