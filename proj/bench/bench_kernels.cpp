// Serial reference vs OpenMP kernels. Run with --benchmark_filter as usual;
// set OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "chain_fixtures.hpp"
#include "nerclust/kernels.hpp"

using namespace nerclust;

namespace {

// Insertion scoring for one word against k clusters; the word has
// neighbors in 16 clusters on each side.
struct InsertionFixture {
  std::vector<std::int64_t> bigram, left, right, out_dense, in_dense;
  std::vector<int> out_nz, in_nz;
  kernels::InsertionProblem problem;

  explicit InsertionFixture(int k) {
    std::mt19937_64 rng(1);
    const auto n = std::size_t(k);
    bigram.resize(n * n);
    left.assign(n, 0);
    right.assign(n, 0);
    std::int64_t total = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const auto c = std::int64_t(rng() % 50);
        bigram[a * n + b] = c;
        left[a] += c;
        right[b] += c;
        total += c;
      }
    out_dense.assign(n, 0);
    in_dense.assign(n, 0);
    for (int c = 0; c < k; c += k / 16) {
      out_dense[std::size_t(c)] = 1 + std::int64_t(rng() % 5);
      out_nz.push_back(c);
    }
    for (int c = 1; c < k; c += k / 16) {
      in_dense[std::size_t(c)] = 1 + std::int64_t(rng() % 5);
      in_nz.push_back(c);
    }
    std::int64_t wl = 0, wr = 0;
    for (auto x : out_dense) wl += x;
    for (auto x : in_dense) wr += x;
    problem.k = k;
    problem.bigram = bigram;
    problem.left_marginal = left;
    problem.right_marginal = right;
    problem.out_dense = out_dense;
    problem.in_dense = in_dense;
    problem.out_nz = out_nz;
    problem.in_nz = in_nz;
    problem.word_left = wl;
    problem.word_right = wr;
    problem.bigram_scale = 1.0 / double(total + wl + wr);
  }
};

template <auto Kernel>
void BM_Insertion(benchmark::State& state) {
  InsertionFixture f(int(state.range(0)));
  std::vector<double> gains(std::size_t(state.range(0)));
  for (auto _ : state) {
    Kernel(f.problem, gains);
    benchmark::DoNotOptimize(gains.data());
  }
}
BENCHMARK(BM_Insertion<kernels::insertion_gains_serial>)
    ->Name("insertion_gains/serial")->Arg(400)->Arg(1000);
BENCHMARK(BM_Insertion<kernels::insertion_gains_omp>)
    ->Name("insertion_gains/omp")->Arg(400)->Arg(1000);

// Many sentences over a 9-label model, like a CoNLL training set.
oracle::RandomChain& chain() {
  static oracle::RandomChain c = [] {
    std::mt19937_64 rng(2);
    return oracle::random_chain(rng, 2000, 30, 9, true, true);
  }();
  return c;
}

template <auto Kernel>
void BM_Loglik(benchmark::State& state) {
  auto& c = chain();
  std::vector<double> grad(c.weights.size());
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(c.data, c.params(), grad));
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(c.data.tokens()));
}
BENCHMARK(BM_Loglik<kernels::chain_loglik_serial>)->Name("chain_loglik/serial");
BENCHMARK(BM_Loglik<kernels::chain_loglik_omp>)->Name("chain_loglik/omp");

template <auto Kernel>
void BM_Decode(benchmark::State& state) {
  auto& c = chain();
  std::vector<int> labels(c.data.tokens());
  for (auto _ : state) {
    Kernel(c.data, c.params(), labels);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(c.data.tokens()));
}
BENCHMARK(BM_Decode<kernels::chain_decode_serial>)->Name("chain_decode/serial");
BENCHMARK(BM_Decode<kernels::chain_decode_omp>)->Name("chain_decode/omp");

}  // namespace

BENCHMARK_MAIN();
