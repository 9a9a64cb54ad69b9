// Serial reference vs OpenMP kernels on lattice cells of the unit-area disc.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>

#include "fracvar/kernels.hpp"
#include "fracvar/model.hpp"
#include "fracvar/pair_integrals.hpp"

using namespace fracvar;

namespace {

struct Problem {
  Mesh mesh;
  PairTable table;
  Eigen::VectorXd u;
  Eigen::MatrixXd Q;
};

const Problem& problem(int cells_per_unit) {
  static std::map<int, std::unique_ptr<Problem>> cache;
  auto& slot = cache[cells_per_unit];
  if (!slot) {
    slot = std::make_unique<Problem>();
    const double r = 1.0 / std::sqrt(std::numbers::pi);
    slot->mesh = build_mesh(DomainSpec::ball({0.0, 0.0}, r), 1.0 / cells_per_unit, 8.0 * r);
    int span = 0;
    for (const auto& k : slot->mesh.index) span = std::max({span, std::abs(k[0]), std::abs(k[1])});
    slot->table = PairTable(2, 0.3, {2 * span + 2, 2 * span + 2, 1});
    const auto N = static_cast<Eigen::Index>(slot->mesh.size());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    slot->u.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) slot->u[i] = U(rng);
    slot->Q.resize(N, 2 * N);
    for (Eigen::Index i = 0; i < slot->Q.size(); ++i) slot->Q.data()[i] = U(rng);
  }
  return *slot;
}

template <bool Parallel>
void BM_pair_form(benchmark::State& st) {
  const Problem& p = problem(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    const double v = Parallel ? kernels::omp::pair_form(p.table, p.mesh.index, p.u)
                              : kernels::serial::pair_form(p.table, p.mesh.index, p.u);
    benchmark::DoNotOptimize(v);
  }
  st.counters["cells"] = static_cast<double>(p.mesh.size());
}

template <bool Parallel>
void BM_pair_apply(benchmark::State& st) {
  const Problem& p = problem(static_cast<int>(st.range(0)));
  Eigen::VectorXd out;
  for (auto _ : st) {
    if (Parallel) {
      kernels::omp::pair_apply(p.table, p.mesh.index, p.u, out);
    } else {
      kernels::serial::pair_apply(p.table, p.mesh.index, p.u, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  st.counters["cells"] = static_cast<double>(p.mesh.size());
}

template <bool Parallel>
void BM_pair_matrix(benchmark::State& st) {
  const Problem& p = problem(static_cast<int>(st.range(0)));
  Eigen::MatrixXd W;
  for (auto _ : st) {
    if (Parallel) {
      kernels::omp::pair_matrix(p.table, p.mesh.index, W);
    } else {
      kernels::serial::pair_matrix(p.table, p.mesh.index, W);
    }
    benchmark::DoNotOptimize(W.data());
  }
  st.counters["cells"] = static_cast<double>(p.mesh.size());
}

template <bool Parallel>
void BM_gram(benchmark::State& st) {
  const Problem& p = problem(static_cast<int>(st.range(0)));
  Eigen::MatrixXd G;
  for (auto _ : st) {
    if (Parallel) {
      kernels::omp::gram(p.Q, G);
    } else {
      kernels::serial::gram(p.Q, G);
    }
    benchmark::DoNotOptimize(G.data());
  }
  st.counters["threads"] = Parallel ? kernels::thread_count() : 1;
}

}  // namespace

BENCHMARK(BM_pair_form<false>)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_form<true>)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_apply<false>)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_apply<true>)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_matrix<false>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_matrix<true>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram<false>)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram<true>)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
