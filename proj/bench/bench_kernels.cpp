// Serial reference kernels against the OpenMP versions.

#include <benchmark/benchmark.h>

#include <set>
#include <vector>

#include "dcebr/liouvillian.hpp"
#include "dcebr/quantum.hpp"
#include "dcebr/steady.hpp"

using namespace dcebr;

namespace {

const SystemParams kParams{10.0, 20.0, 1.0, 2.0, 2.0};

Liouvillian generator(int n) {
  FockConfig f;
  f.n_cav = n;
  f.n_mech = n;
  return Liouvillian(kParams, DriveParams{1.5, 20.0}, f);
}

DenseMatrix state(const Liouvillian& L) {
  FockConfig f = L.config();
  return QuantumState::coherent(f, 0.3, 0.8).rho;
}

void BM_apply_reference(benchmark::State& st) {
  const Liouvillian L = generator(static_cast<int>(st.range(0)));
  const DenseMatrix rho = state(L);
  DenseMatrix out;
  for (auto _ : st) {
    L.apply_reference(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_apply(benchmark::State& st) {
  const Liouvillian L = generator(static_cast<int>(st.range(0)));
  const DenseMatrix rho = state(L);
  DenseMatrix out;
  for (auto _ : st) {
    L.apply(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_apply_hermitian(benchmark::State& st) {
  const Liouvillian L = generator(static_cast<int>(st.range(0)));
  const DenseMatrix rho = state(L);
  DenseMatrix out;
  for (auto _ : st) {
    L.apply_hermitian(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}

std::vector<double> omegas() {
  std::vector<double> w;
  for (int i = 0; i < 16; ++i) w.push_back(18.0 + 4.0 * i / 15.0);
  return w;
}

SweepOptions sweep_options() {
  SweepOptions o;
  o.fock.n_cav = 6;
  o.fock.n_mech = 6;
  o.strategy = NullSpace{};
  return o;
}

void BM_sweep_serial(benchmark::State& st) {
  const auto w = omegas();
  const std::set<Tier> tiers = {Tier::Linear, Tier::CumulantBranches, Tier::MasterEquation};
  for (auto _ : st) benchmark::DoNotOptimize(sweep_serial(kParams, 1.0, w, tiers, sweep_options()).rows.size());
}

void BM_sweep(benchmark::State& st) {
  const auto w = omegas();
  const std::set<Tier> tiers = {Tier::Linear, Tier::CumulantBranches, Tier::MasterEquation};
  for (auto _ : st) benchmark::DoNotOptimize(sweep(kParams, 1.0, w, tiers, sweep_options()).rows.size());
}

}  // namespace

BENCHMARK(BM_apply_reference)->Arg(8)->Arg(16)->Arg(24);
BENCHMARK(BM_apply)->Arg(8)->Arg(16)->Arg(24);
BENCHMARK(BM_apply_hermitian)->Arg(8)->Arg(16)->Arg(24);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
