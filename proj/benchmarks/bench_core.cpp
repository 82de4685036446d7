#include "badw/diophantine.hpp"
#include "badw/fractal.hpp"
#include "badw/games.hpp"
#include "badw/lattice.hpp"
#include "badw/strategy.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace badw;

namespace {

Lattice random_lattice(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(-9, 9);
  RMat m(n, RVec(n));
  Real det = 0;
  while (abs(det) < 1) {
    for (auto& row : m)
      for (auto& a : row) a = u(rng);
    det = determinant(m);
  }
  const Real s = pow(abs(det), Real(-1) / n);
  for (auto& row : m)
    for (auto& a : row) a *= s;
  return Lattice::from_columns(m);
}

StrategyParams triangle_params() {
  const auto mu = triangle_tree(ldexp(Real(1), -24), Real(1) / 2, 4);
  ParamOptions o;
  o.allowNonCompliant = true;
  return derive_params(WeightVector::parse("2/3,1/3"), mu.alpha(), closed_form_ahlfors(mu), Real("0.1"), Real(10),
                       mu.r0(), mu.beta(), o);
}

}  // namespace

static void BM_ShortestVector(benchmark::State& st) {
  PrecisionScope ps(256);
  const auto L = random_lattice(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(shortest_vector(L).norm);
}
BENCHMARK(BM_ShortestVector)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

static void BM_BadnessGolden(benchmark::State& st) {
  PrecisionScope ps(256);
  const auto w = WeightVector::parse("1");
  for (auto _ : st) benchmark::DoNotOptimize(badness_constant({QuadraticIrrational::golden()}, w, st.range(0)).cQ);
}
BENCHMARK(BM_BadnessGolden)->Arg(1000)->Arg(10000);

static void BM_DaniOrbit(benchmark::State& st) {
  PrecisionScope ps(256);
  const RVec x{(sqrt(Real(5)) - 1) / 2, sqrt(Real(2)) - 1};
  const auto w = WeightVector::parse("2/3,1/3");
  for (auto _ : st) benchmark::DoNotOptimize(dani_orbit_min(x, w, Real(2), st.range(0)).minSystole);
}
BENCHMARK(BM_DaniOrbit)->Arg(30)->Arg(100);

// Cold against warm-started reduction along a slowly moving point.
static void BM_DangerCheck(benchmark::State& st) {
  PrecisionScope ps(1536);
  const auto p = triangle_params();
  const DangerousSetSpec spec{15, 2, 0, pow(p.beta, p.eta * 2)};
  RVec x{Real("0.3141592653589793"), Real("0.2718281828459045")};
  for (auto _ : st) {
    x[0] += ldexp(Real(1), -90);
    benchmark::DoNotOptimize(danger_check(x, spec, p).systole);
  }
}
BENCHMARK(BM_DangerCheck)->Unit(benchmark::kMillisecond);

static void BM_VerifyAhlfors(benchmark::State& st) {
  PrecisionScope ps(256);
  const auto mu = middle_thirds_tree(12);
  for (auto _ : st) benchmark::DoNotOptimize(verify_ahlfors(mu, st.range(0), 1).empiricalA);
}
BENCHMARK(BM_VerifyAhlfors)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_RestrictedGame(benchmark::State& st) {
  PrecisionScope ps(256);
  for (auto _ : st) {
    auto alice = center_split_alice();
    auto bob = random_bob(1);
    auto t = play(GameVariant::restricted(), Real(1) / 4, Ball{RVec(2, Real(0)), Real(1)}, *alice, *bob,
                  static_cast<int>(st.range(0)));
    benchmark::DoNotOptimize(validate_transcript(t).ok);
  }
}
BENCHMARK(BM_RestrictedGame)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_RunBadw(benchmark::State& st) {
  BadwRunConfig c;
  c.rounds = static_cast<int>(st.range(0));
  c.audit = false;
  for (auto _ : st) benchmark::DoNotOptimize(run_badw(c).svpCalls);
}
BENCHMARK(BM_RunBadw)->Arg(8)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_MAIN();
