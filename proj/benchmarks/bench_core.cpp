#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"
#include "deconflict/kinematics.hpp"
#include "deconflict/qp.hpp"
#include "deconflict/recovery.hpp"
#include "deconflict/trajectory.hpp"

using namespace deconflict;

namespace {

// Relative states spread over radius and approach angle, reused so the
// predicate benchmarks measure work, not RNG.
std::vector<RelativeState> sample_states(int count) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> rad(5.05, 300.0);
  std::uniform_real_distribution<double> spd(1.0, 1200.0);
  std::vector<RelativeState> states;
  states.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pa = ang(rng), r = rad(rng), va = ang(rng), s = spd(rng);
    states.push_back({{r * std::cos(pa), r * std::sin(pa)},
                      {s * std::cos(va), s * std::sin(va)}});
  }
  return states;
}

// A stage-1 relaxation shape: box [0.9, 1.1] and 2-sparse rows with right
// hand sides straddling the nominal point, mirroring what the search feeds
// the solver at depth.
BoxQP relaxation_shape(int n, int m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> vi(0, n - 1);
  BoxQP qp;
  qp.n = n;
  qp.weight = 0.2;
  qp.lower.assign(n, 0.9);
  qp.upper.assign(n, 1.1);
  for (int r = 0; r < m; ++r) {
    LinearRow row;
    row.idx[0] = vi(rng);
    row.coeff[0] = gauss(rng);
    row.idx[1] = (row.idx[0] + 1 + vi(rng)) % n;
    if (row.idx[1] == row.idx[0]) row.idx[1] = -1;
    else row.coeff[1] = gauss(rng);
    const double at_one = row.coeff[0] + (row.idx[1] >= 0 ? row.coeff[1] : 0.0);
    row.rhs = at_one + 0.08 * gauss(rng) + 0.04;
    qp.rows.push_back(row);
  }
  return qp;
}

void BM_is_separated(benchmark::State& state) {
  const auto states = sample_states(1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_separated(states[i], 5.0));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_is_separated);

void BM_g_value(benchmark::State& state) {
  const auto states = sample_states(1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g_value(states[i], 5.0));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_g_value);

void BM_tangent_halfplanes(benchmark::State& state) {
  const auto states = sample_states(1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tangent_halfplanes(states[i].p, 5.0));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_tangent_halfplanes);

void BM_qp_cold(benchmark::State& state) {
  const BoxQP qp = relaxation_shape(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(0)) * 2, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_convex_qp(qp));
  }
}
BENCHMARK(BM_qp_cold)->Arg(5)->Arg(10)->Arg(15)->Arg(30);

void BM_qp_warm_append(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BoxQP qp = relaxation_shape(n, n * 2, 11);
  QpWarmStart base;
  solve_convex_qp(qp, &base);
  LinearRow extra;
  extra.idx[0] = 0;
  extra.idx[1] = n > 1 ? 1 : -1;
  extra.coeff[0] = 1.0;
  extra.coeff[1] = n > 1 ? 1.0 : 0.0;
  extra.rhs = (n > 1 ? 2.0 : 1.0) - 0.05;
  qp.rows.push_back(extra);
  for (auto _ : state) {
    QpWarmStart warm = base;
    benchmark::DoNotOptimize(solve_convex_qp(qp, &warm));
  }
}
BENCHMARK(BM_qp_warm_append)->Arg(5)->Arg(10)->Arg(15)->Arg(30);

void BM_avoidance_cp(benchmark::State& state) {
  const Instance inst = generate_cp(static_cast<int>(state.range(0)), 200.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_avoidance(inst));
  }
}
BENCHMARK(BM_avoidance_cp)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_build_omega(benchmark::State& state) {
  const Instance inst = generate_cp(static_cast<int>(state.range(0)), 200.0);
  const AvoidanceSolution avoid = solve_avoidance(inst);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_omega(inst, avoid, grid));
  }
}
BENCHMARK(BM_build_omega)->Arg(8)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_greedy_recovery(benchmark::State& state) {
  const Instance inst = generate_cp(static_cast<int>(state.range(0)), 200.0);
  const AvoidanceSolution avoid = solve_avoidance(inst);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables omega = build_omega(inst, avoid, grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_greedy_recovery(inst, avoid, omega));
  }
}
BENCHMARK(BM_greedy_recovery)->Arg(8)->Arg(15);

void BM_exact_recovery(benchmark::State& state) {
  const Instance inst = generate_cp(static_cast<int>(state.range(0)), 200.0);
  const AvoidanceSolution avoid = solve_avoidance(inst);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables omega = build_omega(inst, avoid, grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_exact_recovery(inst, avoid, omega));
  }
}
BENCHMARK(BM_exact_recovery)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_assemble_verify(benchmark::State& state) {
  const Instance inst = generate_cp(8, 200.0);
  const AvoidanceSolution avoid = solve_avoidance(inst);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables omega = build_omega(inst, avoid, grid);
  const RecoverySolution rec = solve_greedy_recovery(inst, avoid, omega);
  for (auto _ : state) {
    const auto trajs = assemble(inst, avoid, rec);
    benchmark::DoNotOptimize(verify(trajs, inst.config.d));
  }
}
BENCHMARK(BM_assemble_verify)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
