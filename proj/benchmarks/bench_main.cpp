#include <benchmark/benchmark.h>

#include <random>

#include "hybridpv/battery_model.hpp"
#include "hybridpv/mpc_controller.hpp"
#include "hybridpv/pv_model.hpp"

namespace {

void BM_LambertW(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> expo(-6.0, 12.0);
    std::vector<double> xs(1024);
    for (auto& x : xs) x = std::pow(10.0, expo(rng));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hpv::pv::lambert_w(xs[k++ & 1023]));
    }
}
BENCHMARK(BM_LambertW);

void BM_ArrayMpp(benchmark::State& state) {
    const auto ref = hpv::pv::cs6p_250p_array();
    double g = 100.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hpv::pv::array_mpp_at(ref, g, 35.0));
        g = g < 1000.0 ? g + 1.0 : 100.0;
    }
}
BENCHMARK(BM_ArrayMpp);

void BM_BatteryStep(benchmark::State& state) {
    const auto pack = hpv::battery::reference_pack();
    hpv::battery::BatteryState s{0.8, 0.0, 0.0};
    double i = 200.0;
    for (auto _ : state) {
        s = hpv::battery::step_battery(s, i, 1.0, pack).state;
        if (s.soc < 0.3) i = -200.0;
        if (s.soc > 0.9) i = 200.0;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_BatteryStep);

hpv::mpc::ReferencePreview refs_for(int p, double setpoint) {
    return hpv::mpc::reference_builder(std::vector<double>(p, setpoint), 0.0, 0.9, hpv::scenario::ReservePolicy{},
                                       std::vector<double>(p, 1.6e6));
}

// Dense QP at the default horizon, cold.
void BM_QpColdSolve(benchmark::State& state) {
    const hpv::mpc::MpcConfig cfg;
    const hpv::plant::PlantParameters pp;
    const hpv::plant::PlantState x{0.9, 0.0, 0.0, 0.0, 8e5};
    const auto build = hpv::mpc::build_qp(hpv::plant::linearize(x, 1.6e6, pp, cfg.t_mpc), x, {0.0, 0.0},
                                          refs_for(cfg.p, 1.4e6), cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hpv::qp::solve_qp(build.problem));
    }
}
BENCHMARK(BM_QpColdSolve)->Unit(benchmark::kMillisecond);

// Full controller step (relinearize, build, warm-started solve) while tracking.
void BM_MpcStep(benchmark::State& state) {
    const hpv::mpc::MpcConfig cfg;
    const hpv::plant::PlantParameters pp;
    hpv::mpc::Controller ctl(cfg, pp);
    hpv::plant::PlantState x{0.9, 0.0, 0.0, 0.0, 8e5};
    const auto refs = refs_for(cfg.p, 1.4e6);
    for (auto _ : state) {
        const auto mv = ctl.solve_step(x, refs);
        x.i_b += mv.u1 * cfg.t_mpc;
        x.p_pv += mv.u2 * cfg.t_mpc;
        benchmark::DoNotOptimize(mv.u1);
    }
}
BENCHMARK(BM_MpcStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
