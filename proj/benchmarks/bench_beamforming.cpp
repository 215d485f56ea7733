// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "wsabf/beamforming.hpp"
#include "wsabf/evaluation.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace wsabf;

namespace
{
    // One sector drop on a K-subarray array at its widest spacing.
    ChannelRealization drop(int nt, int users, int K)
    {
        ExperimentSetup s;
        s.config = default_config();
        s.config.num_tx_antennas = nt;
        s.config.num_users = users;
        s.config.tx_rf_chains = users;
        s.config.num_subarrays = K;
        if (K > 1)
            s.config.subarray_spacing_m =
                max_subarray_spacing(K, nt, s.config.wavelength(), s.config.aperture_limit_m,
                                     SpacingMode::geometric, s.config.element_spacing());
        s.placement.r_max = 20.0;
        return realize_drop(s, 0);
    }

    void args(benchmark::internal::Benchmark *b)
    {
        b->Args({256, 4})->Args({1024, 20})->Unit(benchmark::kMillisecond);
    }
}

static void BM_SvrAnalog(benchmark::State &state)
{
    const auto rz = drop(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(svr_analog(rz.geometry, rz.config, rz.users.positions));
}
BENCHMARK(BM_SvrAnalog)->Apply(args);

static void BM_SvdPhaseAnalog(benchmark::State &state)
{
    const auto rz = drop(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(svd_phase_analog(rz.H, rz.config));
}
BENCHMARK(BM_SvdPhaseAnalog)->Apply(args);

static void BM_AoAnalog(benchmark::State &state)
{
    const auto rz = drop(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(ao_analog_subconnected(rz.H, rz.config));
}
BENCHMARK(BM_AoAnalog)->Apply(args);

static void BM_BlockDiagonalization(benchmark::State &state)
{
    const auto rz = drop(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4);
    const AnalogStage a = svr_analog(rz.geometry, rz.config, rz.users.positions);
    for (auto _ : state)
        benchmark::DoNotOptimize(complete_digital_stage(rz.H, a, rz.config));
}
BENCHMARK(BM_BlockDiagonalization)->Apply(args);

static void BM_FullyDigitalBound(benchmark::State &state)
{
    const auto rz = drop(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(fully_digital_bound(rz.H, rz.config));
}
BENCHMARK(BM_FullyDigitalBound)->Apply(args);

static void BM_Waterfilling(benchmark::State &state)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> g(0.01, 3.0);
    RVector gains(state.range(0));
    for (Eigen::Index i = 0; i < gains.size(); ++i)
        gains(i) = g(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(waterfilling(gains, 1.0, 0.1));
}
BENCHMARK(BM_Waterfilling)->Arg(4)->Arg(20)->Arg(256);

static void BM_SumSe(benchmark::State &state)
{
    const auto rz = drop(1024, 20, 4);
    const BeamformerSet bf = run_algorithm(Algorithm::svr_fc, rz).beamformers;
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate(rz.H, bf, rz.config.noise_power_w));
}
BENCHMARK(BM_SumSe)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
