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

#ifndef WSABF_ARCHSEARCH_HPP
#define WSABF_ARCHSEARCH_HPP

#include "wsabf/channel.hpp"
#include "wsabf/config.hpp"
#include "wsabf/geometry.hpp"
#include "wsabf/linalg.hpp"

#include <iosfwd>
#include <vector>

namespace wsabf
{
    struct LosCapacity
    {
        double bits = 0.0; // bits/s/Hz
        int streams = 0;
        bool zero_channel = false;
    };

    /// Interference-free capacity with equal power over the streams:
    /// sum_{i<=r} log2(1 + (P_t / r) s_i^2 / noise). With fixed_rank == 0, r is the
    /// best stream count up to the numerical rank of H (`streams` reports it); otherwise
    /// r = fixed_rank and the top-r singular values are used (the rank-K design objective).
    LosCapacity los_capacity(const CMatrix &H, double total_power, double noise_power, int fixed_rank = 0);

    /// f = ||A_r A_r^H - K I||_F^2 for an N_r x K matrix of unit-modulus receive responses.
    double gram_deviation(const CMatrix &receive_responses);

    /// Line-of-sight receive responses a_r^{uk}, one column per subarray.
    CMatrix receive_response_matrix(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user);

    /// Line-of-sight-only channel of one user.
    CMatrix los_channel(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                        PathGainModel model = PathGainModel::free_space);

    /// Largest |beta_k - beta_m| over subarray pairs and receive antenna pairs (i, j),
    /// where beta_k = 2pi/lambda * d_r * ((j1 - i1) u_x^k + (j2 - i2) u_z^k).
    double max_phase_spread(const std::vector<SubarrayUserGeometry> &subarrays, int rx_side, double wavelength,
                            double rx_spacing);

    /// tau = 2 sqrt(2) (sqrt(N_r) - 1) S_t.
    double distance_threshold(int num_rx_antennas, double aperture);

    struct SpacingSample
    {
        double subarray_spacing = 0.0;
        double aperture = 0.0;
        double capacity = 0.0;       // mean LoS capacity over users
        double gram_deviation = 0.0; // summed over users
        bool distance_condition = false;
    };

    struct TheoremDiagnostics
    {
        double tau = 0.0;
        double min_distance = 0.0;
        bool distance_condition = false;
        double max_phase_spread = 0.0;
        bool phase_bound_holds = false; // meaningful only when distance_condition
        double gram_deviation = 0.0;
        std::vector<SpacingSample> sweep;
        bool capacity_monotone = true;  // non-decreasing within slack over the sweep
        bool gram_monotone = true;      // non-increasing within slack over the sweep
    };

    struct TheoremOptions
    {
        std::vector<double> spacing_grid; // d_s values; empty skips the sweep
        double slack = 0.005;             // relative tolerance for monotonicity verdicts
        int fixed_rank = 0;               // forwarded to los_capacity
        PathGainModel gain = PathGainModel::free_space;
    };

    /// Distance condition, phase-spread bound and monotonicity in d_s for LoS users.
    TheoremDiagnostics theorem_guard(const SystemConfig &config, const std::vector<Point3> &users,
                                     const TheoremOptions &options = {});

    /// n log-spaced values between lo and hi inclusive.
    std::vector<double> log_grid(double lo, double hi, int n);

    struct ArchitectureCandidate
    {
        int num_subarrays = 1;
        double subarray_spacing = 0.0;
        double aperture = 0.0;
        double capacity = 0.0;
        bool feasible = false;
    };

    struct ArchitectureSearch
    {
        ArchitectureCandidate best;
        std::vector<ArchitectureCandidate> candidates;
    };

    /// Sweeps K, places each K > 1 at its largest feasible spacing and keeps the highest
    /// mean LoS capacity. A larger K must beat the incumbent by more than tie_tolerance
    /// (relative) to replace it.
    ArchitectureSearch search_architecture(const SystemConfig &config, const std::vector<Point3> &users,
                                           const std::vector<int> &candidates, double tie_tolerance = 0.01,
                                           int fixed_rank = 0);

    /// `K,d_s_m,aperture_m,capacity_bpsHz,feasible,selected` rows.
    void write_search_report(std::ostream &os, const ArchitectureSearch &search);
}

#endif
