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

#ifndef WSABF_BEAMFORMING_HPP
#define WSABF_BEAMFORMING_HPP

#include "wsabf/config.hpp"
#include "wsabf/geometry.hpp"
#include "wsabf/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wsabf
{
    enum class Connection
    {
        fully_connected,
        sub_connected,
        digital, // analog stage is an orthonormal basis, not a phase-shifter network
    };

    /// Hybrid transceiver for all users. Stream i of user u is column u * N_s + i.
    struct BeamformerSet
    {
        CMatrix F_RF;              // N_t x L_t
        CMatrix F_BB;              // L_t x U N_s
        std::vector<CMatrix> W_RF; // per user, N_r x L_r
        std::vector<CMatrix> W_BB; // per user, L_r x N_s
        RVector power;             // diagonal of P (amplitudes); sum of squares equals P_t
        Connection connection = Connection::fully_connected;
        int num_subarrays = 1;
        int streams_per_user = 1;

        int num_users() const { return static_cast<int>(W_RF.size()); }
        /// Effective precoder F_RF F_BB diag(P), N_t x U N_s.
        CMatrix effective_precoder() const;
        /// Nonzero-capable analog entries: N_t L_t (fully connected) or N_t L_t / K (sub-connected).
        long long phase_shifter_count() const;
        /// Phase shifters driven by one subarray: N_t L_t / K^2 in sub-connected mode.
        long long phase_shifters_per_subarray() const;
    };

    /// Sections FRF, FBB, WRFu<u>, WBBu<u>, P; `row,col,re,im` lines, 9 significant digits.
    void write_beamformer_dump(std::ostream &os, const BeamformerSet &bf);

    enum class DeficiencyPolicy
    {
        raise,       // RankDeficiencyError when a user has no room for its streams
        drop_streams // the user gets zero streams (used by the bounds)
    };

    struct BdResult
    {
        CMatrix F_BB;              // L_t x U N_s, unnormalized
        std::vector<CMatrix> W_BB; // per user, L_r x N_s
        RVector gains;             // effective singular value of each stream
        std::vector<int> null_dimensions;
    };

    /// Block diagonalization on the effective channels W_RF,u^H H_u F_RF.
    BdResult bd_digital(const std::vector<CMatrix> &H, const CMatrix &F_RF, const std::vector<CMatrix> &W_RF,
                        int streams_per_user, DeficiencyPolicy policy = DeficiencyPolicy::raise);

    /// Powers p_i = max(0, mu - noise / g_i^2) with sum p_i = P_t. Needs one positive gain.
    RVector waterfilling(const RVector &gains, double total_power, double noise_power);

    struct AnalogStage
    {
        CMatrix F_RF;
        std::vector<CMatrix> W_RF;
        Connection connection = Connection::fully_connected;
        int num_subarrays = 1;
    };

    /// BD, column normalization ||F_RF f_i|| = 1 and water-filling on top of an analog stage.
    BeamformerSet complete_digital_stage(const std::vector<CMatrix> &H, const AnalogStage &analog,
                                         const SystemConfig &config,
                                         DeficiencyPolicy policy = DeficiencyPolicy::raise);

    struct AoOptions
    {
        int max_iterations = 10;
        double tolerance = 1e-3; // relative change of the objective between sweeps
        std::uint64_t seed = 1;
    };

    struct AoResult
    {
        AnalogStage analog;            // after the constant-modulus projection
        CMatrix F_unconstrained;       // block-diagonal, before projection
        std::vector<CMatrix> W_unconstrained;
        int iterations = 0;
        std::vector<double> objective;       // after every block and combiner update
        std::vector<bool> step_is_precoder;  // parallel to objective
        std::vector<double> sweep_objective; // after every full sweep
        int regularized_solves = 0;
    };

    /// Alternating optimization of the sub-connected analog precoder and the analog
    /// combiners for log2 det(I + F^H H^H W W^H H F / noise).
    AoResult ao_analog_subconnected(const std::vector<CMatrix> &H, const SystemConfig &config,
                                    const AoOptions &options = {});

    /// The objective maximized by the alternating optimization.
    double ao_objective(const std::vector<CMatrix> &H, const CMatrix &F, const std::vector<CMatrix> &W,
                        double noise_power);

    enum class DistanceModel
    {
        taylor,
        exact,
    };

    /// Subarray-wise virtual-rotation steering vector for one user, N_t entries of
    /// modulus 1/sqrt(N_t). Built from the reference-subarray geometry only.
    CVector svr_steering_vector(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                DistanceModel model = DistanceModel::taylor);

    /// Fully-connected analog stage from per-user virtual-rotation beams.
    AnalogStage svr_analog(const ArrayGeometry &geometry, const SystemConfig &config,
                           const std::vector<Point3> &users, DistanceModel model = DistanceModel::taylor);

    /// Phase of the per-user dominant singular vectors, fully connected.
    AnalogStage svd_phase_analog(const std::vector<CMatrix> &H, const SystemConfig &config);

    /// Digital-only BD with water-filling over the joint row space of all channels.
    BeamformerSet fully_digital_precoders(const std::vector<CMatrix> &H, const SystemConfig &config);
    double fully_digital_bound(const std::vector<CMatrix> &H, const SystemConfig &config);

    /// Per-user dominant receive eigenmodes, BD across users and water-filling.
    BeamformerSet capacity_upper_bound_precoders(const std::vector<CMatrix> &H, const SystemConfig &config);
    double capacity_upper_bound(const std::vector<CMatrix> &H, const SystemConfig &config);

    /// Sum over streams of log2(1 + p_i g_i^2 / noise) for an interference-free set.
    double interference_free_rate(const RVector &gains, const RVector &powers, double noise_power);
}

#endif
