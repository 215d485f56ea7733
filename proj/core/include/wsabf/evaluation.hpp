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

#ifndef WSABF_EVALUATION_HPP
#define WSABF_EVALUATION_HPP

#include "wsabf/beamforming.hpp"
#include "wsabf/channel.hpp"
#include "wsabf/config.hpp"
#include "wsabf/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wsabf
{
    struct UserRate
    {
        double se = 0.0; // bits/s/Hz
        bool pseudo_inverse = false; // interference-plus-noise covariance was singular
    };

    /// SE of user u under the full interference model:
    /// log2 det(I + R^{-1} S) with S the desired and R the interference-plus-noise covariance.
    UserRate user_se(const std::vector<CMatrix> &H, const BeamformerSet &bf, int user, double noise_power);

    struct EvaluationReport
    {
        std::vector<double> per_user;
        double sum_se = 0.0;
        int pseudo_inverse_users = 0;
    };

    EvaluationReport evaluate(const std::vector<CMatrix> &H, const BeamformerSet &bf, double noise_power);

    /// Largest ||W_u^H H_u F_v||_F / ||W_u^H H_u F_u||_F over u != v (0 for one user).
    double residual_interference(const std::vector<CMatrix> &H, const BeamformerSet &bf);

    struct BeamPatternSpec
    {
        std::vector<double> azimuths_rad;
        std::vector<double> ranges_m;  // horizontal distance from the apex
        Point3 apex = Point3::Zero();  // origin of the polar grid; z is the evaluation height
    };

    /// Azimuths evenly spaced over [lo, hi] and log-spaced ranges.
    BeamPatternSpec make_pattern_grid(double az_lo_rad, double az_hi_rad, int n_az, double r_lo, double r_hi,
                                      int n_r, const Point3 &apex);

    struct BeamPatternGrid
    {
        std::vector<double> azimuths_rad;
        std::vector<double> ranges_m;
        Eigen::MatrixXd gain; // rows = azimuth, cols = range, normalized to a peak of 1
        double peak = 0.0;    // unnormalized peak
    };

    /// Exact spherical-wave array gain sum_c |b(p)^T f_c|^2 of the precoder columns.
    BeamPatternGrid beam_pattern(const ArrayGeometry &geometry, const CMatrix &precoder, double wavelength,
                                 const BeamPatternSpec &spec);

    /// `az_rad,range_m,gain_norm` rows, 9 significant digits.
    void write_beam_pattern(std::ostream &os, const BeamPatternGrid &grid);

    enum class Algorithm
    {
        ao_sc,
        svr_fc,
        svd_phase_fc,
        fully_digital,
        capacity_ub,
    };

    std::string algorithm_name(Algorithm a);
    Algorithm parse_algorithm(const std::string &name); // throws ConfigError

    struct AlgorithmRun
    {
        BeamformerSet beamformers;
        double analog_seconds = 0.0;
        double digital_seconds = 0.0;
        int ao_iterations = 0;
    };

    /// Runs one algorithm on one channel realization.
    AlgorithmRun run_algorithm(Algorithm algorithm, const ChannelRealization &realization,
                               std::uint64_t ao_seed = 1);

    struct DropOutcome
    {
        std::uint64_t drop = 0;
        bool ok = false;
        std::string error;
        double sum_se = 0.0;
        std::vector<double> per_user;
        double analog_seconds = 0.0;
        double digital_seconds = 0.0;
    };

    struct AlgorithmSummary
    {
        Algorithm algorithm = Algorithm::svr_fc;
        std::vector<DropOutcome> drops; // in drop order
        double mean = 0.0;              // over successful drops
        double stddev = 0.0;            // sample standard deviation
        int failures = 0;
        double mean_analog_seconds = 0.0;
        double mean_digital_seconds = 0.0;
    };

    struct ExperimentSetup
    {
        SystemConfig config;
        PlacementPolicy placement;
        std::vector<Algorithm> algorithms;
        int drops = 1;
        std::uint64_t master_seed = 1;
        int threads = 1;
        PathGainModel gain = PathGainModel::free_space;
        ApertureCheck aperture = ApertureCheck::enforce;
    };

    /// Monte-Carlo over drops; every algorithm sees the same channel in a given drop.
    /// Results do not depend on the thread count.
    std::vector<AlgorithmSummary> run_experiment(const ExperimentSetup &setup);

    /// Builds one drop exactly as run_experiment does.
    ChannelRealization realize_drop(const ExperimentSetup &setup, std::uint64_t drop, std::uint64_t *ao_seed = nullptr);
}

#endif
