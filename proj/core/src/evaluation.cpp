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

#include "wsabf/evaluation.hpp"

#include "wsabf/errors.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace wsabf
{
    namespace
    {
        // N_s x (U N_s) matrix W_u^H H_u F diag(P).
        CMatrix received_streams(const CMatrix &Hu, const CMatrix &Wu, const CMatrix &FP)
        {
            return Wu.adjoint() * (Hu * FP);
        }

        double log2_abs_det(const CMatrix &m)
        {
            Eigen::PartialPivLU<CMatrix> lu(m);
            const CMatrix &lu_m = lu.matrixLU();
            double acc = 0.0;
            for (Eigen::Index i = 0; i < lu_m.rows(); ++i)
                acc += std::log2(std::abs(lu_m(i, i)));
            return acc;
        }
    }

    UserRate user_se(const std::vector<CMatrix> &H, const BeamformerSet &bf, int user, double noise_power)
    {
        if (user < 0 || user >= static_cast<int>(H.size()) || user >= bf.num_users())
            throw ConfigError("user index out of range");
        const auto u = static_cast<std::size_t>(user);
        const int Ns = bf.streams_per_user;
        const CMatrix W = bf.W_RF[u] * bf.W_BB[u];
        const CMatrix T = received_streams(H[u], W, bf.effective_precoder());

        const CMatrix own = T.middleCols(static_cast<Eigen::Index>(user) * Ns, Ns);
        CMatrix R = noise_power * W.adjoint() * W;
        for (int v = 0; v < bf.num_users(); ++v)
            if (v != user)
            {
                const auto Tv = T.middleCols(static_cast<Eigen::Index>(v) * Ns, Ns);
                R += Tv * Tv.adjoint();
            }
        const CMatrix S = own * own.adjoint();

        UserRate out;
        bool ok_r = false, ok_sum = false;
        const double ld_r = log2_det_hpd(R, &ok_r);
        const double ld_sum = log2_det_hpd(R + S, &ok_sum);
        if (ok_r && ok_sum)
        {
            out.se = std::max(0.0, ld_sum - ld_r);
            return out;
        }
        // Singular covariance (e.g. a zero combiner column): fall back to the pseudo-inverse.
        out.pseudo_inverse = true;
        const Eigen::Index n = R.rows();
        const CMatrix Rp = R.completeOrthogonalDecomposition().pseudoInverse();
        out.se = std::max(0.0, log2_abs_det(CMatrix::Identity(n, n) + Rp * S));
        return out;
    }

    EvaluationReport evaluate(const std::vector<CMatrix> &H, const BeamformerSet &bf, double noise_power)
    {
        EvaluationReport rep;
        for (int u = 0; u < bf.num_users(); ++u)
        {
            const UserRate r = user_se(H, bf, u, noise_power);
            rep.per_user.push_back(r.se);
            rep.sum_se += r.se;
            rep.pseudo_inverse_users += r.pseudo_inverse ? 1 : 0;
        }
        return rep;
    }

    double residual_interference(const std::vector<CMatrix> &H, const BeamformerSet &bf)
    {
        const int Ns = bf.streams_per_user;
        const CMatrix F = bf.F_RF * bf.F_BB;
        double worst = 0.0;
        for (int u = 0; u < bf.num_users(); ++u)
        {
            const auto su = static_cast<std::size_t>(u);
            const CMatrix T = received_streams(H[su], bf.W_RF[su] * bf.W_BB[su], F);
            const double own = T.middleCols(static_cast<Eigen::Index>(u) * Ns, Ns).norm();
            for (int v = 0; v < bf.num_users(); ++v)
            {
                if (v == u)
                    continue;
                const double leak = T.middleCols(static_cast<Eigen::Index>(v) * Ns, Ns).norm();
                if (own > 0.0)
                    worst = std::max(worst, leak / own);
            }
        }
        return worst;
    }

    BeamPatternSpec make_pattern_grid(double az_lo, double az_hi, int n_az, double r_lo, double r_hi, int n_r,
                                      const Point3 &apex)
    {
        if (n_az < 1 || n_r < 1 || !(r_lo > 0.0) || r_hi < r_lo || az_hi < az_lo)
            throw ConfigError("invalid beam-pattern grid");
        BeamPatternSpec s;
        s.apex = apex;
        for (int i = 0; i < n_az; ++i)
            s.azimuths_rad.push_back(n_az == 1 ? az_lo : az_lo + (az_hi - az_lo) * i / (n_az - 1.0));
        for (int i = 0; i < n_r; ++i)
            s.ranges_m.push_back(n_r == 1 ? r_lo : r_lo * std::pow(r_hi / r_lo, i / (n_r - 1.0)));
        return s;
    }

    BeamPatternGrid beam_pattern(const ArrayGeometry &geometry, const CMatrix &precoder, double wavelength,
                                 const BeamPatternSpec &spec)
    {
        if (precoder.rows() != geometry.num_antennas())
            throw AssemblyError("precoder rows must match the number of antennas");
        const double k = 2.0 * std::numbers::pi / wavelength;
        BeamPatternGrid g;
        g.azimuths_rad = spec.azimuths_rad;
        g.ranges_m = spec.ranges_m;
        g.gain = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.azimuths_rad.size()),
                                       static_cast<Eigen::Index>(spec.ranges_m.size()));
        const auto &ant = geometry.antenna_positions;
        Eigen::RowVectorXcd b(static_cast<Eigen::Index>(ant.size()));
        for (std::size_t i = 0; i < spec.azimuths_rad.size(); ++i)
            for (std::size_t j = 0; j < spec.ranges_m.size(); ++j)
            {
                const double az = spec.azimuths_rad[i];
                const double r = spec.ranges_m[j];
                const Point3 p = spec.apex + Point3(r * std::sin(az), r * std::cos(az), 0.0);
                for (std::size_t n = 0; n < ant.size(); ++n)
                    b(static_cast<Eigen::Index>(n)) = std::polar(1.0, -k * (p - ant[n]).norm());
                g.gain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (b * precoder).squaredNorm();
            }
        g.peak = g.gain.size() ? g.gain.maxCoeff() : 0.0;
        if (g.peak > 0.0)
            g.gain /= g.peak;
        return g;
    }

    void write_beam_pattern(std::ostream &os, const BeamPatternGrid &grid)
    {
        const auto prec = os.precision();
        os << "az_rad,range_m,gain_norm\n" << std::setprecision(9);
        for (std::size_t i = 0; i < grid.azimuths_rad.size(); ++i)
            for (std::size_t j = 0; j < grid.ranges_m.size(); ++j)
                os << grid.azimuths_rad[i] << ',' << grid.ranges_m[j] << ','
                   << grid.gain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
        os.precision(prec);
    }

    std::string algorithm_name(Algorithm a)
    {
        switch (a)
        {
        case Algorithm::ao_sc:
            return "ao-sc";
        case Algorithm::svr_fc:
            return "svr-fc";
        case Algorithm::svd_phase_fc:
            return "svd-phase-fc";
        case Algorithm::fully_digital:
            return "fully-digital";
        case Algorithm::capacity_ub:
            return "capacity-ub";
        }
        return "unknown";
    }

    Algorithm parse_algorithm(const std::string &name)
    {
        for (Algorithm a : {Algorithm::ao_sc, Algorithm::svr_fc, Algorithm::svd_phase_fc, Algorithm::fully_digital,
                            Algorithm::capacity_ub})
            if (algorithm_name(a) == name)
                return a;
        throw ConfigError("unknown algorithm '" + name + "'");
    }

    AlgorithmRun run_algorithm(Algorithm algorithm, const ChannelRealization &rz, std::uint64_t ao_seed)
    {
        using clock = std::chrono::steady_clock;
        const auto seconds = [](clock::time_point a, clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };
        AlgorithmRun run;
        const auto t0 = clock::now();
        AnalogStage analog;
        switch (algorithm)
        {
        case Algorithm::ao_sc: {
            AoOptions o;
            o.seed = ao_seed;
            AoResult r = ao_analog_subconnected(rz.H, rz.config, o);
            run.ao_iterations = r.iterations;
            analog = std::move(r.analog);
            break;
        }
        case Algorithm::svr_fc:
            analog = svr_analog(rz.geometry, rz.config, rz.users.positions);
            break;
        case Algorithm::svd_phase_fc:
            analog = svd_phase_analog(rz.H, rz.config);
            break;
        case Algorithm::fully_digital:
            run.beamformers = fully_digital_precoders(rz.H, rz.config);
            run.digital_seconds = seconds(t0, clock::now());
            return run;
        case Algorithm::capacity_ub:
            run.beamformers = capacity_upper_bound_precoders(rz.H, rz.config);
            run.digital_seconds = seconds(t0, clock::now());
            return run;
        }
        const auto t1 = clock::now();
        run.beamformers = complete_digital_stage(rz.H, analog, rz.config);
        run.analog_seconds = seconds(t0, t1);
        run.digital_seconds = seconds(t1, clock::now());
        return run;
    }

    ChannelRealization realize_drop(const ExperimentSetup &setup, std::uint64_t drop, std::uint64_t *ao_seed)
    {
        auto rng = drop_rng(setup.master_seed, drop);
        const Scenario sc = generate_scenario(setup.config, setup.placement, rng);
        if (ao_seed)
            *ao_seed = rng();
        const ArrayGeometry g = build_wsa_geometry(setup.config, setup.aperture);
        ChannelRealization rz = realize_channels(sc, g, setup.config, setup.gain);
        rz.rng_seed = setup.master_seed;
        return rz;
    }

    std::vector<AlgorithmSummary> run_experiment(const ExperimentSetup &setup)
    {
        if (setup.drops < 1)
            throw ConfigError("number of drops must be positive");
        if (setup.algorithms.empty())
            throw ConfigError("at least one algorithm is required");
        require_valid(setup.config);
        // Fail fast on geometry errors before spawning work.
        (void)build_wsa_geometry(setup.config, setup.aperture);

        const std::size_t A = setup.algorithms.size();
        const auto D = static_cast<std::size_t>(setup.drops);
        std::vector<std::vector<DropOutcome>> table(A, std::vector<DropOutcome>(D));

        auto work = [&](std::size_t d) {
            std::uint64_t seed = 0;
            ChannelRealization rz;
            std::string setup_error;
            try
            {
                rz = realize_drop(setup, d, &seed);
            }
            catch (const std::exception &e)
            {
                setup_error = e.what();
            }
            for (std::size_t a = 0; a < A; ++a)
            {
                DropOutcome &o = table[a][d];
                o.drop = d;
                if (!setup_error.empty())
                {
                    o.error = setup_error;
                    continue;
                }
                try
                {
                    const AlgorithmRun run = run_algorithm(setup.algorithms[a], rz, seed);
                    const EvaluationReport rep = evaluate(rz.H, run.beamformers, setup.config.noise_power_w);
                    o.ok = std::isfinite(rep.sum_se);
                    if (!o.ok)
                        o.error = "non-finite spectral efficiency";
                    o.sum_se = rep.sum_se;
                    o.per_user = rep.per_user;
                    o.analog_seconds = run.analog_seconds;
                    o.digital_seconds = run.digital_seconds;
                }
                catch (const std::exception &e)
                {
                    o.error = e.what();
                }
            }
        };

        const int threads = std::max(1, std::min<int>(setup.threads, static_cast<int>(D)));
        if (threads == 1)
            for (std::size_t d = 0; d < D; ++d)
                work(d);
        else
        {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back([&]() {
                    for (std::size_t d = next++; d < D; d = next++)
                        work(d);
                });
            for (auto &t : pool)
                t.join();
        }

        std::vector<AlgorithmSummary> out;
        for (std::size_t a = 0; a < A; ++a)
        {
            AlgorithmSummary s;
            s.algorithm = setup.algorithms[a];
            s.drops = std::move(table[a]);
            int n = 0;
            double sum = 0.0, sum_a = 0.0, sum_d = 0.0;
            for (const auto &o : s.drops)
            {
                if (!o.ok)
                {
                    ++s.failures;
                    continue;
                }
                ++n;
                sum += o.sum_se;
                sum_a += o.analog_seconds;
                sum_d += o.digital_seconds;
            }
            if (n > 0)
            {
                s.mean = sum / n;
                s.mean_analog_seconds = sum_a / n;
                s.mean_digital_seconds = sum_d / n;
                double ss = 0.0;
                for (const auto &o : s.drops)
                    if (o.ok)
                        ss += (o.sum_se - s.mean) * (o.sum_se - s.mean);
                s.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
            }
            out.push_back(std::move(s));
        }
        return out;
    }
}
