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

#include "runner.hpp"

#include "wsabf/archsearch.hpp"
#include "wsabf/beamforming.hpp"
#include "wsabf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace wsabf::cli
{
    std::string fmt(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    }

    namespace
    {
        namespace fs = std::filesystem;

        class CsvFile
        {
        public:
            CsvFile(const fs::path &path, RunOutcome &outcome) : path_(path)
            {
                std::error_code ec;
                if (path.has_parent_path())
                    fs::create_directories(path.parent_path(), ec);
                out_.open(path);
                if (!out_)
                    throw SpecError("experiment.output_dir: cannot write '" + path.string() + "'");
                outcome.files.push_back(path);
            }
            std::ofstream &stream() { return out_; }
            template <typename T> CsvFile &operator<<(const T &v)
            {
                out_ << v;
                return *this;
            }

        private:
            fs::path path_;
            std::ofstream out_;
        };

        fs::path output_path(const ExperimentSpec &spec, const std::string &suffix = "")
        {
            return spec.output_dir / (spec.name + suffix + ".csv");
        }

        std::vector<Point3> scenario_users(const ExperimentSpec &spec, const SystemConfig &config)
        {
            auto rng = drop_rng(spec.seed, 0);
            return generate_scenario(config, spec.placement, rng).users.positions;
        }

        std::vector<int> architectures(const ExperimentSpec &spec)
        {
            if (spec.subarray_candidates.empty())
                return {spec.config.num_subarrays};
            return spec.subarray_candidates;
        }

        SystemConfig with_subarrays(const ExperimentSpec &spec, SystemConfig c, int K)
        {
            c.num_subarrays = K;
            if (K > 1 && !spec.spacing_at_max && K != spec.config.num_subarrays)
            {
                // A K other than the base one has no configured spacing; use its maximum.
                ExperimentSpec tmp = spec;
                tmp.spacing_at_max = true;
                return resolved_config(tmp, c);
            }
            return resolved_config(spec, c);
        }

        ExperimentSetup setup_for(const ExperimentSpec &spec, const SystemConfig &config)
        {
            ExperimentSetup s;
            s.config = config;
            s.placement = spec.placement;
            s.algorithms = spec.algorithms;
            s.drops = spec.drops;
            s.master_seed = spec.seed;
            s.threads = spec.threads;
            s.gain = spec.gain;
            return s;
        }

        void write_drops(CsvFile &drops, const std::string &axis, int K, const AlgorithmSummary &s)
        {
            for (const auto &d : s.drops)
                drops << axis << ',' << K << ',' << algorithm_name(s.algorithm) << ',' << d.drop << ','
                      << (d.ok ? 1 : 0) << ',' << fmt(d.ok ? d.sum_se : 0.0) << '\n';
        }

        // Shared body of the power, antenna, user and distance sweeps.
        template <typename ConfigureFn>
        void monte_carlo_sweep(const ExperimentSpec &spec, const std::string &axis_name, ConfigureFn configure,
                               RunOutcome &outcome, std::ostream &log)
        {
            CsvFile summary(output_path(spec), outcome);
            CsvFile drops(output_path(spec, "_drops"), outcome);
            summary << axis_name << ",K,algo,mean_sumSE,std_sumSE,failed_drops,drops\n";
            drops << axis_name << ",K,algo,drop,ok,sumSE\n";
            for (double v : spec.values)
                for (int K : architectures(spec))
                {
                    ExperimentSetup setup = configure(v, K);
                    const auto results = run_experiment(setup);
                    log << axis_name << '=' << fmt(v) << " K=" << K;
                    for (const auto &r : results)
                    {
                        summary << fmt(v) << ',' << K << ',' << algorithm_name(r.algorithm) << ',' << fmt(r.mean)
                                << ',' << fmt(r.stddev) << ',' << r.failures << ',' << r.drops.size() << '\n';
                        write_drops(drops, fmt(v), K, r);
                        outcome.failed_drops += r.failures;
                        log << ' ' << algorithm_name(r.algorithm) << '=' << fmt(r.mean);
                        if (r.failures)
                            log << " (" << r.failures << " failed)";
                    }
                    log << '\n';
                }
        }

        void run_ds_sweep(const ExperimentSpec &spec, RunOutcome &outcome, std::ostream &log)
        {
            CsvFile csv(output_path(spec), outcome);
            csv << "K,d_s_m,d_s_lambda,aperture_m,capacity_bpsHz,gram_deviation,distance_condition,feasible\n";
            SystemConfig base = spec.config;
            base.num_subarrays = 1;
            base.subarray_spacing_m = 0.0;
            const auto users = scenario_users(spec, base);
            const double lambda = base.wavelength();
            for (int K : spec.subarray_candidates)
            {
                SystemConfig c = base;
                c.num_subarrays = K;
                double hi = spec.ds_max_lambda * lambda;
                if (spec.ds_to_max && K > 1)
                    hi = max_subarray_spacing(K, c.num_tx_antennas, lambda, c.aperture_limit_m,
                                              SpacingMode::geometric, c.element_spacing());
                const double lo = std::min(spec.ds_min_lambda * lambda, hi);
                TheoremOptions o;
                o.spacing_grid = log_grid(lo, hi, spec.ds_points);
                o.fixed_rank = spec.fixed_rank;
                o.gain = spec.gain;
                c.subarray_spacing_m = o.spacing_grid.front();
                const TheoremDiagnostics d = theorem_guard(c, users, o);
                for (const auto &s : d.sweep)
                    csv << K << ',' << fmt(s.subarray_spacing) << ',' << fmt(s.subarray_spacing / lambda) << ','
                        << fmt(s.aperture) << ',' << fmt(s.capacity) << ',' << fmt(s.gram_deviation) << ','
                        << (s.distance_condition ? 1 : 0) << ',' << (s.aperture <= c.aperture_limit_m ? 1 : 0)
                        << '\n';
                log << "K=" << K << " capacity " << fmt(d.sweep.front().capacity) << " -> "
                    << fmt(d.sweep.back().capacity) << " bits/s/Hz over d_s " << fmt(lo / lambda) << ".."
                    << fmt(hi / lambda) << " lambda" << (d.capacity_monotone ? "" : " (not monotone)") << '\n';
            }
        }

        void run_arch_search(const ExperimentSpec &spec, RunOutcome &outcome, std::ostream &log)
        {
            SystemConfig base = spec.config;
            base.num_subarrays = 1;
            base.subarray_spacing_m = 0.0;
            const auto users = scenario_users(spec, base);
            const ArchitectureSearch s =
                search_architecture(base, users, spec.subarray_candidates, spec.tie_tolerance, spec.fixed_rank);
            CsvFile csv(output_path(spec), outcome);
            csv << "K,d_s_m,aperture_m,capacity_bpsHz,feasible,selected\n";
            for (const auto &c : s.candidates)
            {
                csv << c.num_subarrays << ',' << fmt(c.subarray_spacing) << ',' << fmt(c.aperture) << ','
                    << fmt(c.capacity) << ',' << (c.feasible ? 1 : 0) << ','
                    << (c.num_subarrays == s.best.num_subarrays ? 1 : 0) << '\n';
                log << "K=" << c.num_subarrays << " d_s=" << fmt(c.subarray_spacing) << " m capacity "
                    << fmt(c.capacity) << (c.feasible ? "" : " (infeasible)") << '\n';
            }
            log << "selected K=" << s.best.num_subarrays << " d_s=" << fmt(s.best.subarray_spacing) << " m\n";
        }

        std::vector<double> line_ranges(double r, double spread, int users)
        {
            std::vector<double> out;
            for (int u = 0; u < users; ++u)
                out.push_back(users == 1 ? r : r * (1.0 + spread * u / (users - 1.0)));
            return out;
        }

        void run_beampattern(const ExperimentSpec &spec, RunOutcome &outcome, std::ostream &log)
        {
            const double pi = std::numbers::pi;
            for (int K : architectures(spec))
            {
                const SystemConfig c = with_subarrays(spec, spec.config, K);
                const ArrayGeometry g = build_wsa_geometry(c);
                const auto users = scenario_users(spec, c);
                const AnalogStage st = svr_analog(g, c, users);
                const CMatrix beams = st.F_RF.leftCols(static_cast<Eigen::Index>(users.size()));
                const BeamPatternSpec grid =
                    make_pattern_grid(-pi / 2.0, pi / 2.0, spec.pattern_azimuths, spec.pattern_r_min,
                                      spec.pattern_r_max, spec.pattern_ranges, Point3(0.0, 0.0, c.user_height_m));
                const BeamPatternGrid bp = beam_pattern(g, beams, c.wavelength(), grid);
                CsvFile csv(output_path(spec, "_K" + std::to_string(K)), outcome);
                write_beam_pattern(csv.stream(), bp);
                log << "K=" << K << " aperture " << fmt(g.aperture) << " m, " << users.size()
                    << " focused beams, grid " << bp.azimuths_rad.size() << "x" << bp.ranges_m.size() << '\n';
            }
        }

        void run_bench_timing(const ExperimentSpec &spec, RunOutcome &outcome, std::ostream &log)
        {
            const SystemConfig c = resolved_config(spec, spec.config);
            const auto results = run_experiment(setup_for(spec, c));
            // Wall-clock values differ between runs by nature; only this file is exempt
            // from byte-identical reruns.
            CsvFile csv(output_path(spec), outcome);
            csv << "algo,mean_analog_s,mean_digital_s,failed_drops,drops\n";
            for (const auto &r : results)
            {
                csv << algorithm_name(r.algorithm) << ',' << fmt(r.mean_analog_seconds) << ','
                    << fmt(r.mean_digital_seconds) << ',' << r.failures << ',' << r.drops.size() << '\n';
                outcome.failed_drops += r.failures;
                log << algorithm_name(r.algorithm) << " analog " << fmt(r.mean_analog_seconds) << " s digital "
                    << fmt(r.mean_digital_seconds) << " s\n";
            }
        }
    }

    RunOutcome run_spec(const ExperimentSpec &spec, std::ostream &log)
    {
        const auto findings = validate_spec(spec);
        if (!findings.empty())
        {
            std::ostringstream os;
            os << "invalid spec:";
            for (const auto &f : findings)
                os << "\n  - " << f;
            throw SpecError(os.str());
        }

        RunOutcome outcome;
        switch (spec.kind)
        {
        case ExperimentKind::ds_sweep:
            run_ds_sweep(spec, outcome, log);
            break;
        case ExperimentKind::arch_search:
            run_arch_search(spec, outcome, log);
            break;
        case ExperimentKind::power_sweep:
            monte_carlo_sweep(
                spec, "power_dBm",
                [&](double dbm, int K) {
                    SystemConfig c = with_subarrays(spec, spec.config, K);
                    c.total_power_w = dbm_to_watts(dbm);
                    return setup_for(spec, c);
                },
                outcome, log);
            break;
        case ExperimentKind::antenna_sweep:
            monte_carlo_sweep(
                spec, "tx_antennas",
                [&](double nt, int K) {
                    SystemConfig c = spec.config;
                    c.num_tx_antennas = static_cast<int>(nt);
                    return setup_for(spec, with_subarrays(spec, c, K));
                },
                outcome, log);
            break;
        case ExperimentKind::user_sweep:
            monte_carlo_sweep(
                spec, "users",
                [&](double u, int K) {
                    SystemConfig c = spec.config;
                    c.num_users = static_cast<int>(u);
                    c.tx_rf_chains = c.num_users * c.streams_per_user;
                    return setup_for(spec, with_subarrays(spec, c, K));
                },
                outcome, log);
            break;
        case ExperimentKind::distance_sweep:
            monte_carlo_sweep(
                spec, "range_m",
                [&](double r, int K) {
                    ExperimentSetup s = setup_for(spec, with_subarrays(spec, spec.config, K));
                    s.placement.ranges = line_ranges(r, spec.range_spread, s.config.num_users);
                    return s;
                },
                outcome, log);
            break;
        case ExperimentKind::beampattern:
            run_beampattern(spec, outcome, log);
            break;
        case ExperimentKind::bench_timing:
            run_bench_timing(spec, outcome, log);
            break;
        }
        return outcome;
    }

    void write_spec_geometry(const ExperimentSpec &spec, std::ostream &os)
    {
        write_geometry_table(os, build_wsa_geometry(resolved_config(spec, spec.config)));
    }
}
