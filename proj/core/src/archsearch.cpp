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

#include "wsabf/archsearch.hpp"

#include "wsabf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace wsabf
{
    LosCapacity los_capacity(const CMatrix &H, double total_power, double noise_power, int fixed_rank)
    {
        if (total_power < 0.0)
            throw ConfigError("total power must be non-negative");
        if (!(noise_power > 0.0))
            throw ConfigError("noise power must be positive");
        if (fixed_rank < 0)
            throw ConfigError("fixed rank must be non-negative");
        LosCapacity out;
        if (H.size() == 0 || H.cwiseAbs().maxCoeff() == 0.0)
        {
            out.zero_channel = true;
            return out;
        }
        const RVector s = svd(H).s;
        const int r = fixed_rank > 0 ? fixed_rank : numerical_rank(s);
        out.streams = r;
        if (total_power == 0.0)
            return out;
        auto equal_power = [&](int n) {
            double bits = 0.0;
            for (int i = 0; i < std::min<int>(n, static_cast<int>(s.size())); ++i)
                bits += std::log2(1.0 + total_power / n * s(i) * s(i) / noise_power);
            return bits;
        };
        if (fixed_rank > 0)
        {
            out.bits = equal_power(r);
            return out;
        }
        // Modes far below the dominant one would only dilute the power, so the
        // transmitter uses the best number of equally powered top modes.
        for (int n = 1; n <= r; ++n)
            if (const double b = equal_power(n); b > out.bits)
            {
                out.bits = b;
                out.streams = n;
            }
        return out;
    }

    double gram_deviation(const CMatrix &A)
    {
        const auto K = static_cast<double>(A.cols());
        const CMatrix g = A * A.adjoint() - K * CMatrix::Identity(A.rows(), A.rows());
        return g.squaredNorm();
    }

    CMatrix receive_response_matrix(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user)
    {
        const int nr = isqrt_exact(config.num_rx_antennas);
        const auto g = subarray_user_geometry(geometry, user);
        CMatrix A(config.num_rx_antennas, static_cast<Eigen::Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k)
            A.col(static_cast<Eigen::Index>(k)) =
                upa_array_response(nr, nr, g[k].ux, g[k].uz, config.wavelength(), config.wavelength() / 2.0);
        return A;
    }

    CMatrix los_channel(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                        PathGainModel model)
    {
        return assemble_cnff_channel({make_los_path(geometry, config, user, model)}, geometry, config);
    }

    double max_phase_spread(const std::vector<SubarrayUserGeometry> &subarrays, int rx_side, double wavelength,
                            double rx_spacing)
    {
        const double c = 2.0 * std::numbers::pi / wavelength * rx_spacing;
        const int m = rx_side - 1;
        double best = 0.0;
        for (int d1 = -m; d1 <= m; ++d1)
            for (int d2 = -m; d2 <= m; ++d2)
            {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (const auto &g : subarrays)
                {
                    const double b = c * (d1 * g.ux + d2 * g.uz);
                    lo = std::min(lo, b);
                    hi = std::max(hi, b);
                }
                best = std::max(best, hi - lo);
            }
        return best;
    }

    double distance_threshold(int num_rx_antennas, double aperture)
    {
        return 2.0 * std::numbers::sqrt2 * (std::sqrt(static_cast<double>(num_rx_antennas)) - 1.0) * aperture;
    }

    std::vector<double> log_grid(double lo, double hi, int n)
    {
        if (n < 1 || !(lo > 0.0) || hi < lo)
            throw ConfigError("log grid needs n >= 1 and 0 < lo <= hi");
        std::vector<double> g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        g.back() = hi;
        return g;
    }

    namespace
    {
        struct LosSummary
        {
            double capacity = 0.0;
            double gram = 0.0;
            double min_distance = 0.0;
            double spread = 0.0;
        };

        LosSummary summarize(const ArrayGeometry &geometry, const SystemConfig &config,
                             const std::vector<Point3> &users, int fixed_rank, PathGainModel gain)
        {
            LosSummary s;
            s.min_distance = std::numeric_limits<double>::infinity();
            const int nr = isqrt_exact(config.num_rx_antennas);
            for (const auto &u : users)
            {
                const CMatrix H = los_channel(geometry, config, u, gain);
                s.capacity += los_capacity(H, config.total_power_w, config.noise_power_w, fixed_rank).bits;
                s.gram += gram_deviation(receive_response_matrix(geometry, config, u));
                const auto g = subarray_user_geometry(geometry, u);
                for (const auto &x : g)
                    s.min_distance = std::min(s.min_distance, x.distance);
                s.spread = std::max(s.spread, max_phase_spread(g, nr, config.wavelength(), config.wavelength() / 2.0));
            }
            if (!users.empty())
                s.capacity /= static_cast<double>(users.size());
            return s;
        }
    }

    TheoremDiagnostics theorem_guard(const SystemConfig &config, const std::vector<Point3> &users,
                                     const TheoremOptions &options)
    {
        if (users.empty())
            throw ConfigError("distance-condition diagnostics need at least one user");
        TheoremDiagnostics d;
        const ArrayGeometry geometry = build_wsa_geometry(config, ApertureCheck::ignore);
        const LosSummary s = summarize(geometry, config, users, options.fixed_rank, options.gain);
        d.tau = distance_threshold(config.num_rx_antennas, geometry.aperture);
        d.min_distance = s.min_distance;
        d.distance_condition = s.min_distance >= d.tau;
        d.max_phase_spread = s.spread;
        d.phase_bound_holds = s.spread <= std::numbers::pi + 1e-12;
        d.gram_deviation = s.gram;

        for (double ds : options.spacing_grid)
        {
            SystemConfig c = config;
            c.subarray_spacing_m = ds;
            const ArrayGeometry g = build_wsa_geometry(c, ApertureCheck::ignore);
            const LosSummary x = summarize(g, c, users, options.fixed_rank, options.gain);
            d.sweep.push_back({ds, g.aperture, x.capacity, x.gram,
                               x.min_distance >= distance_threshold(c.num_rx_antennas, g.aperture)});
        }
        for (std::size_t i = 1; i < d.sweep.size(); ++i)
        {
            const auto &a = d.sweep[i - 1];
            const auto &b = d.sweep[i];
            if (b.capacity < a.capacity * (1.0 - options.slack))
                d.capacity_monotone = false;
            if (b.gram_deviation > a.gram_deviation * (1.0 + options.slack) + 1e-9)
                d.gram_monotone = false;
        }
        return d;
    }

    ArchitectureSearch search_architecture(const SystemConfig &config, const std::vector<Point3> &users,
                                           const std::vector<int> &candidates, double tie_tolerance, int fixed_rank)
    {
        if (candidates.empty())
            throw ConfigError("architecture search needs at least one candidate K");
        if (users.empty())
            throw ConfigError("architecture search needs at least one user");
        std::vector<int> ks = candidates;
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        for (int K : ks)
            if (K < 1 || !is_perfect_square(K) || config.num_tx_antennas % K != 0 ||
                !is_perfect_square(config.num_tx_antennas / K))
                throw ConfigError("candidate K=" + std::to_string(K) + " must be a perfect square dividing N_t");

        ArchitectureSearch out;
        bool have_best = false;
        for (int K : ks)
        {
            ArchitectureCandidate c;
            c.num_subarrays = K;
            SystemConfig cfg = config;
            cfg.num_subarrays = K;
            if (K == 1)
                cfg.subarray_spacing_m = 0.0;
            else
            {
                cfg.subarray_spacing_m = max_subarray_spacing(K, cfg.num_tx_antennas, cfg.wavelength(),
                                                              cfg.aperture_limit_m, SpacingMode::geometric,
                                                              cfg.element_spacing());
                // Aperture cannot host K separated subarrays.
                if (cfg.subarray_spacing_m < cfg.element_spacing())
                {
                    c.subarray_spacing = cfg.subarray_spacing_m;
                    out.candidates.push_back(c);
                    continue;
                }
            }
            c.subarray_spacing = cfg.subarray_spacing_m;
            const ArrayGeometry g = build_wsa_geometry(cfg, ApertureCheck::ignore);
            c.aperture = g.aperture;
            c.feasible = c.aperture <= cfg.aperture_limit_m * (1.0 + 1e-9);
            if (c.feasible)
                c.capacity = summarize(g, cfg, users, fixed_rank, PathGainModel::free_space).capacity;
            out.candidates.push_back(c);
            if (!c.feasible)
                continue;
            if (!have_best || c.capacity > out.best.capacity * (1.0 + tie_tolerance))
            {
                out.best = c;
                have_best = true;
            }
        }
        if (!have_best)
            throw ConfigError("no candidate architecture fits the aperture limit");
        return out;
    }

    void write_search_report(std::ostream &os, const ArchitectureSearch &search)
    {
        const auto prec = os.precision();
        os << "K,d_s_m,aperture_m,capacity_bpsHz,feasible,selected\n" << std::setprecision(9);
        for (const auto &c : search.candidates)
            os << c.num_subarrays << ',' << c.subarray_spacing << ',' << c.aperture << ',' << c.capacity << ','
               << (c.feasible ? 1 : 0) << ',' << (c.num_subarrays == search.best.num_subarrays ? 1 : 0) << '\n';
        os.precision(prec);
    }
}
