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

#include "wsabf/config.hpp"

#include "wsabf/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wsabf
{
    double thermal_noise_power(double bandwidth_hz, double noise_figure_db)
    {
        return boltzmann * reference_temperature * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
    }

    double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

    double SystemConfig::wavenumber() const { return 2.0 * std::numbers::pi / wavelength(); }

    SystemConfig default_config()
    {
        SystemConfig c;
        c.carrier_frequency_hz = 300e9;
        c.bandwidth_hz = 5e9;
        c.num_tx_antennas = 1024;
        c.num_rx_antennas = 16;
        c.num_subarrays = 1;
        c.subarray_spacing_m = 0.0;
        c.num_users = 20;
        c.streams_per_user = 1;
        c.tx_rf_chains = 20;
        c.rx_rf_chains = 1;
        c.total_power_w = dbm_to_watts(20.0);
        c.noise_power_w = thermal_noise_power(c.bandwidth_hz);
        c.aperture_limit_m = 1.0;
        c.bs_height_m = 20.0;
        c.user_height_m = 20.0;
        c.num_paths = 2;
        return c;
    }

    bool is_perfect_square(long long n)
    {
        if (n < 0)
            return false;
        auto r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(n))));
        return r * r == n;
    }

    int isqrt_exact(long long n)
    {
        if (!is_perfect_square(n))
            throw ConfigError(std::to_string(n) + " is not a perfect square");
        return static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    }

    std::vector<std::string> check_config(const SystemConfig &c)
    {
        std::vector<std::string> findings;
        auto add = [&](std::string s) { findings.push_back(std::move(s)); };

        if (!(c.carrier_frequency_hz > 0.0))
            add("carrier_frequency must be positive (wavelength > 0)");
        if (!(c.bandwidth_hz > 0.0))
            add("bandwidth must be positive");
        if (c.num_tx_antennas < 1 || !is_perfect_square(c.num_tx_antennas))
            add("N_t must be a positive perfect square");
        if (c.num_rx_antennas < 1 || !is_perfect_square(c.num_rx_antennas))
            add("N_r must be a positive perfect square");
        if (c.num_subarrays < 1 || !is_perfect_square(c.num_subarrays) || c.num_subarrays > c.num_tx_antennas ||
            c.num_tx_antennas % std::max(c.num_subarrays, 1) != 0)
            add("K must be a perfect square dividing N_t");
        else if (c.num_tx_antennas >= 1 && is_perfect_square(c.num_tx_antennas / c.num_subarrays) == false)
            add("N_t / K must be a perfect square (square subarrays)");
        if (c.num_users < 1)
            add("U must be at least 1");
        if (c.streams_per_user < 1)
            add("N_s must be at least 1");
        if (c.num_users * c.streams_per_user != c.tx_rf_chains)
            add("U*N_s must equal L_t (full-multiplexing assumption U*N_s = L_t = U*L_r)");
        if (c.streams_per_user > c.rx_rf_chains)
            add("N_s must not exceed L_r");
        if (c.rx_rf_chains > c.num_rx_antennas)
            add("L_r must not exceed N_r");
        if (c.tx_rf_chains > c.num_tx_antennas)
            add("L_t must not exceed N_t");
        if (!(c.total_power_w > 0.0))
            add("total power P_t must be positive");
        if (!(c.noise_power_w > 0.0))
            add("noise power must be positive");
        if (!(c.subarray_spacing_m >= 0.0))
            add("subarray spacing d_s must be non-negative");
        if (!(c.aperture_limit_m > 0.0))
            add("aperture limit S_t_max must be positive");
        if (c.element_spacing_m && !(*c.element_spacing_m > 0.0))
            add("element spacing d_a must be positive");
        if (c.num_paths < 1)
            add("number of paths N_p must be at least 1");
        if (c.num_subarrays > 1 && c.carrier_frequency_hz > 0.0 &&
            c.subarray_spacing_m < c.element_spacing() * (1.0 - 1e-12))
            add("subarray spacing d_s must be at least the element spacing d_a when K > 1");
        return findings;
    }

    void require_valid(const SystemConfig &config)
    {
        auto findings = check_config(config);
        if (findings.empty())
            return;
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto &f : findings)
            os << "\n  - " << f;
        throw ConfigError(os.str());
    }

    ApertureError::ApertureError(double aperture_m, double limit_m)
        : std::runtime_error("array aperture " + std::to_string(aperture_m) + " m exceeds the limit " +
                             std::to_string(limit_m) + " m"),
          aperture_(aperture_m), limit_(limit_m)
    {
    }

    RankDeficiencyError::RankDeficiencyError(int user, int null_dim, int streams)
        : std::runtime_error("block diagonalization: user " + std::to_string(user) + " has a null space of dimension " +
                             std::to_string(null_dim) + " < " + std::to_string(streams) + " streams"),
          user_(user)
    {
    }
}
