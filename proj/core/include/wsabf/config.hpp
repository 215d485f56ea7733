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

#ifndef WSABF_CONFIG_HPP
#define WSABF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wsabf
{
    inline constexpr double speed_of_light = 299792458.0;   // m/s
    inline constexpr double boltzmann = 1.380649e-23;       // J/K
    inline constexpr double reference_temperature = 290.0;  // K

    /// Thermal noise floor k*T*B scaled by the receiver noise figure, in watts.
    double thermal_noise_power(double bandwidth_hz, double noise_figure_db = 0.0);

    double dbm_to_watts(double dbm);
    double watts_to_dbm(double watts);

    /// All scalar link parameters. The core works in SI units (watts, meters, Hz).
    struct SystemConfig
    {
        double carrier_frequency_hz = 300e9;
        double bandwidth_hz = 5e9;
        int num_tx_antennas = 1024;
        int num_rx_antennas = 16;
        int num_subarrays = 1;
        double subarray_spacing_m = 0.0;
        std::optional<double> element_spacing_m; // defaults to half a wavelength
        int num_users = 20;
        int streams_per_user = 1;
        int tx_rf_chains = 20;
        int rx_rf_chains = 1;
        double total_power_w = 0.1;
        double noise_power_w = thermal_noise_power(5e9);
        double aperture_limit_m = 1.0;
        double bs_height_m = 20.0;
        double user_height_m = 20.0; // equal to bs_height_m for the 2-D scenario
        int num_paths = 2;
        std::uint64_t rng_seed = 1;

        double wavelength() const { return speed_of_light / carrier_frequency_hz; }
        double element_spacing() const { return element_spacing_m.value_or(wavelength() / 2.0); }
        double wavenumber() const;
        bool is_2d() const { return user_height_m == bs_height_m; }
    };

    /// Simulation defaults: 300 GHz, 5 GHz bandwidth, N_t = 1024, N_r = 16, U = 20,
    /// L_t = 20, L_r = N_s = 1, two paths, 1 m aperture limit, 20 dBm, thermal noise.
    SystemConfig default_config();

    /// Every violated invariant as a human-readable finding; empty means valid.
    std::vector<std::string> check_config(const SystemConfig &config);

    /// Throws ConfigError listing all findings when check_config is non-empty.
    void require_valid(const SystemConfig &config);

    bool is_perfect_square(long long n);
    int isqrt_exact(long long n); // throws ConfigError when n is not a perfect square
}

#endif
