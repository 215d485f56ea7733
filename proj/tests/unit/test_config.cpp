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

#include <gtest/gtest.h>

#include <algorithm>

using namespace wsabf;

namespace
{
    bool has_finding(const std::vector<std::string> &f, const std::string &needle)
    {
        return std::any_of(f.begin(), f.end(), [&](const std::string &s) { return s.find(needle) != std::string::npos; });
    }
}

TEST(Config, DefaultsValidate) { EXPECT_TRUE(check_config(default_config()).empty()); }

TEST(Config, NonSquareSubarrayCountIsReported)
{
    SystemConfig c = default_config();
    c.num_subarrays = 3;
    EXPECT_TRUE(has_finding(check_config(c), "K must be a perfect square dividing N_t"));
    EXPECT_THROW(require_valid(c), ConfigError);
}

TEST(Config, MultiplexingAssumptionIsReported)
{
    SystemConfig c = default_config();
    c.tx_rf_chains = 21;
    EXPECT_TRUE(has_finding(check_config(c), "U*N_s must equal L_t"));
}

TEST(Config, EveryViolationIsListed)
{
    SystemConfig c = default_config();
    c.num_tx_antennas = 1000;
    c.total_power_w = 0.0;
    c.noise_power_w = -1.0;
    c.aperture_limit_m = 0.0;
    const auto f = check_config(c);
    EXPECT_TRUE(has_finding(f, "N_t must be a positive perfect square"));
    EXPECT_TRUE(has_finding(f, "total power"));
    EXPECT_TRUE(has_finding(f, "noise power"));
    EXPECT_TRUE(has_finding(f, "aperture limit"));
}

TEST(Config, SpacingBelowElementSpacingIsRejectedForWsa)
{
    SystemConfig c = default_config();
    c.num_subarrays = 4;
    c.subarray_spacing_m = 0.2 * c.wavelength();
    EXPECT_TRUE(has_finding(check_config(c), "at least the element spacing"));
}

TEST(Config, PowerConversions)
{
    EXPECT_DOUBLE_EQ(dbm_to_watts(20.0), 0.1);
    EXPECT_NEAR(watts_to_dbm(1.0), 30.0, 1e-12);
    EXPECT_NEAR(thermal_noise_power(5e9), 1.380649e-23 * 290.0 * 5e9, 1e-30);
    EXPECT_NEAR(thermal_noise_power(1e9, 10.0), 10.0 * thermal_noise_power(1e9), 1e-25);
}

TEST(Config, IntegerSquareRoot)
{
    EXPECT_EQ(isqrt_exact(1024), 32);
    EXPECT_TRUE(is_perfect_square(0));
    EXPECT_FALSE(is_perfect_square(-4));
    EXPECT_THROW(isqrt_exact(1000), ConfigError);
}
