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

#ifndef WSABF_TESTS_SUPPORT_HPP
#define WSABF_TESTS_SUPPORT_HPP

#include "wsabf/config.hpp"
#include "wsabf/linalg.hpp"

#include <random>

namespace wsabf::test
{
    // Config whose wavelength is exactly 1 mm, convenient for hand-checked numbers.
    inline SystemConfig millimeter_config()
    {
        SystemConfig c = default_config();
        c.carrier_frequency_hz = speed_of_light / 1e-3;
        return c;
    }

    inline SystemConfig small_config(int nt, int nr, int users, int K)
    {
        SystemConfig c = default_config();
        c.num_tx_antennas = nt;
        c.num_rx_antennas = nr;
        c.num_users = users;
        c.tx_rf_chains = users;
        c.num_subarrays = K;
        return c;
    }

    inline CMatrix random_matrix(int rows, int cols, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> n(0.0, 1.0);
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = cdouble(n(rng), n(rng));
        return m;
    }
}

#endif
