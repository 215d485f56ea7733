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

#include "wsabf/geometry.hpp"

#include "wsabf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace wsabf
{
    Point3 ArrayGeometry::center() const
    {
        Point3 sum = Point3::Zero();
        for (const auto &p : antenna_positions)
            sum += p;
        return antenna_positions.empty() ? sum : Point3(sum / static_cast<double>(antenna_positions.size()));
    }

    ArrayGeometry build_wsa_geometry(const SystemConfig &config, ApertureCheck check)
    {
        require_valid(config);

        ArrayGeometry g;
        g.num_subarrays = config.num_subarrays;
        g.grid_side = isqrt_exact(config.num_subarrays);
        g.subarray_side = isqrt_exact(config.num_tx_antennas / config.num_subarrays);
        g.element_spacing = config.element_spacing();
        g.subarray_spacing = g.num_subarrays > 1 ? config.subarray_spacing_m : 0.0;
        g.reference_pitch = (g.subarray_side - 1) * g.element_spacing + g.subarray_spacing;
        g.side_length = (g.grid_side - 1) * g.reference_pitch + (g.subarray_side - 1) * g.element_spacing;
        g.aperture = std::sqrt(2.0) * g.side_length;

        if (check == ApertureCheck::enforce && g.aperture > config.aperture_limit_m * (1.0 + 1e-12))
            throw ApertureError(g.aperture, config.aperture_limit_m);

        const double z0 = config.bs_height_m;
        g.subarray_references.reserve(static_cast<std::size_t>(g.num_subarrays));
        g.antenna_positions.reserve(static_cast<std::size_t>(config.num_tx_antennas));
        for (int k = 0; k < g.num_subarrays; ++k)
        {
            auto [kx, kz] = g.subarray_grid_index(k);
            Point3 ref(kx * g.reference_pitch, 0.0, z0 + kz * g.reference_pitch);
            g.subarray_references.push_back(ref);
            for (int n = 0; n < g.subarray_side; ++n)
                for (int m = 0; m < g.subarray_side; ++m)
                    g.antenna_positions.emplace_back(ref.x() + m * g.element_spacing, 0.0,
                                                     ref.z() + n * g.element_spacing);
        }
        return g;
    }

    SubarrayUserGeometry point_geometry(const Point3 &reference, const Point3 &target)
    {
        const Point3 delta = target - reference;
        const double dist = delta.norm();
        if (!(dist > 0.0))
            throw GeometryError("user coincides with a reference antenna");
        SubarrayUserGeometry s;
        s.distance = dist;
        s.ux = delta.x() / dist;
        s.uz = delta.z() / dist;
        s.azimuth = std::atan2(delta.x(), delta.y());
        s.elevation = std::asin(std::clamp(s.uz, -1.0, 1.0));
        return s;
    }

    std::vector<SubarrayUserGeometry> subarray_user_geometry(const ArrayGeometry &geometry, const Point3 &user)
    {
        std::vector<SubarrayUserGeometry> out;
        out.reserve(geometry.subarray_references.size());
        for (const auto &ref : geometry.subarray_references)
            out.push_back(point_geometry(ref, user));
        return out;
    }

    TaylorDistance taylor_distance(double reference_distance, int kx, int kz, double pitch, double ux, double uz)
    {
        if (!(reference_distance > 0.0))
            throw GeometryError("reference distance must be positive");
        if (pitch < 0.0)
            throw GeometryError("subarray pitch must be non-negative");

        const double dx = (kx - 1) * pitch;
        const double dz = (kz - 1) * pitch;
        const double r = reference_distance;
        TaylorDistance t;
        t.psi = -2.0 * (dx * ux + dz * uz) / r + (dx * dx + dz * dz) / (r * r);
        t.difference = r * (0.5 * t.psi - 0.125 * t.psi * t.psi);
        t.distance = r + t.difference;
        t.in_domain = std::abs(t.psi) < 1.0;
        return t;
    }

    double max_subarray_spacing(int num_subarrays, int num_tx_antennas, double wavelength, double aperture_limit,
                                SpacingMode mode, double element_spacing)
    {
        if (num_subarrays == 1)
            throw ConfigError("subarray spacing is undefined for a compact array (K = 1)");
        if (num_subarrays < 1 || !is_perfect_square(num_subarrays) || !is_perfect_square(num_tx_antennas) ||
            num_tx_antennas % num_subarrays != 0)
            throw ConfigError("K must be a perfect square dividing N_t");
        if (!(wavelength > 0.0) || !(aperture_limit > 0.0))
            throw ConfigError("wavelength and aperture limit must be positive");

        const double sk = std::sqrt(static_cast<double>(num_subarrays));
        const double sn = std::sqrt(static_cast<double>(num_tx_antennas));
        if (mode == SpacingMode::closed_form)
            return (std::sqrt(2.0) * aperture_limit + wavelength * (sn - sk)) / (2.0 * (sk - 1.0));

        // side = (sqrt(K) - 1) d_s + (sqrt(N_t) - sqrt(K)) d_a, aperture = sqrt(2) side
        const double da = element_spacing > 0.0 ? element_spacing : wavelength / 2.0;
        return (aperture_limit / std::sqrt(2.0) - (sn - sk) * da) / (sk - 1.0);
    }

    double min_pairwise_distance(const ArrayGeometry &geometry)
    {
        const auto &p = geometry.antenna_positions;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j)
                best = std::min(best, (p[i] - p[j]).norm());
        return best;
    }

    void write_geometry_table(std::ostream &os, const ArrayGeometry &geometry)
    {
        const auto flags = os.flags();
        const auto prec = os.precision();
        os << "antenna_index,subarray_index,x_m,y_m,z_m\n";
        os << std::setprecision(12);
        for (int i = 0; i < geometry.num_antennas(); ++i)
        {
            const auto &p = geometry.antenna_positions[static_cast<std::size_t>(i)];
            os << i << ',' << geometry.subarray_of(i) << ',' << p.x() << ',' << p.y() << ',' << p.z() << '\n';
        }
        os.flags(flags);
        os.precision(prec);
    }
}
