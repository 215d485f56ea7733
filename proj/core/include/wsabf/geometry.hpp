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

#ifndef WSABF_GEOMETRY_HPP
#define WSABF_GEOMETRY_HPP

#include "wsabf/config.hpp"

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

namespace wsabf
{
    using Point3 = Eigen::Vector3d;

    /// Base-station antenna layout on the x-z plane (y = 0).
    ///
    /// Antennas are indexed subarray-major; inside a subarray the index runs over x
    /// first, then z (index = row * n_x + column with rows along z). Subarrays follow
    /// the same order on the sqrt(K) x sqrt(K) reference grid. Every channel and
    /// precoder matrix in the library uses this ordering for its N_t dimension.
    struct ArrayGeometry
    {
        std::vector<Point3> antenna_positions;
        std::vector<Point3> subarray_references;
        int num_subarrays = 1;
        int grid_side = 1;      // sqrt(K)
        int subarray_side = 1;  // n_x = n_z = sqrt(N_t / K)
        double element_spacing = 0.0;
        double subarray_spacing = 0.0;
        double reference_pitch = 0.0; // d = (n_x - 1) d_a + d_s
        double side_length = 0.0;     // side of the bounding square
        double aperture = 0.0;        // sqrt(2) * side_length

        int num_antennas() const { return static_cast<int>(antenna_positions.size()); }
        int antennas_per_subarray() const { return subarray_side * subarray_side; }
        int subarray_of(int antenna) const { return antenna / antennas_per_subarray(); }
        /// (k_x, k_z) grid coordinates of subarray k, zero-based.
        std::pair<int, int> subarray_grid_index(int k) const { return {k % grid_side, k / grid_side}; }
        Point3 center() const;
    };

    enum class ApertureCheck
    {
        enforce,
        ignore,
    };

    /// Builds the K-subarray widely-spaced array (K = 1 gives the compact UPA).
    /// The first subarray reference sits at (0, 0, bs_height). Throws ConfigError on
    /// invalid K/N_t and ApertureError when the aperture exceeds the configured limit.
    ArrayGeometry build_wsa_geometry(const SystemConfig &config, ApertureCheck check = ApertureCheck::enforce);

    /// Geometry of one user seen from one subarray reference antenna.
    struct SubarrayUserGeometry
    {
        double distance = 0.0;  // D^{uk}
        double azimuth = 0.0;   // theta_t^{uk}
        double elevation = 0.0; // phi_t^{uk}
        double ux = 0.0;        // (x_u - x_k) / D^{uk}
        double uz = 0.0;        // (z_u - z_k) / D^{uk}
    };

    /// Builds the record from a reference point and a target point.
    SubarrayUserGeometry point_geometry(const Point3 &reference, const Point3 &target);

    /// One entry per subarray. Throws GeometryError if the user coincides with a reference.
    std::vector<SubarrayUserGeometry> subarray_user_geometry(const ArrayGeometry &geometry, const Point3 &user);

    struct TaylorDistance
    {
        double distance = 0.0;   // second-order approximation of D^{uk}
        double difference = 0.0; // D^{uk} - D^{u1}
        double psi = 0.0;
        bool in_domain = true;   // false when |psi| >= 1
    };

    /// Second-order expansion of the distance from subarray (k_x, k_z) to a user, given
    /// only the reference-subarray distance and direction cosines. Indices are one-based
    /// to match the (k_x - 1) d grid offsets.
    TaylorDistance taylor_distance(double reference_distance, int kx, int kz, double pitch, double ux, double uz);

    enum class SpacingMode
    {
        closed_form, // closed-form spacing, kept for comparison
        geometric,   // largest d_s whose built array meets the aperture limit exactly
    };

    /// Maximum subarray spacing under an aperture limit. Throws ConfigError for K = 1.
    double max_subarray_spacing(int num_subarrays, int num_tx_antennas, double wavelength, double aperture_limit,
                                SpacingMode mode = SpacingMode::geometric, double element_spacing = 0.0);

    inline double rayleigh_distance(double aperture, double wavelength) { return 2.0 * aperture * aperture / wavelength; }

    /// Smallest pairwise distance between antennas (O(N^2); for tests and diagnostics).
    double min_pairwise_distance(const ArrayGeometry &geometry);

    /// `antenna_index, subarray_index, x_m, y_m, z_m` rows, 12 significant digits.
    void write_geometry_table(std::ostream &os, const ArrayGeometry &geometry);
}

#endif
