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

#ifndef WSABF_CHANNEL_HPP
#define WSABF_CHANNEL_HPP

#include "wsabf/config.hpp"
#include "wsabf/geometry.hpp"
#include "wsabf/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace wsabf
{
    /// UPA steering vector, entry (m, n) = exp(j 2pi/lambda d_a (m u_x + n u_z)),
    /// stored at index n * n_x + m. Unit modulus, no normalization.
    CVector upa_steering_vector(int nx, int nz, double ux, double uz, double wavelength, double spacing);

    /// Response of a UPA to a plane wave propagating along direction cosines (u_x, u_z).
    /// Equal to the steering vector evaluated at (-u_x, -u_z); with this sign the
    /// planar blocks agree with an exact spherical wavefront to first order.
    CVector upa_array_response(int nx, int nz, double ux, double uz, double wavelength, double spacing);

    /// Propagation direction at the user, as x/z direction cosines.
    struct ReceiveDirection
    {
        double ux = 0.0;
        double uz = 0.0;
    };

    struct PathComponent
    {
        double gain = 0.0; // |alpha_p|
        bool is_los = true;
        std::optional<Point3> scatterer;
        /// BS-side last hop per subarray. `distance` holds the total propagation
        /// length D_p^{uk}; ux/uz are the departure direction cosines.
        std::vector<SubarrayUserGeometry> subarrays;
        /// Arrival direction at the user per subarray (identical entries for NLoS).
        std::vector<ReceiveDirection> receive;
    };

    /// Where a non-line-of-sight path bounces and how much it loses there.
    struct ScatterSpec
    {
        Point3 position = Point3::Zero();
        double reflection_loss_db = 10.0;
        ReceiveDirection arrival;
    };

    enum class PathGainModel
    {
        free_space, // |alpha| = lambda / (4 pi D)
        unit,       // |alpha| = 1 for the line-of-sight path
    };

    PathComponent make_los_path(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                PathGainModel model = PathGainModel::free_space);

    PathComponent make_nlos_path(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                 const ScatterSpec &scatter, PathGainModel model = PathGainModel::free_space);

    /// Rank-one block |alpha| e^{-j 2pi D/lambda} a_r a_t^H for subarray k, N_r x (N_t/K).
    CMatrix subarray_channel(const PathComponent &path, int k, const SystemConfig &config);

    /// H_u = sum over paths of [block_1 | ... | block_K], N_r x N_t.
    CMatrix assemble_cnff_channel(const std::vector<PathComponent> &paths, const ArrayGeometry &geometry,
                                  const SystemConfig &config);

    struct UserPlacement
    {
        std::vector<Point3> positions;
        std::vector<bool> two_dimensional; // user height equals BS height
    };

    struct PlacementPolicy
    {
        enum class Kind
        {
            same_azimuth_line,
            distinct_azimuths,
            sector,
            explicit_positions,
        };
        Kind kind = Kind::sector;
        double azimuth_rad = 0.0;   // ray direction for same_azimuth_line
        double sector_rad = 2.0943951023931953; // 120 degrees
        double r_min = 1.0;
        double r_max = 20.0;
        std::vector<double> ranges; // optional explicit horizontal ranges (line policies)
        std::vector<Point3> positions; // explicit_positions
    };

    struct Scenario
    {
        UserPlacement users;
        std::vector<std::vector<ScatterSpec>> scatterers; // N_p - 1 entries per user
    };

    /// Users and scatterers, independent of the array so one drop can be evaluated on
    /// several architectures. Users sit in the horizontal plane at user_height_m around
    /// (0, 0), the position of the first subarray reference, with y > 0.
    Scenario generate_scenario(const SystemConfig &config, const PlacementPolicy &policy, std::mt19937_64 &rng);

    /// Per-drop generator derived from (master seed, drop index).
    std::mt19937_64 drop_rng(std::uint64_t master_seed, std::uint64_t drop_index);

    struct ChannelRealization
    {
        SystemConfig config;
        ArrayGeometry geometry;
        UserPlacement users;
        std::vector<CMatrix> H; // per user, N_r x N_t
        std::vector<std::vector<PathComponent>> paths;
        std::uint64_t rng_seed = 0;

        int num_users() const { return static_cast<int>(H.size()); }
    };

    ChannelRealization realize_channels(const Scenario &scenario, const ArrayGeometry &geometry,
                                        const SystemConfig &config, PathGainModel model = PathGainModel::free_space);

    /// Text dump: `channel,U,N_r,N_t` header then `u,row,col,re,im` rows (9 significant digits).
    void write_channel_dump(std::ostream &os, const std::vector<CMatrix> &H);
    std::vector<CMatrix> read_channel_dump(std::istream &is);
}

#endif
