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

#include "wsabf/channel.hpp"

#include "wsabf/errors.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace wsabf
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        double path_gain(PathGainModel model, double wavelength, double length)
        {
            if (model == PathGainModel::unit)
                return 1.0;
            return wavelength / (4.0 * pi * length);
        }

        int subarray_side(const SystemConfig &config)
        {
            return isqrt_exact(config.num_tx_antennas / config.num_subarrays);
        }
    }

    CVector upa_steering_vector(int nx, int nz, double ux, double uz, double wavelength, double spacing)
    {
        CVector a(static_cast<Eigen::Index>(nx) * nz);
        const double k = 2.0 * pi / wavelength * spacing;
        for (int n = 0; n < nz; ++n)
            for (int m = 0; m < nx; ++m)
                a(n * nx + m) = std::polar(1.0, k * (m * ux + n * uz));
        return a;
    }

    CVector upa_array_response(int nx, int nz, double ux, double uz, double wavelength, double spacing)
    {
        return upa_steering_vector(nx, nz, -ux, -uz, wavelength, spacing);
    }

    PathComponent make_los_path(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                PathGainModel model)
    {
        PathComponent p;
        p.is_los = true;
        p.subarrays = subarray_user_geometry(geometry, user);
        p.receive.reserve(p.subarrays.size());
        for (const auto &s : p.subarrays)
            p.receive.push_back({s.ux, s.uz});
        p.gain = path_gain(model, config.wavelength(), p.subarrays.front().distance);
        return p;
    }

    PathComponent make_nlos_path(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                 const ScatterSpec &scatter, PathGainModel model)
    {
        PathComponent p;
        p.is_los = false;
        p.scatterer = scatter.position;
        const double last_leg = (user - scatter.position).norm();
        if (!(last_leg > 0.0))
            throw GeometryError("scatterer coincides with the user");
        p.subarrays = subarray_user_geometry(geometry, scatter.position);
        for (auto &s : p.subarrays)
            s.distance += last_leg;
        p.receive.assign(p.subarrays.size(), scatter.arrival);
        const double total = p.subarrays.front().distance;
        const double reflection = std::pow(10.0, -scatter.reflection_loss_db / 20.0);
        p.gain = reflection * (model == PathGainModel::unit ? 1.0 : path_gain(model, config.wavelength(), total));
        return p;
    }

    CMatrix subarray_channel(const PathComponent &path, int k, const SystemConfig &config)
    {
        if (k < 0 || k >= static_cast<int>(path.subarrays.size()))
            throw AssemblyError("path has no geometry for subarray " + std::to_string(k));
        const double lambda = config.wavelength();
        const int ns = subarray_side(config);
        const int nr = isqrt_exact(config.num_rx_antennas);
        const auto &g = path.subarrays[static_cast<std::size_t>(k)];
        const auto &rx = path.receive[static_cast<std::size_t>(k)];
        const CVector at = upa_array_response(ns, ns, g.ux, g.uz, lambda, config.element_spacing());
        const CVector ar = upa_array_response(nr, nr, rx.ux, rx.uz, lambda, lambda / 2.0);
        const cdouble coeff = std::polar(path.gain, -2.0 * pi / lambda * g.distance);
        return coeff * ar * at.adjoint();
    }

    CMatrix assemble_cnff_channel(const std::vector<PathComponent> &paths, const ArrayGeometry &geometry,
                                  const SystemConfig &config)
    {
        const int K = geometry.num_subarrays;
        const Eigen::Index width = geometry.antennas_per_subarray();
        CMatrix H = CMatrix::Zero(config.num_rx_antennas, geometry.num_antennas());
        for (const auto &p : paths)
        {
            if (static_cast<int>(p.subarrays.size()) != K || static_cast<int>(p.receive.size()) != K)
                throw AssemblyError("path geometry does not match the number of subarrays");
            for (int k = 0; k < K; ++k)
            {
                CMatrix block = subarray_channel(p, k, config);
                if (block.cols() != width || block.rows() != H.rows())
                    throw AssemblyError("inconsistent block width while assembling the channel");
                H.middleCols(k * width, width) += block;
            }
        }
        return H;
    }

    std::mt19937_64 drop_rng(std::uint64_t master_seed, std::uint64_t drop_index)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(drop_index), static_cast<std::uint32_t>(drop_index >> 32)};
        return std::mt19937_64(seq);
    }

    Scenario generate_scenario(const SystemConfig &config, const PlacementPolicy &policy, std::mt19937_64 &rng)
    {
        using Kind = PlacementPolicy::Kind;
        const int U = config.num_users;
        if (policy.kind != Kind::explicit_positions)
        {
            if (!(policy.r_min > 0.0) || !(policy.r_max > 0.0) || policy.r_min > policy.r_max)
                throw ConfigError("sector radii must be positive with r_min <= r_max");
            if (!(policy.sector_rad > 0.0) || policy.sector_rad >= pi)
                throw ConfigError("sector angle must lie in (0, 180) degrees");
        }

        const double zu = config.user_height_m;
        auto on_ray = [zu](double az, double r) { return Point3(r * std::sin(az), r * std::cos(az), zu); };
        auto line_ranges = [&]() {
            if (!policy.ranges.empty())
            {
                if (static_cast<int>(policy.ranges.size()) != U)
                    throw ConfigError("number of explicit ranges must equal the number of users");
                return policy.ranges;
            }
            std::vector<double> r(static_cast<std::size_t>(U));
            for (int u = 0; u < U; ++u)
                r[static_cast<std::size_t>(u)] =
                    U == 1 ? policy.r_min : policy.r_min + (policy.r_max - policy.r_min) * u / (U - 1.0);
            return r;
        };

        Scenario sc;
        auto &pos = sc.users.positions;
        switch (policy.kind)
        {
        case Kind::same_azimuth_line:
            for (double r : line_ranges())
                pos.push_back(on_ray(policy.azimuth_rad, r));
            break;
        case Kind::distinct_azimuths: {
            auto r = line_ranges();
            for (int u = 0; u < U; ++u)
            {
                const double az = -policy.sector_rad / 2.0 + (u + 0.5) * policy.sector_rad / U;
                pos.push_back(on_ray(az, r[static_cast<std::size_t>(u)]));
            }
            break;
        }
        case Kind::sector: {
            std::uniform_real_distribution<double> az(-policy.sector_rad / 2.0, policy.sector_rad / 2.0);
            std::uniform_real_distribution<double> rr(policy.r_min, policy.r_max);
            for (int u = 0; u < U; ++u)
            {
                const double a = az(rng);
                pos.push_back(on_ray(a, rr(rng)));
            }
            break;
        }
        case Kind::explicit_positions:
            if (static_cast<int>(policy.positions.size()) != U)
                throw ConfigError("number of explicit positions must equal the number of users");
            pos = policy.positions;
            break;
        }
        for (const auto &p : pos)
            if (!(p.y() > 0.0))
                throw ConfigError("users must be placed in front of the array (y > 0)");
        sc.users.two_dimensional.assign(pos.size(), config.is_2d());

        // Scatterers share the user sector; heights span the BS/user height range.
        const double r_lo = policy.kind == Kind::explicit_positions ? 1.0 : policy.r_min;
        const double r_hi = policy.kind == Kind::explicit_positions ? 20.0 : policy.r_max;
        const double sector = policy.kind == Kind::explicit_positions ? 2.0 * pi / 3.0 : policy.sector_rad;
        std::uniform_real_distribution<double> s_az(-sector / 2.0, sector / 2.0);
        std::uniform_real_distribution<double> s_r(r_lo, r_hi);
        std::uniform_real_distribution<double> s_loss(10.0, 15.0);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::uniform_real_distribution<double> turn(0.0, 2.0 * pi);
        const double zlo = std::min(config.user_height_m, config.bs_height_m);
        const double zhi = std::max(config.user_height_m, config.bs_height_m);
        std::uniform_real_distribution<double> s_z(zlo, zhi);

        sc.scatterers.resize(pos.size());
        for (std::size_t u = 0; u < pos.size(); ++u)
        {
            for (int p = 1; p < config.num_paths; ++p)
            {
                ScatterSpec s;
                const double a = s_az(rng);
                const double r = s_r(rng);
                const double z = zhi > zlo ? s_z(rng) : zlo;
                s.position = Point3(r * std::sin(a), r * std::cos(a), z);
                s.reflection_loss_db = s_loss(rng);
                const double uz = unit(rng);
                const double phi = turn(rng);
                s.arrival = {std::sqrt(1.0 - uz * uz) * std::cos(phi), uz};
                sc.scatterers[u].push_back(s);
            }
        }
        return sc;
    }

    ChannelRealization realize_channels(const Scenario &scenario, const ArrayGeometry &geometry,
                                        const SystemConfig &config, PathGainModel model)
    {
        ChannelRealization out;
        out.config = config;
        out.geometry = geometry;
        out.users = scenario.users;
        out.rng_seed = config.rng_seed;
        const auto &pos = scenario.users.positions;
        out.H.reserve(pos.size());
        out.paths.reserve(pos.size());
        for (std::size_t u = 0; u < pos.size(); ++u)
        {
            std::vector<PathComponent> paths;
            paths.push_back(make_los_path(geometry, config, pos[u], model));
            if (u < scenario.scatterers.size())
                for (const auto &s : scenario.scatterers[u])
                    paths.push_back(make_nlos_path(geometry, config, pos[u], s, model));
            out.H.push_back(assemble_cnff_channel(paths, geometry, config));
            out.paths.push_back(std::move(paths));
        }
        return out;
    }

    void write_channel_dump(std::ostream &os, const std::vector<CMatrix> &H)
    {
        const auto flags = os.flags();
        const auto prec = os.precision();
        const Eigen::Index rows = H.empty() ? 0 : H.front().rows();
        const Eigen::Index cols = H.empty() ? 0 : H.front().cols();
        os << "channel," << H.size() << ',' << rows << ',' << cols << '\n';
        os << std::setprecision(9);
        for (std::size_t u = 0; u < H.size(); ++u)
            for (Eigen::Index r = 0; r < H[u].rows(); ++r)
                for (Eigen::Index c = 0; c < H[u].cols(); ++c)
                    os << u << ',' << r << ',' << c << ',' << H[u](r, c).real() << ',' << H[u](r, c).imag() << '\n';
        os.flags(flags);
        os.precision(prec);
    }

    std::vector<CMatrix> read_channel_dump(std::istream &is)
    {
        std::string line;
        if (!std::getline(is, line) || line.rfind("channel,", 0) != 0)
            throw std::runtime_error("channel dump: missing header");
        std::istringstream hs(line.substr(8));
        char comma = 0;
        std::size_t users = 0;
        Eigen::Index rows = 0, cols = 0;
        hs >> users >> comma >> rows >> comma >> cols;
        if (!hs)
            throw std::runtime_error("channel dump: malformed header");
        std::vector<CMatrix> H(users, CMatrix::Zero(rows, cols));
        while (std::getline(is, line))
        {
            if (line.empty())
                continue;
            std::istringstream ls(line);
            std::size_t u = 0;
            Eigen::Index r = 0, c = 0;
            double re = 0.0, im = 0.0;
            ls >> u >> comma >> r >> comma >> c >> comma >> re >> comma >> im;
            if (!ls || u >= users || r >= rows || c >= cols)
                throw std::runtime_error("channel dump: malformed row '" + line + "'");
            H[u](r, c) = cdouble(re, im);
        }
        return H;
    }
}
