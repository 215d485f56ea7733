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

#include "wsabf/beamforming.hpp"

#include "wsabf/channel.hpp"
#include "wsabf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace wsabf
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        void require_users(const std::vector<CMatrix> &H)
        {
            if (H.empty())
                throw ConfigError("at least one user channel is required");
            for (const auto &h : H)
                if (h.rows() != H.front().rows() || h.cols() != H.front().cols())
                    throw AssemblyError("user channels differ in shape");
        }

        void write_section(std::ostream &os, const std::string &name, const CMatrix &m)
        {
            os << name << ',' << m.rows() << ',' << m.cols() << '\n';
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    os << r << ',' << c << ',' << m(r, c).real() << ',' << m(r, c).imag() << '\n';
        }

        CMatrix random_phase(Eigen::Index rows, Eigen::Index cols, double modulus, std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
            CMatrix m(rows, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r)
                    m(r, c) = std::polar(modulus, phase(rng));
            return m;
        }

        // Rows W_u^H H_u for all users stacked.
        CMatrix stacked_effective_rows(const std::vector<CMatrix> &H, const std::vector<CMatrix> &W)
        {
            const Eigen::Index lr = W.front().cols();
            CMatrix G(static_cast<Eigen::Index>(H.size()) * lr, H.front().cols());
            for (std::size_t u = 0; u < H.size(); ++u)
                G.middleRows(static_cast<Eigen::Index>(u) * lr, lr) = W[u].adjoint() * H[u];
            return G;
        }
    }

    CMatrix BeamformerSet::effective_precoder() const
    {
        CMatrix F = F_RF * F_BB;
        for (Eigen::Index i = 0; i < F.cols() && i < power.size(); ++i)
            F.col(i) *= power(i);
        return F;
    }

    long long BeamformerSet::phase_shifter_count() const
    {
        const long long n = F_RF.rows() * F_RF.cols();
        return connection == Connection::sub_connected ? n / num_subarrays : n;
    }

    long long BeamformerSet::phase_shifters_per_subarray() const
    {
        const long long k = num_subarrays;
        return connection == Connection::sub_connected ? F_RF.rows() * F_RF.cols() / (k * k)
                                                       : F_RF.rows() * F_RF.cols() / k;
    }

    void write_beamformer_dump(std::ostream &os, const BeamformerSet &bf)
    {
        const auto prec = os.precision();
        os << std::setprecision(9);
        write_section(os, "FRF", bf.F_RF);
        write_section(os, "FBB", bf.F_BB);
        for (std::size_t u = 0; u < bf.W_RF.size(); ++u)
        {
            write_section(os, "WRFu" + std::to_string(u), bf.W_RF[u]);
            write_section(os, "WBBu" + std::to_string(u), bf.W_BB[u]);
        }
        os << "P," << bf.power.size() << ",1\n";
        for (Eigen::Index i = 0; i < bf.power.size(); ++i)
            os << i << ",0," << bf.power(i) << ",0\n";
        os.precision(prec);
    }

    BdResult bd_digital(const std::vector<CMatrix> &H, const CMatrix &F_RF, const std::vector<CMatrix> &W_RF,
                        int streams_per_user, DeficiencyPolicy policy)
    {
        require_users(H);
        if (W_RF.size() != H.size())
            throw AssemblyError("one analog combiner per user is required");
        if (streams_per_user < 1)
            throw ConfigError("streams per user must be positive");
        const int U = static_cast<int>(H.size());
        const int Ns = streams_per_user;
        const Eigen::Index Lt = F_RF.cols();
        const Eigen::Index Lr = W_RF.front().cols();
        if (Ns > Lr)
            throw ConfigError("N_s must not exceed L_r");

        std::vector<CMatrix> Heff(H.size());
        for (int u = 0; u < U; ++u)
            Heff[static_cast<std::size_t>(u)] = W_RF[static_cast<std::size_t>(u)].adjoint() *
                                               H[static_cast<std::size_t>(u)] * F_RF;

        BdResult out;
        out.F_BB = CMatrix::Zero(Lt, static_cast<Eigen::Index>(U) * Ns);
        out.gains = RVector::Zero(static_cast<Eigen::Index>(U) * Ns);
        out.W_BB.assign(H.size(), CMatrix::Zero(Lr, Ns));
        out.null_dimensions.assign(H.size(), 0);

        for (int u = 0; u < U; ++u)
        {
            CMatrix V0;
            if (U == 1)
                V0 = CMatrix::Identity(Lt, Lt);
            else
            {
                CMatrix others(static_cast<Eigen::Index>(U - 1) * Lr, Lt);
                Eigen::Index row = 0;
                for (int v = 0; v < U; ++v)
                    if (v != u)
                    {
                        others.middleRows(row, Lr) = Heff[static_cast<std::size_t>(v)];
                        row += Lr;
                    }
                const Svd d = svd(others, SvdVectors::full_v);
                const int r = numerical_rank(d.s);
                V0 = d.V.rightCols(Lt - r);
            }
            const int nd = static_cast<int>(V0.cols());
            out.null_dimensions[static_cast<std::size_t>(u)] = nd;
            if (nd < Ns)
            {
                if (policy == DeficiencyPolicy::raise)
                    throw RankDeficiencyError(u, nd, Ns);
                continue;
            }
            const Svd e = svd(Heff[static_cast<std::size_t>(u)] * V0);
            const int avail = static_cast<int>(std::min<Eigen::Index>(e.s.size(), Ns));
            for (int i = 0; i < avail; ++i)
            {
                const Eigen::Index col = static_cast<Eigen::Index>(u) * Ns + i;
                out.F_BB.col(col) = V0 * e.V.col(i);
                out.W_BB[static_cast<std::size_t>(u)].col(i) = e.U.col(i);
                out.gains(col) = e.s(i);
            }
        }
        return out;
    }

    RVector waterfilling(const RVector &gains, double total_power, double noise_power)
    {
        if (total_power < 0.0)
            throw ConfigError("total power must be non-negative");
        if (!(noise_power > 0.0))
            throw ConfigError("noise power must be positive");
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < gains.size(); ++i)
            if (gains(i) > 0.0)
                active.push_back(i);
        if (active.empty())
            throw ConfigError("water-filling needs at least one positive gain");

        // Floor levels noise / g^2, best channels first.
        std::vector<double> level(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
            level[i] = noise_power / (gains(active[i]) * gains(active[i]));
        std::vector<std::size_t> order(active.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return level[a] < level[b]; });

        std::size_t m = order.size();
        double mu = 0.0;
        for (; m >= 1; --m)
        {
            double sum = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                sum += level[order[i]];
            mu = (total_power + sum) / static_cast<double>(m);
            if (mu > level[order[m - 1]])
                break;
        }
        RVector p = RVector::Zero(gains.size());
        for (std::size_t i = 0; i < m; ++i)
            p(active[order[i]]) = std::max(0.0, mu - level[order[i]]);
        return p;
    }

    double interference_free_rate(const RVector &gains, const RVector &powers, double noise_power)
    {
        double r = 0.0;
        for (Eigen::Index i = 0; i < gains.size(); ++i)
            r += std::log2(1.0 + powers(i) * gains(i) * gains(i) / noise_power);
        return r;
    }

    BeamformerSet complete_digital_stage(const std::vector<CMatrix> &H, const AnalogStage &analog,
                                         const SystemConfig &config, DeficiencyPolicy policy)
    {
        BdResult bd = bd_digital(H, analog.F_RF, analog.W_RF, config.streams_per_user, policy);
        for (Eigen::Index i = 0; i < bd.F_BB.cols(); ++i)
        {
            const double c = (analog.F_RF * bd.F_BB.col(i)).norm();
            if (c > 0.0 && bd.gains(i) > 0.0)
            {
                bd.F_BB.col(i) /= c;
                bd.gains(i) /= c;
            }
            else
                bd.gains(i) = 0.0;
        }

        BeamformerSet bf;
        bf.F_RF = analog.F_RF;
        bf.F_BB = std::move(bd.F_BB);
        bf.W_RF = analog.W_RF;
        bf.W_BB = std::move(bd.W_BB);
        bf.connection = analog.connection;
        bf.num_subarrays = analog.num_subarrays;
        bf.streams_per_user = config.streams_per_user;
        if ((bd.gains.array() > 0.0).any())
            bf.power = waterfilling(bd.gains, config.total_power_w, config.noise_power_w).cwiseSqrt();
        else
            bf.power = RVector::Zero(bd.gains.size());
        return bf;
    }

    double ao_objective(const std::vector<CMatrix> &H, const CMatrix &F, const std::vector<CMatrix> &W,
                        double noise_power)
    {
        const CMatrix GF = stacked_effective_rows(H, W) * F;
        const CMatrix M = CMatrix::Identity(F.cols(), F.cols()) + GF.adjoint() * GF / noise_power;
        bool ok = false;
        const double v = log2_det_hpd(M, &ok);
        if (!ok)
            throw std::runtime_error("objective matrix is not positive definite");
        return v;
    }

    AoResult ao_analog_subconnected(const std::vector<CMatrix> &H, const SystemConfig &config,
                                    const AoOptions &options)
    {
        require_users(H);
        const int K = config.num_subarrays;
        const int Nt = static_cast<int>(H.front().cols());
        const int Nr = static_cast<int>(H.front().rows());
        const int Lt = config.tx_rf_chains;
        const int Lr = config.rx_rf_chains;
        if (Nt % K != 0)
            throw ConfigError("K must divide N_t");
        if (Lt % K != 0)
            throw ConfigError("sub-connected mode needs K to divide L_t");
        const int n = Nt / K;
        const int l = Lt / K;
        if (l > n || Lr > Nr)
            throw ConfigError("more RF chains than antennas");
        const double noise = config.noise_power_w;

        std::mt19937_64 rng(options.seed);
        AoResult res;
        CMatrix F = CMatrix::Zero(Nt, Lt);
        for (int j = 0; j < K; ++j)
            F.block(j * n, j * l, n, l) = random_phase(n, l, 1.0 / std::sqrt(static_cast<double>(n)), rng);
        std::vector<CMatrix> W(H.size());
        for (auto &w : W)
            w = random_phase(Nr, Lr, 1.0 / std::sqrt(static_cast<double>(Nr)), rng);

        CMatrix G = stacked_effective_rows(H, W);
        const Eigen::Index rows = G.rows();
        CMatrix GF(rows, Lt);
        auto refresh_gf = [&]() {
            for (int j = 0; j < K; ++j)
                GF.middleCols(j * l, l) = G.middleCols(j * n, n) * F.block(j * n, j * l, n, l);
        };
        auto objective = [&]() {
            const CMatrix M = CMatrix::Identity(Lt, Lt) + GF.adjoint() * GF / noise;
            return log2_det_hpd(M);
        };
        refresh_gf();
        double previous = objective();

        for (int it = 0; it < options.max_iterations; ++it)
        {
            for (int j = 0; j < K; ++j)
            {
                // Columns of G F belonging to the other subarrays.
                CMatrix C(rows, Lt - l);
                for (int i = 0, c = 0; i < K; ++i)
                    if (i != j)
                        C.middleCols((c++) * l, l) = GF.middleCols(i * l, l);
                const CMatrix Gj = G.middleCols(j * n, n);

                CMatrix B = CMatrix::Identity(Lt - l, Lt - l) + C.adjoint() * C / noise;
                Eigen::LDLT<CMatrix> ldlt(B);
                if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12)
                {
                    B += 1e-12 * B.trace().real() * CMatrix::Identity(B.rows(), B.cols());
                    ldlt.compute(B);
                    ++res.regularized_solves;
                }
                // X_j = G_j^H Psi G_j with Psi = I - C B^{-1} C^H / noise.
                CMatrix Psi = CMatrix::Identity(rows, rows) - C * ldlt.solve(C.adjoint()) / noise;
                Psi = (0.5 * (Psi + Psi.adjoint())).eval();
                Eigen::SelfAdjointEigenSolver<CMatrix> es(Psi);
                const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
                const CMatrix Y = root.asDiagonal() * es.eigenvectors().adjoint() * Gj;
                const Svd d = svd(Y);
                CMatrix Fj = CMatrix::Zero(n, l);
                const Eigen::Index take = std::min<Eigen::Index>(l, d.V.cols());
                Fj.leftCols(take) = d.V.leftCols(take);
                F.block(j * n, j * l, n, l) = Fj;
                GF.middleCols(j * l, l) = Gj * Fj;
                res.objective.push_back(objective());
                res.step_is_precoder.push_back(true);
            }

            for (std::size_t u = 0; u < H.size(); ++u)
            {
                const Svd d = svd(H[u] * F);
                CMatrix w = CMatrix::Zero(Nr, Lr);
                const Eigen::Index take = std::min<Eigen::Index>(Lr, d.U.cols());
                w.leftCols(take) = d.U.leftCols(take);
                W[u] = w;
            }
            G = stacked_effective_rows(H, W);
            refresh_gf();
            const double current = objective();
            res.objective.push_back(current);
            res.step_is_precoder.push_back(false);
            res.sweep_objective.push_back(current);
            res.iterations = it + 1;
            const double change = std::abs(current - previous) / std::max(std::abs(previous), 1e-300);
            previous = current;
            if (change < options.tolerance)
                break;
        }

        res.F_unconstrained = F;
        res.W_unconstrained = W;
        res.analog.connection = Connection::sub_connected;
        res.analog.num_subarrays = K;
        res.analog.F_RF = CMatrix::Zero(Nt, Lt);
        for (int j = 0; j < K; ++j)
            res.analog.F_RF.block(j * n, j * l, n, l) =
                constant_modulus_projection(F.block(j * n, j * l, n, l), 1.0 / std::sqrt(static_cast<double>(n)));
        res.analog.W_RF.reserve(W.size());
        for (const auto &w : W)
            res.analog.W_RF.push_back(constant_modulus_projection(w, 1.0 / std::sqrt(static_cast<double>(Nr))));
        return res;
    }

    namespace
    {
        struct VirtualDirection
        {
            double distance_offset; // D^{uk} - D^{u1}
            double ux;
            double uz;
        };

        std::vector<VirtualDirection> virtual_directions(const ArrayGeometry &geometry, const Point3 &user,
                                                         DistanceModel model)
        {
            const SubarrayUserGeometry g1 = point_geometry(geometry.subarray_references.front(), user);
            std::vector<VirtualDirection> out;
            out.reserve(static_cast<std::size_t>(geometry.num_subarrays));
            for (int k = 0; k < geometry.num_subarrays; ++k)
            {
                const auto [kx, kz] = geometry.subarray_grid_index(k);
                const double dx = kx * geometry.reference_pitch;
                const double dz = kz * geometry.reference_pitch;
                double dk = 0.0;
                if (model == DistanceModel::taylor)
                    dk = taylor_distance(g1.distance, kx + 1, kz + 1, geometry.reference_pitch, g1.ux, g1.uz).distance;
                else
                    dk = point_geometry(geometry.subarray_references[static_cast<std::size_t>(k)], user).distance;
                out.push_back({dk - g1.distance, (g1.distance * g1.ux - dx) / dk, (g1.distance * g1.uz - dz) / dk});
            }
            return out;
        }
    }

    CVector svr_steering_vector(const ArrayGeometry &geometry, const SystemConfig &config, const Point3 &user,
                                DistanceModel model)
    {
        const double lambda = config.wavelength();
        const int ns = geometry.subarray_side;
        const Eigen::Index width = geometry.antennas_per_subarray();
        const auto dirs = virtual_directions(geometry, user, model);
        CVector a(geometry.num_antennas());
        for (int k = 0; k < geometry.num_subarrays; ++k)
        {
            const auto &v = dirs[static_cast<std::size_t>(k)];
            a.segment(k * width, width) = std::polar(1.0, 2.0 * pi / lambda * v.distance_offset) *
                                          upa_array_response(ns, ns, v.ux, v.uz, lambda, geometry.element_spacing);
        }
        return a / std::sqrt(static_cast<double>(a.size()));
    }

    AnalogStage svr_analog(const ArrayGeometry &geometry, const SystemConfig &config,
                           const std::vector<Point3> &users, DistanceModel model)
    {
        const int U = static_cast<int>(users.size());
        const int Lt = config.tx_rf_chains;
        const int Lr = config.rx_rf_chains;
        if (U < 1)
            throw ConfigError("at least one user is required");
        if (Lt < U)
            throw ConfigError("virtual-rotation beams need L_t >= U");
        const int K = geometry.num_subarrays;
        const Eigen::Index width = geometry.antennas_per_subarray();
        const double lambda = config.wavelength();
        const int nr = isqrt_exact(config.num_rx_antennas);

        AnalogStage st;
        st.connection = Connection::fully_connected;
        st.num_subarrays = K;
        st.F_RF.resize(geometry.num_antennas(), Lt);
        for (int c = 0; c < Lt; ++c)
        {
            // Extra RF chains of a user steer the same beam with a DFT phase ramp across
            // subarrays, which excites the other spatial modes of the widely-spaced array.
            const int u = c % U;
            const int mode = c / U;
            CVector a = svr_steering_vector(geometry, config, users[static_cast<std::size_t>(u)], model);
            for (int k = 0; k < K && mode > 0; ++k)
                a.segment(k * width, width) *= std::polar(1.0, 2.0 * pi * mode * k / K);
            st.F_RF.col(c) = a;
        }

        // Fixed combiner: receive steering vector toward the reference subarray. Extra
        // receive RF chains use the same phase front modulated by orthogonal 2-D DFT rows.
        const double rx_mod = 1.0 / std::sqrt(static_cast<double>(config.num_rx_antennas));
        st.W_RF.reserve(users.size());
        for (const auto &p : users)
        {
            const SubarrayUserGeometry g1 = point_geometry(geometry.subarray_references.front(), p);
            const CVector base = upa_array_response(nr, nr, g1.ux, g1.uz, lambda, lambda / 2.0);
            CMatrix w(config.num_rx_antennas, Lr);
            for (int c = 0; c < Lr; ++c)
            {
                const int fx = c % nr;
                const int fz = (c / nr) % nr;
                for (int n = 0; n < nr; ++n)
                    for (int m = 0; m < nr; ++m)
                        w(n * nr + m, c) = base(n * nr + m) * std::polar(1.0, 2.0 * pi * (fx * m + fz * n) / nr);
            }
            st.W_RF.push_back(constant_modulus_projection(w, rx_mod));
        }
        return st;
    }

    AnalogStage svd_phase_analog(const std::vector<CMatrix> &H, const SystemConfig &config)
    {
        require_users(H);
        const int U = static_cast<int>(H.size());
        const int Lt = config.tx_rf_chains;
        const int Lr = config.rx_rf_chains;
        if (Lt % U != 0)
            throw ConfigError("SVD-phase beams need U to divide L_t");
        const int per = Lt / U;
        const Eigen::Index Nt = H.front().cols();
        const Eigen::Index Nr = H.front().rows();

        AnalogStage st;
        st.connection = Connection::fully_connected;
        st.num_subarrays = config.num_subarrays;
        CMatrix F = CMatrix::Zero(Nt, Lt);
        for (int u = 0; u < U; ++u)
        {
            const Svd d = svd(H[static_cast<std::size_t>(u)]);
            const Eigen::Index t = std::min<Eigen::Index>(per, d.V.cols());
            F.middleCols(u * per, t) = d.V.leftCols(t);
            CMatrix w = CMatrix::Zero(Nr, Lr);
            const Eigen::Index tr = std::min<Eigen::Index>(Lr, d.U.cols());
            w.leftCols(tr) = d.U.leftCols(tr);
            st.W_RF.push_back(constant_modulus_projection(w, 1.0 / std::sqrt(static_cast<double>(Nr))));
        }
        st.F_RF = constant_modulus_projection(F, 1.0 / std::sqrt(static_cast<double>(Nt)));
        return st;
    }

    BeamformerSet fully_digital_precoders(const std::vector<CMatrix> &H, const SystemConfig &config)
    {
        require_users(H);
        const Eigen::Index Nr = H.front().rows();
        // Only the joint row space of the channels carries signal, so BD over an
        // orthonormal basis of it matches BD with an identity analog stage.
        std::vector<CMatrix> parts;
        Eigen::Index cols = 0;
        for (const auto &h : H)
        {
            const Svd d = svd(h);
            const int r = numerical_rank(d.s);
            parts.push_back(d.V.leftCols(r));
            cols += r;
        }
        CMatrix stacked(H.front().cols(), cols);
        Eigen::Index at = 0;
        for (const auto &p : parts)
        {
            stacked.middleCols(at, p.cols()) = p;
            at += p.cols();
        }
        AnalogStage st;
        st.connection = Connection::digital;
        st.num_subarrays = config.num_subarrays;
        st.F_RF = column_space_basis(stacked);
        st.W_RF.assign(H.size(), CMatrix::Identity(Nr, Nr));
        return complete_digital_stage(H, st, config, DeficiencyPolicy::drop_streams);
    }

    BeamformerSet capacity_upper_bound_precoders(const std::vector<CMatrix> &H, const SystemConfig &config)
    {
        require_users(H);
        const int Ns = config.streams_per_user;
        const Eigen::Index Nr = H.front().rows();
        AnalogStage st;
        st.connection = Connection::digital;
        st.num_subarrays = config.num_subarrays;
        CMatrix rows(static_cast<Eigen::Index>(H.size()) * Ns, H.front().cols());
        for (std::size_t u = 0; u < H.size(); ++u)
        {
            const Svd d = svd(H[u]);
            CMatrix w = CMatrix::Zero(Nr, Ns);
            const Eigen::Index t = std::min<Eigen::Index>(Ns, d.U.cols());
            w.leftCols(t) = d.U.leftCols(t);
            rows.middleRows(static_cast<Eigen::Index>(u) * Ns, Ns) = w.adjoint() * H[u];
            st.W_RF.push_back(w);
        }
        st.F_RF = column_space_basis(rows.adjoint());
        return complete_digital_stage(H, st, config, DeficiencyPolicy::drop_streams);
    }

    namespace
    {
        // Rate of a BD set: interference is nulled and the combiners are orthonormal.
        double bd_rate(const std::vector<CMatrix> &H, const BeamformerSet &bf, double noise)
        {
            double r = 0.0;
            const CMatrix F = bf.F_RF * bf.F_BB;
            for (std::size_t u = 0; u < H.size(); ++u)
                for (int i = 0; i < bf.streams_per_user; ++i)
                {
                    const Eigen::Index col = static_cast<Eigen::Index>(u) * bf.streams_per_user + i;
                    const cdouble g = (bf.W_RF[u] * bf.W_BB[u].col(i)).dot(H[u] * F.col(col));
                    r += std::log2(1.0 + bf.power(col) * bf.power(col) * std::norm(g) / noise);
                }
            return r;
        }
    }

    double fully_digital_bound(const std::vector<CMatrix> &H, const SystemConfig &config)
    {
        return bd_rate(H, fully_digital_precoders(H, config), config.noise_power_w);
    }

    double capacity_upper_bound(const std::vector<CMatrix> &H, const SystemConfig &config)
    {
        return bd_rate(H, capacity_upper_bound_precoders(H, config), config.noise_power_w);
    }
}
