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

#include "support.hpp"

#include "wsabf/beamforming.hpp"
#include "wsabf/channel.hpp"
#include "wsabf/errors.hpp"
#include "wsabf/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace wsabf;

namespace
{
    constexpr double pi = std::numbers::pi;

    // Exhaustive active-set solution of the water-filling KKT conditions.
    RVector waterfilling_oracle(const RVector &g, double P, double noise)
    {
        const int n = static_cast<int>(g.size());
        RVector best = RVector::Zero(n);
        int found = 0;
        for (unsigned mask = 1; mask < (1u << n); ++mask)
        {
            double sum = 0.0;
            int count = 0;
            bool positive = true;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i))
                {
                    if (!(g(i) > 0.0))
                        positive = false;
                    else
                    {
                        sum += noise / (g(i) * g(i));
                        ++count;
                    }
                }
            if (!positive)
                continue;
            const double mu = (P + sum) / count;
            bool kkt = true;
            for (int i = 0; i < n && kkt; ++i)
            {
                const double level = g(i) > 0.0 ? noise / (g(i) * g(i)) : std::numeric_limits<double>::infinity();
                const bool in = mask & (1u << i);
                kkt = in ? mu > level : mu <= level;
            }
            if (!kkt)
                continue;
            ++found;
            for (int i = 0; i < n; ++i)
                best(i) = (mask & (1u << i)) ? mu - noise / (g(i) * g(i)) : 0.0;
        }
        EXPECT_EQ(found, 1);
        return best;
    }

    double subspace_distance(const CMatrix &A, const CMatrix &B)
    {
        return (A * A.adjoint() - B * B.adjoint()).norm();
    }
}

TEST(Waterfilling, SymmetricAndSingleStream)
{
    EXPECT_LT((waterfilling(RVector::Constant(5, 0.7), 2.0, 0.1) - RVector::Constant(5, 0.4)).norm(), 1e-15);
    RVector one(1);
    one << 0.3;
    EXPECT_DOUBLE_EQ(waterfilling(one, 1.5, 0.2)(0), 1.5);
}

TEST(Waterfilling, WeakStreamIsSwitchedOff)
{
    RVector g(2);
    g << 1.0, 0.1;
    const RVector p = waterfilling(g, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(p(0), 1.0);
    EXPECT_EQ(p(1), 0.0);
}

TEST(Waterfilling, MatchesExhaustiveKktOracle)
{
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_real_distribution<double> gain(0.01, 3.0), logp(-3.0, 2.0);
    for (int t = 0; t < 1000; ++t)
    {
        const int n = size(rng);
        RVector g(n);
        for (int i = 0; i < n; ++i)
            g(i) = gain(rng);
        const double P = std::pow(10.0, logp(rng));
        const RVector p = waterfilling(g, P, 0.5);
        EXPECT_LT((p - waterfilling_oracle(g, P, 0.5)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(p.sum(), P, 1e-12 * std::max(1.0, P));
        EXPECT_GE(p.minCoeff(), 0.0);
    }
}

TEST(Waterfilling, ZeroGainsGetNoPowerAndErrorsAreReported)
{
    RVector g(3);
    g << 0.0, 1.0, 0.0;
    const RVector p = waterfilling(g, 2.0, 1.0);
    EXPECT_EQ(p(0), 0.0);
    EXPECT_DOUBLE_EQ(p(1), 2.0);
    EXPECT_THROW(waterfilling(RVector::Zero(2), 1.0, 1.0), ConfigError);
    EXPECT_THROW(waterfilling(g, -1.0, 1.0), ConfigError);
    EXPECT_THROW(waterfilling(g, 1.0, 0.0), ConfigError);
}

TEST(BlockDiagonalization, SingleUserIsPlainSvd)
{
    std::mt19937_64 rng(1);
    const CMatrix H = test::random_matrix(4, 8, rng);
    const BdResult r = bd_digital({H}, CMatrix::Identity(8, 8), {CMatrix::Identity(4, 4)}, 3);
    const Svd d = svd(H);
    EXPECT_LT((r.gains - d.s.head(3)).norm(), 1e-12);
    EXPECT_LT(subspace_distance(r.F_BB, d.V.leftCols(3)), 1e-10);
    EXPECT_EQ(r.null_dimensions[0], 8);
}

TEST(BlockDiagonalization, CrossTermsVanish)
{
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t)
    {
        std::vector<CMatrix> H = {test::random_matrix(4, 8, rng), test::random_matrix(4, 8, rng)};
        const CMatrix F = CMatrix::Identity(8, 8);
        std::vector<CMatrix> W = {test::random_matrix(4, 2, rng), test::random_matrix(4, 2, rng)};
        const BdResult r = bd_digital(H, F, W, 1);
        for (int u = 0; u < 2; ++u)
        {
            const CMatrix other = W[u].adjoint() * H[u] * F * r.F_BB.col(1 - u);
            const CMatrix own = W[u].adjoint() * H[u] * F * r.F_BB.col(u);
            EXPECT_LT(other.norm(), 1e-10 * own.norm());
            // W_BB picks the effective singular vector with gain r.gains(u)
            EXPECT_NEAR(std::abs((r.W_BB[u].adjoint() * own)(0, 0)), r.gains(u), 1e-10);
        }
    }
}

TEST(BlockDiagonalization, DisjointRowSpacesGiveThePerUserSvd)
{
    std::mt19937_64 rng(3);
    CMatrix H1 = CMatrix::Zero(2, 8), H2 = CMatrix::Zero(2, 8);
    H1.leftCols(4) = test::random_matrix(2, 4, rng);
    H2.rightCols(4) = test::random_matrix(2, 4, rng);
    const std::vector<CMatrix> W = {CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)};
    const BdResult r = bd_digital({H1, H2}, CMatrix::Identity(8, 8), W, 2);
    const Svd a = svd(H1), b = svd(H2);
    EXPECT_LT(subspace_distance(r.F_BB.leftCols(2), a.V.leftCols(2)), 1e-10);
    EXPECT_LT(subspace_distance(r.F_BB.rightCols(2), b.V.leftCols(2)), 1e-10);
    EXPECT_LT((r.gains.head(2) - a.s.head(2)).norm(), 1e-12);
}

TEST(BlockDiagonalization, RankDeficiencyPolicy)
{
    std::mt19937_64 rng(4);
    // Three users on a 2-dimensional analog space: every null space is empty.
    std::vector<CMatrix> H = {test::random_matrix(2, 2, rng), test::random_matrix(2, 2, rng),
                              test::random_matrix(2, 2, rng)};
    std::vector<CMatrix> W(3, CMatrix::Identity(2, 1));
    EXPECT_THROW(bd_digital(H, CMatrix::Identity(2, 2), W, 1), RankDeficiencyError);
    const BdResult r = bd_digital(H, CMatrix::Identity(2, 2), W, 1, DeficiencyPolicy::drop_streams);
    EXPECT_EQ(r.gains.maxCoeff(), 0.0);
    EXPECT_THROW(bd_digital(H, CMatrix::Identity(2, 2), W, 2), ConfigError);
}

TEST(DigitalStage, PowerAndNormalizationConstraints)
{
    std::mt19937_64 rng(5);
    SystemConfig c = test::small_config(64, 4, 3, 1);
    c.tx_rf_chains = 6;
    c.rx_rf_chains = 2;
    c.streams_per_user = 2;
    std::vector<CMatrix> H;
    for (int u = 0; u < 3; ++u)
        H.push_back(test::random_matrix(4, 64, rng) * 1e-4);
    AnalogStage a;
    a.F_RF = constant_modulus_projection(test::random_matrix(64, 6, rng), 1.0 / 8.0);
    for (int u = 0; u < 3; ++u)
        a.W_RF.push_back(constant_modulus_projection(test::random_matrix(4, 2, rng), 0.5));
    const BeamformerSet bf = complete_digital_stage(H, a, c);
    EXPECT_NEAR(bf.power.squaredNorm(), c.total_power_w, 1e-12);
    EXPECT_NEAR((bf.F_RF * bf.F_BB).squaredNorm(), 6.0, 1e-9);
    for (int i = 0; i < 6; ++i)
        EXPECT_NEAR((bf.F_RF * bf.F_BB.col(i)).norm(), 1.0, 1e-12);
    EXPECT_EQ(bf.num_users(), 3);
    EXPECT_EQ(bf.effective_precoder().cols(), 6);
}

TEST(PhaseShifters, CountsForBothConnections)
{
    BeamformerSet bf;
    bf.F_RF = CMatrix::Zero(1024, 20);
    bf.num_subarrays = 4;
    bf.connection = Connection::fully_connected;
    EXPECT_EQ(bf.phase_shifter_count(), 1024 * 20);
    bf.connection = Connection::sub_connected;
    EXPECT_EQ(bf.phase_shifter_count(), 1024 * 20 / 4);
    EXPECT_EQ(bf.phase_shifters_per_subarray(), 1024 * 20 / 16);
    EXPECT_EQ(bf.phase_shifters_per_subarray() * 16, 1024 * 20);
}

class AoFixture : public ::testing::Test
{
protected:
    std::vector<CMatrix> random_channels(int U, int Nr, int Nt, std::mt19937_64 &rng)
    {
        std::vector<CMatrix> H;
        for (int u = 0; u < U; ++u)
            H.push_back(test::random_matrix(Nr, Nt, rng));
        return H;
    }
};

TEST_F(AoFixture, PrecoderStepsNeverDecreaseTheObjective)
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t)
    {
        SystemConfig c = test::small_config(64, 16, 4, 4);
        c.noise_power_w = 1.0;
        const auto H = random_channels(4, 16, 64, rng);
        AoOptions o;
        o.seed = static_cast<std::uint64_t>(t + 1);
        o.tolerance = 0.0;
        o.max_iterations = 4;
        const AoResult r = ao_analog_subconnected(H, c, o);
        ASSERT_EQ(r.objective.size(), r.step_is_precoder.size());
        for (std::size_t i = 1; i < r.objective.size(); ++i)
        {
            if (!r.step_is_precoder[i])
                continue;
            EXPECT_GE(r.objective[i], r.objective[i - 1] - 1e-9 * std::abs(r.objective[i - 1]));
        }
        EXPECT_EQ(r.iterations, 4);
        EXPECT_EQ(r.sweep_objective.size(), 4u);
    }
}

TEST_F(AoFixture, SingleBlockConvergesToTheDominantRightSubspace)
{
    std::mt19937_64 rng(7);
    SystemConfig c = test::small_config(16, 4, 1, 1);
    c.tx_rf_chains = 2;
    c.rx_rf_chains = 4;
    c.noise_power_w = 1.0;
    const auto H = random_channels(1, 4, 16, rng);
    AoOptions o;
    o.tolerance = 0.0;
    o.max_iterations = 200;
    const AoResult r = ao_analog_subconnected(H, c, o);
    const Svd d = svd(H[0]);
    EXPECT_LT(subspace_distance(r.F_unconstrained, d.V.leftCols(2)), 1e-6);
}

TEST_F(AoFixture, ProjectionMeetsModulusAndBlockStructure)
{
    std::mt19937_64 rng(8);
    SystemConfig c = test::small_config(64, 16, 4, 4);
    const auto H = random_channels(4, 16, 64, rng);
    const AoResult r = ao_analog_subconnected(H, c);
    const double m = 1.0 / std::sqrt(16.0);
    for (int row = 0; row < 64; ++row)
    {
        for (int col = 0; col < 4; ++col)
        {
            const double a = std::abs(r.analog.F_RF(row, col));
            if (row / 16 == col)
                EXPECT_NEAR(a, m, 1e-15);
            else
                EXPECT_EQ(a, 0.0);
        }
    }
    for (const auto &w : r.analog.W_RF)
        EXPECT_LT((w.cwiseAbs().array() - 0.25).abs().maxCoeff(), 1e-15);
    EXPECT_EQ(r.analog.connection, Connection::sub_connected);
}

TEST_F(AoFixture, RejectsIndivisibleRfChains)
{
    std::mt19937_64 rng(9);
    SystemConfig c = test::small_config(64, 16, 5, 4);
    EXPECT_THROW(ao_analog_subconnected(random_channels(5, 16, 64, rng), c), ConfigError);
}

TEST_F(AoFixture, SeedDeterminesTheResult)
{
    std::mt19937_64 rng(10);
    SystemConfig c = test::small_config(64, 16, 4, 4);
    const auto H = random_channels(4, 16, 64, rng);
    const AoResult a = ao_analog_subconnected(H, c), b = ao_analog_subconnected(H, c);
    EXPECT_TRUE(a.analog.F_RF == b.analog.F_RF);
    AoOptions o;
    o.seed = 99;
    EXPECT_FALSE(ao_analog_subconnected(H, c, o).F_unconstrained == a.F_unconstrained);
}

namespace
{
    // Exact spherical-wave gain |sum_n e^{-jk|p - p_n|} f_n|.
    double focus_gain(const ArrayGeometry &g, const CVector &f, const Point3 &p, double lambda)
    {
        cdouble acc = 0.0;
        for (int n = 0; n < g.num_antennas(); ++n)
            acc += std::polar(1.0, -2 * pi / lambda * (p - g.antenna_positions[n]).norm()) * f(n);
        return std::abs(acc);
    }

    CVector plain_far_field(const ArrayGeometry &g, const Point3 &user, double lambda)
    {
        const Point3 dir = (user - g.antenna_positions[0]).normalized();
        CVector f(g.num_antennas());
        for (int n = 0; n < g.num_antennas(); ++n)
            f(n) = std::polar(1.0, -2 * pi / lambda * dir.dot(g.antenna_positions[n] - g.antenna_positions[0]));
        return f / std::sqrt(static_cast<double>(f.size()));
    }

    SystemConfig wsa(int K)
    {
        SystemConfig c = default_config();
        c.num_subarrays = K;
        c.subarray_spacing_m = K == 1 ? 0.0
                                      : max_subarray_spacing(K, c.num_tx_antennas, c.wavelength(), 1.0,
                                                             SpacingMode::geometric, c.element_spacing());
        return c;
    }
}

TEST(Svr, CompactArrayGivesTheFarFieldSteeringVector)
{
    const SystemConfig c = wsa(1);
    const ArrayGeometry g = build_wsa_geometry(c);
    const Point3 user(3.0, 8.0, 20.0);
    const auto s = subarray_user_geometry(g, user).front();
    const CVector want = upa_array_response(32, 32, s.ux, s.uz, c.wavelength(), c.element_spacing()) / 32.0;
    EXPECT_LT((svr_steering_vector(g, c, user) - want).norm(), 1e-12);
}

TEST(Svr, AgreesWithFarFieldSteeringFarAway)
{
    for (int K : {4, 16})
    {
        const SystemConfig c = wsa(K);
        const ArrayGeometry g = build_wsa_geometry(c);
        const double D = 100.0 * rayleigh_distance(g.aperture, c.wavelength());
        for (double az : {-0.8, 0.1, 0.6})
        {
            const Point3 user = g.antenna_positions[0] + D * Point3(std::sin(az), std::cos(az), 0.05);
            const CVector svr = svr_steering_vector(g, c, user);
            const CVector ff = plain_far_field(g, user, c.wavelength());
            EXPECT_GE(std::abs(ff.dot(svr)), 0.999) << K << " " << az;
        }
    }
}

TEST(Svr, FocusesBetterThanFarFieldSteeringInTheNearField)
{
    const SystemConfig c = wsa(4);
    const ArrayGeometry g = build_wsa_geometry(c);
    const double D = 0.1 * rayleigh_distance(g.aperture, c.wavelength());
    const Point3 user = g.antenna_positions[0] + D * Point3(std::sin(0.3), std::cos(0.3), 0.0);
    const double svr = focus_gain(g, svr_steering_vector(g, c, user), user, c.wavelength());
    const double ff = focus_gain(g, plain_far_field(g, user, c.wavelength()), user, c.wavelength());
    EXPECT_GT(svr, ff);
    EXPECT_GT(svr, 0.99 * std::sqrt(1024.0));
}

TEST(Svr, ExactDistanceModelFocusesAtCloseRange)
{
    const SystemConfig c = wsa(4);
    const ArrayGeometry g = build_wsa_geometry(c);
    const Point3 user(4.0, 6.0, 20.0);
    const double exact = focus_gain(g, svr_steering_vector(g, c, user, DistanceModel::exact), user, c.wavelength());
    EXPECT_GT(exact, 0.95 * std::sqrt(1024.0));
    EXPECT_GE(exact, focus_gain(g, svr_steering_vector(g, c, user), user, c.wavelength()) - 1e-9);
}

TEST(Svr, AnalogStageShapesAndModulus)
{
    SystemConfig c = wsa(4);
    c.num_users = 4;
    c.tx_rf_chains = 8;
    c.rx_rf_chains = 2;
    c.streams_per_user = 2;
    const ArrayGeometry g = build_wsa_geometry(c);
    const std::vector<Point3> users = {{1, 5, 20}, {-2, 7, 20}, {3, 3, 20}, {0, 12, 20}};
    const AnalogStage a = svr_analog(g, c, users);
    ASSERT_EQ(a.F_RF.cols(), 8);
    EXPECT_LT((a.F_RF.cwiseAbs().array() - 1.0 / 32.0).abs().maxCoeff(), 1e-12);
    ASSERT_EQ(a.W_RF.size(), 4u);
    for (const auto &w : a.W_RF)
    {
        EXPECT_EQ(w.cols(), 2);
        EXPECT_LT((w.cwiseAbs().array() - 0.25).abs().maxCoeff(), 1e-15);
        // the two receive columns are orthogonal
        EXPECT_LT(std::abs(w.col(0).dot(w.col(1))), 1e-12);
    }
    c.tx_rf_chains = 3;
    EXPECT_THROW(svr_analog(g, c, users), ConfigError);
}

TEST(Benchmarks, SvdPhaseModulusAndDivisibility)
{
    std::mt19937_64 rng(11);
    SystemConfig c = test::small_config(64, 16, 4, 1);
    std::vector<CMatrix> H;
    for (int u = 0; u < 4; ++u)
        H.push_back(test::random_matrix(16, 64, rng));
    const AnalogStage a = svd_phase_analog(H, c);
    EXPECT_LT((a.F_RF.cwiseAbs().array() - 0.125).abs().maxCoeff(), 1e-15);
    for (const auto &w : a.W_RF)
        EXPECT_LT((w.cwiseAbs().array() - 0.25).abs().maxCoeff(), 1e-15);
    c.tx_rf_chains = 6;
    EXPECT_THROW(svd_phase_analog(H, c), ConfigError);
}

TEST(Benchmarks, SingleUserRankOneBounds)
{
    SystemConfig c = default_config();
    c.num_users = 1;
    c.tx_rf_chains = 1;
    const ArrayGeometry g = build_wsa_geometry(c);
    const CMatrix H = assemble_cnff_channel({make_los_path(g, c, Point3(1, 6, 20))}, g, c);
    const double smax = svd(H).s(0);
    const double want = std::log2(1.0 + c.total_power_w * smax * smax / c.noise_power_w);
    EXPECT_NEAR(fully_digital_bound({H}, c), want, 1e-9 * want);
    EXPECT_NEAR(capacity_upper_bound({H}, c), want, 1e-9 * want);
}

TEST(Benchmarks, CapacityBoundDominatesFullyDigital)
{
    std::mt19937_64 rng(12);
    SystemConfig c = test::small_config(64, 4, 4, 1);
    c.noise_power_w = 1.0;
    c.total_power_w = 10.0;
    for (int t = 0; t < 20; ++t)
    {
        std::vector<CMatrix> H;
        for (int u = 0; u < 4; ++u)
            H.push_back(test::random_matrix(4, 64, rng));
        EXPECT_GE(capacity_upper_bound(H, c), fully_digital_bound(H, c) - 1e-9);
    }
}

TEST(BeamformerDump, SectionsAndRows)
{
    BeamformerSet bf;
    bf.F_RF = CMatrix::Identity(2, 2);
    bf.F_BB = CMatrix::Identity(2, 2);
    bf.W_RF = {CMatrix::Ones(1, 1), CMatrix::Ones(1, 1)};
    bf.W_BB = {CMatrix::Ones(1, 1), CMatrix::Ones(1, 1)};
    bf.power = RVector::Ones(2);
    std::ostringstream os;
    write_beamformer_dump(os, bf);
    const std::string s = os.str();
    for (const char *name : {"FRF,2,2", "FBB,2,2", "WRFu0,1,1", "WBBu1,1,1", "P,2,1"})
        EXPECT_NE(s.find(name), std::string::npos) << name;
}
