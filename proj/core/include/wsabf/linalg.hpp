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

#ifndef WSABF_LINALG_HPP
#define WSABF_LINALG_HPP

#include <Eigen/Dense>
#include <complex>

namespace wsabf
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RVector = Eigen::VectorXd;

    /// Singular values below this fraction of the largest are treated as zero.
    inline constexpr double rank_tolerance = 1e-10;

    /// M = U diag(s) V^H with a deterministic phase: every column of V is rotated so its
    /// first entry of largest modulus is real and positive (U gets the same rotation).
    struct Svd
    {
        CMatrix U;
        RVector s;
        CMatrix V;
    };

    enum class SvdVectors
    {
        thin,
        full_v,
    };

    Svd svd(const CMatrix &m, SvdVectors vectors = SvdVectors::thin);

    int numerical_rank(const RVector &singular_values, double tolerance = rank_tolerance);

    /// Each entry replaced by target_modulus * exp(j arg(entry)); exact zeros map to
    /// target_modulus (phase 0).
    CMatrix constant_modulus_projection(const CMatrix &m, double target_modulus);

    /// log2 det of a Hermitian positive-definite matrix via Cholesky.
    /// Returns false in `ok` when the factorization fails.
    double log2_det_hpd(const CMatrix &m, bool *ok = nullptr);

    /// Orthonormal basis of the column space, rank decided by rank_tolerance.
    CMatrix column_space_basis(const CMatrix &m, double tolerance = rank_tolerance);
}

#endif
