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

#include "wsabf/linalg.hpp"

#include <cmath>

namespace wsabf
{
    Svd svd(const CMatrix &m, SvdVectors vectors)
    {
        const unsigned opts = vectors == SvdVectors::thin ? (Eigen::ComputeThinU | Eigen::ComputeThinV)
                                                          : (Eigen::ComputeThinU | Eigen::ComputeFullV);
        Eigen::BDCSVD<CMatrix> dec(m, opts);
        Svd out{dec.matrixU(), dec.singularValues(), dec.matrixV()};

        for (Eigen::Index c = 0; c < out.V.cols(); ++c)
        {
            Eigen::Index best = 0;
            double best_abs = -1.0;
            for (Eigen::Index r = 0; r < out.V.rows(); ++r)
            {
                const double a = std::abs(out.V(r, c));
                if (a > best_abs * (1.0 + 1e-12))
                {
                    best_abs = a;
                    best = r;
                }
            }
            if (best_abs <= 0.0)
                continue;
            const cdouble rot = std::conj(out.V(best, c)) / best_abs;
            out.V.col(c) *= rot;
            if (c < out.U.cols())
                out.U.col(c) *= rot;
        }
        return out;
    }

    int numerical_rank(const RVector &s, double tolerance)
    {
        if (s.size() == 0)
            return 0;
        const double smax = s.maxCoeff();
        if (!(smax > 0.0))
            return 0;
        int r = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) >= tolerance * smax)
                ++r;
        return r;
    }

    CMatrix constant_modulus_projection(const CMatrix &m, double target_modulus)
    {
        return m.unaryExpr([target_modulus](const cdouble &z) {
            const double a = std::abs(z);
            return a > 0.0 ? z * (target_modulus / a) : cdouble(target_modulus, 0.0);
        });
    }

    double log2_det_hpd(const CMatrix &m, bool *ok)
    {
        Eigen::LLT<CMatrix> llt(m);
        if (llt.info() != Eigen::Success)
        {
            if (ok)
                *ok = false;
            return 0.0;
        }
        if (ok)
            *ok = true;
        double acc = 0.0;
        const auto &l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            acc += std::log2(l(i, i).real());
        return 2.0 * acc;
    }

    CMatrix column_space_basis(const CMatrix &m, double tolerance)
    {
        if (m.cols() == 0 || m.rows() == 0)
            return CMatrix(m.rows(), 0);
        Svd d = svd(m);
        const int r = numerical_rank(d.s, tolerance);
        return d.U.leftCols(r);
    }
}
