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

#ifndef WSABF_ERRORS_HPP
#define WSABF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wsabf
{
    /// Invalid or inconsistent SystemConfig / experiment parameters.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// The constructed array exceeds the configured aperture limit.
    class ApertureError : public std::runtime_error
    {
    public:
        ApertureError(double aperture_m, double limit_m);
        double aperture() const noexcept { return aperture_; }
        double limit() const noexcept { return limit_; }

    private:
        double aperture_;
        double limit_;
    };

    /// Zero-distance or otherwise degenerate user/antenna geometry.
    class GeometryError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Block diagonalization has no room for a user's streams.
    class RankDeficiencyError : public std::runtime_error
    {
    public:
        RankDeficiencyError(int user, int null_dim, int streams);
        int user() const noexcept { return user_; }

    private:
        int user_;
    };

    /// Internal shape mismatch while assembling matrices.
    class AssemblyError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };
}

#endif
