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

#ifndef WSABF_TOOLS_RUNNER_HPP
#define WSABF_TOOLS_RUNNER_HPP

#include "experiment_spec.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace wsabf::cli
{
    struct RunOutcome
    {
        std::vector<std::filesystem::path> files;
        int failed_drops = 0;
    };

    /// Runs a validated spec, writes its CSV files into spec.output_dir and prints one
    /// summary line per sweep point to `log`. Throws SpecError for invalid specs or
    /// unwritable outputs.
    RunOutcome run_spec(const ExperimentSpec &spec, std::ostream &log);

    /// Antenna table of the spec's base architecture.
    void write_spec_geometry(const ExperimentSpec &spec, std::ostream &os);

    /// printf("%.9g") so CSV bodies are byte-stable across runs.
    std::string fmt(double v);
}

#endif
