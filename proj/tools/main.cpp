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

#include "experiment_spec.hpp"
#include "runner.hpp"

#include "wsabf/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace
{
    struct Overrides
    {
        std::optional<std::uint64_t> seed;
        std::optional<std::string> out;
        std::optional<int> drops;
        std::optional<int> threads;
    };

    wsabf::cli::ExperimentSpec load(const std::string &path, const Overrides &o)
    {
        auto spec = wsabf::cli::parse_spec_file(path);
        if (o.seed)
            spec.seed = *o.seed;
        if (o.out)
            spec.output_dir = *o.out;
        if (o.drops)
            spec.drops = *o.drops;
        if (o.threads)
            spec.threads = *o.threads;
        return spec;
    }

    int report_findings(const std::vector<std::string> &findings)
    {
        for (const auto &f : findings)
            std::cerr << "error: " << f << '\n';
        return findings.empty() ? 0 : 2;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Widely-spaced-array hybrid beamforming experiments"};
    app.require_subcommand(1);

    std::string spec_path;
    Overrides o;
    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("spec", spec_path, "experiment spec (INI)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", o.seed, "master seed");
        cmd->add_option("--out", o.out, "output directory");
        cmd->add_option("--drops", o.drops, "channel drops per point");
        cmd->add_option("--threads", o.threads, "worker threads");
    };
    auto *run = app.add_subcommand("run", "run an experiment and write its CSV files");
    auto *validate = app.add_subcommand("validate", "check a spec without running it");
    auto *geometry = app.add_subcommand("geometry", "print the antenna positions of a spec's array");
    add_common(run);
    add_common(validate);
    add_common(geometry);

    CLI11_PARSE(app, argc, argv);

    try
    {
        const auto spec = load(spec_path, o);
        if (int rc = report_findings(wsabf::cli::validate_spec(spec)); rc != 0)
            return rc;
        if (validate->parsed())
        {
            std::cout << "ok: " << wsabf::cli::kind_name(spec.kind) << " '" << spec.name << "'\n";
            return 0;
        }
        if (geometry->parsed())
        {
            wsabf::cli::write_spec_geometry(spec, std::cout);
            return 0;
        }
        const auto outcome = wsabf::cli::run_spec(spec, std::cout);
        for (const auto &f : outcome.files)
            std::cout << "wrote " << f.string() << '\n';
        if (outcome.failed_drops > 0)
            std::cout << outcome.failed_drops << " drop(s) failed; see the *_drops.csv rows with ok=0\n";
        return 0;
    }
    catch (const wsabf::cli::SpecError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
