// SPDX-License-Identifier: Apache-2.0
//
// mvlink - multi-vehicular hybrid MIMO link-level simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvlink/config.hpp"
#include "mvlink/scenario.hpp"
#include "mvlink/sweep.hpp"

namespace
{

struct CliOverrides
{
    std::string config_path;
    std::string preset;
    std::string estimators;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t threads = 0;
};

void add_common_flags(CLI::App* cmd, CliOverrides& overrides)
{
    cmd->add_option("--config", overrides.config_path, "Experiment configuration file (JSON)");
    cmd->add_option("--preset", overrides.preset, "Scenario preset override")
        ->check(CLI::IsMember({"s1", "s2"}));
    cmd->add_option("--estimators", overrides.estimators,
                    "Comma-separated estimator set (UML,JS,DS,PERFECT_CSI)");
    cmd->add_option("--out", overrides.out, "Output CSV path");
    cmd->add_option("--seed", overrides.seed, "Master seed override")
        ->each([&overrides](const std::string&) { overrides.seed_set = true; });
    cmd->add_option("--threads", overrides.threads, "Worker threads for trial evaluation");
}

mvlink::ExperimentConfig resolve_config(const CliOverrides& overrides)
{
    mvlink::ExperimentConfig cfg = overrides.config_path.empty()
                                       ? mvlink::default_config()
                                       : mvlink::load_config(overrides.config_path);
    if (!overrides.preset.empty())
    {
        cfg.preset = overrides.preset;
        const mvlink::ScenarioPreset preset = mvlink::scenario_preset(cfg.preset);
        cfg.env = preset.env;
        cfg.region = preset.region;
    }
    if (!overrides.estimators.empty())
    {
        cfg.estimators.clear();
        std::istringstream stream(overrides.estimators);
        std::string token;
        while (std::getline(stream, token, ','))
        {
            if (!token.empty())
            {
                cfg.estimators.push_back(mvlink::estimator_from_string(token));
            }
        }
    }
    if (!overrides.out.empty())
    {
        cfg.out_path = overrides.out;
    }
    if (overrides.seed_set)
    {
        cfg.master_seed = overrides.seed;
    }
    if (overrides.threads != 0)
    {
        cfg.threads = overrides.threads;
    }
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mvlink: multi-vehicular hybrid MIMO link simulation"};
    app.require_subcommand(1);

    CliOverrides overrides;
    std::string beams_path = "beams.mvl";
    std::string models_path = "models.mvl";

    CLI::App* align = app.add_subcommand("align", "Run MV beam alignment, store the beam list");
    add_common_flags(align, overrides);
    align->add_option("--beams", beams_path, "Beam-list artifact path");

    CLI::App* fit = app.add_subcommand("fit", "Fit subspace models from stored beams");
    add_common_flags(fit, overrides);
    fit->add_option("--beams", beams_path, "Beam-list artifact path");
    fit->add_option("--models", models_path, "Model artifact path");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Evaluate stored beams and models, write CSV");
    add_common_flags(evaluate, overrides);
    evaluate->add_option("--beams", beams_path, "Beam-list artifact path");
    evaluate->add_option("--models", models_path, "Model artifact path");

    CLI::App* sweep = app.add_subcommand("sweep", "Full alignment + fit + evaluation sweep");
    add_common_flags(sweep, overrides);

    CLI::App* show = app.add_subcommand("show-config", "Print the effective configuration");
    add_common_flags(show, overrides);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (show->parsed())
        {
            std::cout << mvlink::config_to_json(resolve_config(overrides));
            return 0;
        }
        if (align->parsed())
        {
            const mvlink::ExperimentConfig cfg = resolve_config(overrides);
            mvlink::run_align_stage(cfg, beams_path);
            std::cout << "beam list written to " << beams_path << "\n";
            return 0;
        }
        if (fit->parsed())
        {
            const mvlink::ExperimentConfig cfg = resolve_config(overrides);
            mvlink::run_fit_stage(cfg, beams_path, models_path);
            std::cout << "models written to " << models_path << "\n";
            return 0;
        }
        if (evaluate->parsed())
        {
            const mvlink::ExperimentConfig cfg = resolve_config(overrides);
            const mvlink::SweepResult result =
                mvlink::run_evaluate_stage(cfg, beams_path, models_path);
            mvlink::write_csv_file(result, cfg.out_path);
            std::cout << "results written to " << cfg.out_path << "\n";
            return 0;
        }
        if (sweep->parsed())
        {
            const mvlink::ExperimentConfig cfg = resolve_config(overrides);
            const mvlink::SweepResult result = mvlink::run_sweep(cfg);
            mvlink::write_csv_file(result, cfg.out_path);
            std::cout << "results written to " << cfg.out_path << "\n";
            return 0;
        }
    }
    catch (const std::exception& err)
    {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
