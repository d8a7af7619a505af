/*
 * Copyright (C) 2026 the platoon-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy of
 * the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations under
 * the License.
 */

#include <string>

#include <CLI11.hpp>

#include "platoon/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"platoon string-stability laboratory"};
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    bool allow_unstable = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "key=value config file")->required();
        cmd->add_option("--out", out, "output directory (default: .)");
    };

    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate a platoon run and grade it");
    add_common(simulate);
    simulate->add_flag("--allow-unstable", allow_unstable,
                       "run even if the gains fail the internal stability check");

    CLI::App* analyze =
        app.add_subcommand("analyze", "sweep the error propagation magnitude");
    add_common(analyze);

    CLI::App* design =
        app.add_subcommand("design", "search (alpha, b) at a fixed headway");
    add_common(design);

    CLI::App* min_headway =
        app.add_subcommand("min-headway", "bisect for the smallest feasible headway");
    add_common(min_headway);

    CLI::App* region =
        app.add_subcommand("region", "grid-scan (alpha, b) feasibility");
    add_common(region);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : platoon::cli::kExitInput;
    }

    if (simulate->parsed())
        return platoon::cli::cmd_simulate(config, out, allow_unstable);
    if (analyze->parsed()) return platoon::cli::cmd_analyze(config, out);
    if (design->parsed()) return platoon::cli::cmd_design(config, out);
    if (min_headway->parsed()) return platoon::cli::cmd_min_headway(config, out);
    if (region->parsed()) return platoon::cli::cmd_region(config, out);
    return platoon::cli::kExitInput;
}
