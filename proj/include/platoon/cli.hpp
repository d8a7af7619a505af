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

#pragma once

#include <string>

namespace platoon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitPropertyFailed = 2;
inline constexpr int kExitDiverged = 3;

// Each command reads a flat key=value config, writes its outputs into
// out_dir, and returns one of the exit codes above. Input problems of any
// kind (unreadable file, unknown/duplicate keys, bad values) map to
// kExitInput.
int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 bool allow_unstable);
int cmd_analyze(const std::string& config_path, const std::string& out_dir);
int cmd_design(const std::string& config_path, const std::string& out_dir);
int cmd_min_headway(const std::string& config_path, const std::string& out_dir);
int cmd_region(const std::string& config_path, const std::string& out_dir);

}  // namespace platoon::cli
