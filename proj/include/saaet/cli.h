/*
 * Copyright 2026 The saaet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SAAET_CLI_H_
#define SAAET_CLI_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "saaet/core.h"
#include "saaet/harness.h"

namespace saaet {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitVerification = 4,
};

// Everything a subcommand may need, resolved from defaults, then the
// --config file, then explicit flags.
struct RunConfig {
  AttackConfig attack;
  DatasetSpec dataset;
  PoolSpec pool;
};

// Applies key=value settings. Keys mirror the AttackConfig, DatasetSpec and
// PoolSpec fields (pool fields prefixed "pool_" where ambiguous); `scales` is
// a comma-separated list and `region` a letter A-F. Throws kInvalidArgument
// on unknown keys or unparsable values.
void ApplyConfigValues(const std::map<std::string, std::string>& values,
                       RunConfig& config);

// Entry point shared by the executable and the tests. Returns an ExitCode.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace saaet

#endif  // SAAET_CLI_H_
