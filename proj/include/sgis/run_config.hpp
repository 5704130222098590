// Copyright 2025 The SGIS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SGIS_RUN_CONFIG_HPP
#define SGIS_RUN_CONFIG_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "sgis/domain.hpp"
#include "sgis/search.hpp"
#include "sgis/simulator.hpp"

namespace sgis {

/// Everything a run needs besides the session log: the parameter space, the
/// response model, the deployment setting whose KPIs anchor all deltas, the
/// objective, and the algorithm knobs. Every key except `seed` has a
/// default, so `{}` (plus a --seed) describes the stock synthetic problem.
struct RunConfig {
  ParameterSpace space;
  UserResponseModel model;
  std::vector<double> deployment_setting;  // raw; clipped where used
  Kpi maximize = Kpi::rpm;
  std::vector<ObjectiveConstraint> constraints;
  SgisConfig algo;  // m and sigma sized to the space
  bool seed_in_file = false;
};

/// The stock three-dimensional problem; all config keys default to this.
RunConfig default_run_config();

/// Parses a config JSON file over the defaults. Unknown keys anywhere are
/// errors. `cap` accepts a number or the string "inf".
RunConfig read_run_config(const std::string& path);
RunConfig parse_run_config(const nlohmann::json& doc);

/// Canonical echo of a resolved config (seed included) for result files.
nlohmann::json run_config_to_json(const RunConfig& config);

}  // namespace sgis

#endif  // SGIS_RUN_CONFIG_HPP
