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

#ifndef SGIS_RESULT_IO_HPP
#define SGIS_RESULT_IO_HPP

#include <string>

#include "json.hpp"
#include "sgis/run_config.hpp"
#include "sgis/search.hpp"

namespace sgis {

/// Result documents are JSON with a schema tag. Primary outputs are
/// byte-deterministic for a given (config, seed); wall-clock time lives only
/// in the .meta.json sidecar.

nlohmann::json kpis_to_json(const KpiVector& kpis);
KpiVector kpis_from_json(const nlohmann::json& doc);

nlohmann::json scored_to_json(const ScoredCandidate& cand);

/// Full result document for sgis / enumerate / is-baseline runs.
/// `args` carries command-specific inputs (points_per_dim, start, ...).
nlohmann::json result_to_json(const std::string& command,
                              const RunConfig& config,
                              const nlohmann::json& args,
                              const std::string& log_digest,
                              const std::vector<double>& deployment_setting,
                              const KpiVector& baseline,
                              const SgisResult& result);

/// Serializes with sorted keys, 2-space indent, trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);

/// Parses a result document; throws on missing/foreign schema tag.
nlohmann::json read_result_file(const std::string& path);

/// Wall-clock sidecar at `<path>.meta.json`; never part of primary output.
void write_meta_sidecar(const std::string& path, double wall_seconds,
                        unsigned threads);

/// Scatter CSV: one probe per row, columns `<dim names>,is_delta_iy,
/// sim_delta_iy,at_center`. '.' decimal, shortest round-trip doubles.
void write_correlation_csv(const std::string& path,
                           const std::vector<std::string>& dim_names,
                           const CorrelationReport& report);

nlohmann::json correlation_to_json(const RunConfig& config,
                                   const nlohmann::json& args,
                                   const std::string& log_digest,
                                   const CorrelationReport& report);

/// Cross-method table. Refuses inputs whose space/objective/log digest
/// differ. A pure function of the three result documents, so the written
/// comparison is reproducible; wall times stay in the meta sidecars.
nlohmann::json compare_results(const nlohmann::json& sgis_doc,
                               const nlohmann::json& enumerate_doc,
                               const nlohmann::json& is_baseline_doc);

/// Plain-text table. `metas` optionally supplies the three sidecars (sgis,
/// enumerate, is_baseline order) feeding the wall-time column.
std::string render_compare_table(const nlohmann::json& comparison,
                                 const std::vector<nlohmann::json>& metas = {});

}  // namespace sgis

#endif  // SGIS_RESULT_IO_HPP
