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

#ifndef SGIS_SEARCH_HPP
#define SGIS_SEARCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "sgis/domain.hpp"
#include "sgis/estimator.hpp"
#include "sgis/simulator.hpp"

namespace sgis {

/// Constraint on a KPI's percent delta against the deployment baseline.
struct ObjectiveConstraint {
  Kpi kpi;
  enum class Relation { le, ge } relation;
  double threshold_pct;
};

/// Maximize one KPI's percent delta subject to delta constraints. The
/// baseline is the directly simulated KPI vector of the deployment setting.
struct ObjectiveSpec {
  Kpi maximize = Kpi::rpm;
  std::vector<ObjectiveConstraint> constraints;
  KpiVector baseline;
};

enum class CandidateSource { direct_simulation, is_estimate };

/// A setting with its KPIs, deltas and objective score. score is empty when
/// any constraint is violated; infeasible candidates never enter a pool.
struct ScoredCandidate {
  Setting setting;
  KpiVector kpis;
  KpiDelta delta;
  std::optional<double> score;
  CandidateSource source = CandidateSource::direct_simulation;
};

/// Weight diagnostics summarizing one center's IS sweep.
struct CenterDiagnostics {
  Setting center;
  std::size_t n_records = 0;
  std::size_t n_grid_points = 0;
  double min_ess = 0.0;
  double max_weight = 0.0;
  double mean_capped_fraction = 0.0;
};

struct IterationTrace {
  std::size_t iteration = 0;  // 1-based
  std::vector<ScoredCandidate> is_topk;
  std::vector<CenterDiagnostics> diagnostics;
  std::vector<ScoredCandidate> resimulated;  // direct scores of IS winners
  std::optional<double> best_score_after;    // best pooled direct score
  std::size_t n_resimulated = 0;  // uncached direct evaluations this round
  bool early_stopped = false;
  bool empty_pool = false;
};

struct SgisResult {
  std::vector<ScoredCandidate> best_pool;  // direct-sourced, score descending
  std::size_t iterations_run = 0;
  CostLedger ledger;
  std::vector<IterationTrace> trace;
  std::optional<double> initial_best_score;  // before any refinement
  std::size_t initial_grid_size = 0;
  bool initial_pool_empty = false;

  std::optional<double> best_score() const {
    return best_pool.empty() ? std::nullopt : best_pool.front().score;
  }
};

/// Cartesian grid of c equally spaced points per dimension spanning the
/// bounds inclusive, in lexicographic order. Throws when c^m exceeds
/// grid_point_cap.
std::vector<Setting> coarse_grid(const ParameterSpace& space, std::size_t c,
                                 std::size_t grid_point_cap = 1000000);

/// Score of a delta vector under the objective; empty when infeasible.
std::optional<double> objective_score(const KpiDelta& delta,
                                      const ObjectiveSpec& objective);

/// Computes delta and score for a KPI vector. Throws if any baseline
/// component is zero.
std::optional<double> objective_score(const KpiVector& kpis,
                                      const ObjectiveSpec& objective);

ScoredCandidate make_scored(Setting setting, const KpiVector& kpis,
                            CandidateSource source,
                            const ObjectiveSpec& objective);

/// Feasible candidates ranked by score descending, ties broken by
/// lexicographically smaller setting. Identical settings are collapsed,
/// keeping direct-simulation entries over IS ones. An empty return is the
/// empty-pool signal.
std::vector<ScoredCandidate> top_k(const std::vector<ScoredCandidate>& candidates,
                                   std::size_t k);

/// The full search: simulate a coarse grid, seed IS sweeps at the top-k
/// settings, re-simulate the IS winners, keep the best directly verified
/// pool, iterate up to config.u times with early stopping on score gain
/// below config.epsilon.
SgisResult sgis(const SessionLog& log, const ParameterSpace& space,
                const UserResponseModel& model, const ObjectiveSpec& objective,
                const SgisConfig& config, unsigned threads = 1);

/// Full-enumeration reference: simulate every point of a points_per_dim^m
/// grid directly. Expensive; this is the oracle the cheap searches are
/// judged against.
SgisResult enumerate_baseline(const SessionLog& log, const ParameterSpace& space,
                              const UserResponseModel& model,
                              const ObjectiveSpec& objective,
                              std::size_t points_per_dim,
                              const SgisConfig& config, CostLedger& ledger,
                              unsigned threads = 1);

/// Single-start iterative IS: randomize around the current center, move to
/// the IS-best feasible setting, verify it by direct simulation, repeat.
SgisResult iterative_is_baseline(const SessionLog& log,
                                 const ParameterSpace& space,
                                 const UserResponseModel& model,
                                 const ObjectiveSpec& objective,
                                 const Setting& start, const SgisConfig& config,
                                 unsigned threads = 1);

struct ProbePair {
  Setting setting;
  double is_delta_iy = 0.0;
  double sim_delta_iy = 0.0;
  bool at_center = false;  // excluded from the correlation
};

struct CorrelationReport {
  std::vector<ProbePair> points;
  std::optional<double> pearson_r;
  std::string undefined_reason;  // set when pearson_r is empty
  CostLedger ledger;
};

/// Samples n_probe settings uniformly within +-1 sigma of the center and
/// compares the IS-estimated IY delta against the directly simulated one.
CorrelationReport correlation_report(const SessionLog& log,
                                     const ParameterSpace& space,
                                     const UserResponseModel& model,
                                     const Setting& center,
                                     const RandomizationPolicy& policy,
                                     std::size_t n_probe,
                                     const SgisConfig& config,
                                     std::uint64_t seed, unsigned threads = 1);

}  // namespace sgis

#endif  // SGIS_SEARCH_HPP
