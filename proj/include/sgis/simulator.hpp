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

#ifndef SGIS_SIMULATOR_HPP
#define SGIS_SIMULATOR_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sgis/domain.hpp"

namespace sgis {

/// Parametric user click model applied to a replayed session.
/// click_weights are logit coefficients over [base_click_logit, quality,
/// position_index]; the resulting probability is further multiplied by
/// position_decay^position_index.
struct UserResponseModel {
  std::vector<double> click_weights{1.0, 2.0, -0.35};
  double position_decay = 0.85;
};

UserResponseModel make_user_response_model(std::vector<double> click_weights,
                                           double position_decay);

/// One shown slot in a replayed session.
struct ShownAd {
  std::size_t candidate_index;
  double price_charged;
  double click_prob;
};

/// The outcome of replaying one session under a counterfactual setting.
struct CounterfactualSession {
  std::int64_t session_id = 0;
  std::vector<ShownAd> shown_ads;
};

/// One randomized (session, action) draw plus everything IS needs later:
/// the executed (clipped) action, the raw draw the behavior density refers
/// to, and the single-session KPIs observed under the executed action.
struct ArtificialRecord {
  std::int64_t session_id;
  Setting action;                        // clipped into bounds
  std::vector<double> action_unclipped;  // raw Gaussian draw
  double behavior_logdensity;
  KpiVector kpis;                        // n_sessions == 1
};

struct ArtificialDataset {
  RandomizationPolicy policy;
  std::vector<ArtificialRecord> records;

  std::size_t size() const { return records.size(); }
};

/// Synthesizes a deterministic session log: `n` sessions with 5-20 candidate
/// ads each, bids lognormal, quality uniform(0,1), click logits normal.
/// Identical (n, seed) pairs reproduce identical logs for any thread count.
SessionLog generate_sessions(std::size_t n, const ParameterSpace& space,
                             std::uint64_t seed);

/// Replays one session under `setting` through the fixed ranking/auction
/// graph:
///   1. score = bid^w_b * quality^w_q with w_b = setting[0] and
///      w_q = setting[1] (w_q = 1 when the space is one-dimensional)
///   2. rank by descending score, ties broken by candidate index
///   3. show ceil(L) ads, L = 1 + 4*sigmoid(setting[2]) for m >= 3, else 3
///   4. generalized second price per shown ad, capped at own bid; an ad with
///      no runner-up pays the reserve price 0
///   5. click probability from the response model with position decay
CounterfactualSession replay(const Session& session, const Setting& setting,
                             const UserResponseModel& model);

/// Per-session KPI aggregation of a replayed session (n_sessions = 1).
KpiVector session_kpis(const CounterfactualSession& cf);

/// Mean of per-session KPIs over the whole log. Accumulates in session_id
/// order so the result is identical for any thread count or log permutation.
/// Adds |log| replays to the ledger.
KpiVector evaluate_setting(const SessionLog& log, const Setting& setting,
                           const UserResponseModel& model, CostLedger& ledger,
                           unsigned threads = 1);

/// evaluate_setting for a batch; output order matches input order.
std::vector<std::pair<Setting, KpiVector>> simulate(
    const SessionLog& log, const std::vector<Setting>& settings,
    const UserResponseModel& model, CostLedger& ledger, unsigned threads = 1);

/// Draws n_artificial (session, action) pairs — sessions uniform with
/// replacement, actions Gaussian around the policy center — and replays each
/// once. Deterministic given seed. Adds n_artificial replays to the ledger.
ArtificialDataset collect_artificial(const SessionLog& log,
                                     const RandomizationPolicy& policy,
                                     std::size_t n_artificial,
                                     const UserResponseModel& model,
                                     std::uint64_t seed, CostLedger& ledger,
                                     const ParameterSpace& space,
                                     unsigned threads = 1);

}  // namespace sgis

#endif  // SGIS_SIMULATOR_HPP
