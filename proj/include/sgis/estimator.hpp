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

#ifndef SGIS_ESTIMATOR_HPP
#define SGIS_ESTIMATOR_HPP

#include <vector>

#include "sgis/domain.hpp"
#include "sgis/simulator.hpp"

namespace sgis {

/// Importance-sampling estimate of KPIs at a counterfactual setting, with
/// weight diagnostics.
struct IsEstimate {
  Setting setting;
  KpiVector kpis;
  double ess = 0.0;              // (sum w)^2 / sum w^2
  double mean_weight = 0.0;
  double max_weight = 0.0;
  double capped_fraction = 0.0;  // share of records hitting the cap
};

/// Shape of the IS sweep around a randomization center: d points per
/// dimension spanning center +- half_width_sigmas * sigma.
struct DenseGridSpec {
  std::size_t d = 25;
  double half_width_sigmas = 1.0;
  DenseGridMode mode = DenseGridMode::automatic;
};

/// Sum over dimensions of the univariate normal log-pdf. Throws on length
/// mismatch or non-positive sigma.
double gaussian_logdensity(const std::vector<double>& x,
                           const std::vector<double>& mean,
                           const std::vector<double>& sigma);

/// min(cap, exp(target log-density at the logged action - behavior
/// log-density)). `action` is the unclipped logged draw; target and behavior
/// differ only in their centers unless the caller builds them otherwise.
double importance_weight(const std::vector<double>& action,
                         const RandomizationPolicy& target,
                         double behavior_logdensity, double cap);

/// Reweights the dataset toward `target`. Plain: mean of w_i * kpi_i.
/// Self-normalized: sum(w_i * kpi_i) / sum(w_i), exact for constant KPIs and
/// bounded by the per-record range, both up to rounding of the weighted
/// ratio. Adds N reweighs and one evaluated setting to the ledger.
IsEstimate is_estimate(const ArtificialDataset& data,
                       const RandomizationPolicy& target, double cap,
                       Normalize normalize, CostLedger& ledger);

/// Grid of candidate settings inside the randomization neighborhood of
/// `center`. Full-cartesian: d^m points. Axis sweeps: d points per dimension
/// holding the others at the center. Values are clipped to bounds and exact
/// duplicates removed; ordering is lexicographic and deterministic.
/// `automatic` resolves to full-cartesian for m <= 3, axis sweeps above.
std::vector<Setting> dense_grid(const Setting& center,
                                const RandomizationPolicy& policy,
                                const DenseGridSpec& spec,
                                const ParameterSpace& space);

/// The IS sweep: dense_grid around the dataset's center, then one
/// is_estimate per grid point (targets share the behavior sigma). Output
/// order matches grid order for any thread count.
std::vector<IsEstimate> is_art(const ArtificialDataset& data,
                               const Setting& center,
                               const DenseGridSpec& spec, double cap,
                               Normalize normalize, const ParameterSpace& space,
                               CostLedger& ledger, unsigned threads = 1);

}  // namespace sgis

#endif  // SGIS_ESTIMATOR_HPP
