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

#include "sgis/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sgis/parallel.hpp"

namespace sgis {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

DenseGridMode resolve_mode(DenseGridMode mode, std::size_t dims) {
  if (mode != DenseGridMode::automatic) return mode;
  return dims <= 3 ? DenseGridMode::full_cartesian : DenseGridMode::axis_sweeps;
}

}  // namespace

double gaussian_logdensity(const std::vector<double>& x,
                           const std::vector<double>& mean,
                           const std::vector<double>& sigma) {
  if (x.size() != mean.size() || x.size() != sigma.size()) {
    throw std::invalid_argument("gaussian_logdensity length mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(sigma[j] > 0.0)) {
      throw std::invalid_argument("gaussian_logdensity needs sigma > 0");
    }
    const double z = (x[j] - mean[j]) / sigma[j];
    total += -kHalfLog2Pi - std::log(sigma[j]) - 0.5 * z * z;
  }
  return total;
}

double importance_weight(const std::vector<double>& action,
                         const RandomizationPolicy& target,
                         double behavior_logdensity, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("cap must be > 0");
  if (!std::isfinite(behavior_logdensity)) {
    throw std::invalid_argument("behavior log-density must be finite");
  }
  const double target_logdensity =
      gaussian_logdensity(action, target.center.values(), target.sigma);
  return std::min(cap, std::exp(target_logdensity - behavior_logdensity));
}

IsEstimate is_estimate(const ArtificialDataset& data,
                       const RandomizationPolicy& target, double cap,
                       Normalize normalize, CostLedger& ledger) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("is_estimate needs a nonempty dataset");
  if (!(cap > 0.0)) throw std::invalid_argument("cap must be > 0");

  double sum_w = 0.0;
  double sum_w2 = 0.0;
  double max_w = 0.0;
  std::size_t n_capped = 0;
  double sum_rpm = 0.0;
  double sum_clicks = 0.0;
  double sum_iy = 0.0;
  double sum_revenue = 0.0;

  for (const ArtificialRecord& rec : data.records) {
    if (!std::isfinite(rec.behavior_logdensity)) {
      throw std::invalid_argument("record has non-finite behavior log-density");
    }
    const double target_ld = gaussian_logdensity(
        rec.action_unclipped, target.center.values(), target.sigma);
    const double raw = std::exp(target_ld - rec.behavior_logdensity);
    const double w = std::min(cap, raw);
    if (raw > cap) ++n_capped;
    sum_w += w;
    sum_w2 += w * w;
    max_w = std::max(max_w, w);
    sum_rpm += w * rec.kpis.rpm;
    sum_clicks += w * rec.kpis.clicks;
    sum_iy += w * rec.kpis.iy;
    sum_revenue += w * rec.kpis.revenue;
  }

  double denom;
  if (normalize == Normalize::self_normalized) {
    if (sum_w == 0.0) {
      throw std::runtime_error(
          "self-normalized estimate undefined: all weights underflowed to 0");
    }
    denom = sum_w;
  } else {
    denom = static_cast<double>(n);
  }

  IsEstimate est{target.center, KpiVector{}, 0.0, 0.0, 0.0, 0.0};
  est.kpis.rpm = sum_rpm / denom;
  est.kpis.clicks = sum_clicks / denom;
  est.kpis.iy = sum_iy / denom;
  est.kpis.revenue = sum_revenue / denom;
  est.kpis.n_sessions = static_cast<std::int64_t>(n);
  est.ess = sum_w2 > 0.0 ? (sum_w * sum_w) / sum_w2 : 0.0;
  est.mean_weight = sum_w / static_cast<double>(n);
  est.max_weight = max_w;
  est.capped_fraction = static_cast<double>(n_capped) / static_cast<double>(n);

  ledger.add_reweighs(n);
  ledger.add_settings_is_evaluated(1);
  return est;
}

std::vector<Setting> dense_grid(const Setting& center,
                                const RandomizationPolicy& policy,
                                const DenseGridSpec& spec,
                                const ParameterSpace& space) {
  if (spec.d < 2) throw std::invalid_argument("dense grid needs d >= 2");
  if (!(spec.half_width_sigmas > 0.0)) {
    throw std::invalid_argument("dense grid needs half_width_sigmas > 0");
  }
  const std::size_t m = space.dims();
  if (center.size() != m || policy.sigma.size() != m) {
    throw std::invalid_argument("dense grid center/sigma dimension mismatch");
  }

  // Per-dimension sweep values: d equally spaced points across
  // center +- h*sigma, clipped, exact duplicates collapsed. The midpoint is
  // exactly the center when d is odd.
  auto sweep_values = [&](std::size_t j) {
    std::vector<double> vals;
    vals.reserve(spec.d);
    const double half = spec.half_width_sigmas * policy.sigma[j];
    for (std::size_t i = 0; i < spec.d; ++i) {
      const double t =
          2.0 * static_cast<double>(i) / static_cast<double>(spec.d - 1) - 1.0;
      double v = center[j] + t * half;
      v = std::clamp(v, space.bounds[j].lo, space.bounds[j].hi);
      if (vals.empty() || v != vals.back()) vals.push_back(v);
    }
    return vals;
  };

  std::vector<Setting> grid;
  const DenseGridMode mode = resolve_mode(spec.mode, m);

  if (mode == DenseGridMode::full_cartesian) {
    std::vector<std::vector<double>> axes;
    axes.reserve(m);
    std::size_t total = 1;
    for (std::size_t j = 0; j < m; ++j) {
      axes.push_back(sweep_values(j));
      total *= axes.back().size();
    }
    grid.reserve(total);
    std::vector<std::size_t> idx(m, 0);
    std::vector<double> point(m);
    for (std::size_t count = 0; count < total; ++count) {
      for (std::size_t j = 0; j < m; ++j) point[j] = axes[j][idx[j]];
      grid.push_back(make_setting(space, point).setting);
      for (std::size_t j = m; j-- > 0;) {
        if (++idx[j] < axes[j].size()) break;
        idx[j] = 0;
      }
    }
  } else {
    std::set<std::vector<double>> seen;
    for (std::size_t j = 0; j < m; ++j) {
      for (double v : sweep_values(j)) {
        std::vector<double> point = center.values();
        point[j] = v;
        if (seen.insert(point).second) {
          grid.push_back(make_setting(space, std::move(point)).setting);
        }
      }
    }
  }
  return grid;
}

std::vector<IsEstimate> is_art(const ArtificialDataset& data,
                               const Setting& center,
                               const DenseGridSpec& spec, double cap,
                               Normalize normalize, const ParameterSpace& space,
                               CostLedger& ledger, unsigned threads) {
  if (!(data.policy.center == center)) {
    throw std::invalid_argument(
        "is_art center must equal the dataset's randomization center");
  }
  const std::vector<Setting> grid = dense_grid(center, data.policy, spec, space);

  std::vector<IsEstimate> out(
      grid.size(), IsEstimate{center, KpiVector{}, 0.0, 0.0, 0.0, 0.0});
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const RandomizationPolicy target{grid[i], data.policy.sigma,
                                     data.policy.clip_to_bounds};
    out[i] = is_estimate(data, target, cap, normalize, ledger);
  });
  return out;
}

}  // namespace sgis
