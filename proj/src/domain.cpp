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

#include "sgis/domain.hpp"

#include <algorithm>
#include <cmath>

namespace sgis {

ParameterSpace make_parameter_space(std::vector<std::string> names,
                                    std::vector<Bounds> bounds) {
  if (bounds.empty()) {
    throw std::invalid_argument("parameter space needs at least one dimension");
  }
  if (names.size() != bounds.size()) {
    throw std::invalid_argument(
        "parameter space has " + std::to_string(names.size()) + " names but " +
        std::to_string(bounds.size()) + " bounds");
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw std::invalid_argument("dimension '" + names[i] +
                                  "' needs finite lo < hi");
    }
  }
  return ParameterSpace{std::move(names), std::move(bounds)};
}

MakeSettingResult make_setting(const ParameterSpace& space,
                               std::vector<double> values) {
  if (values.size() != space.dims()) {
    throw std::invalid_argument(
        "setting has " + std::to_string(values.size()) +
        " values; space has " + std::to_string(space.dims()) + " dimensions");
  }
  bool clipped = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("setting component " + std::to_string(i) +
                                  " is not finite");
    }
    const double v = std::clamp(values[i], space.bounds[i].lo, space.bounds[i].hi);
    if (v != values[i]) {
      clipped = true;
      values[i] = v;
    }
  }
  return MakeSettingResult{Setting(std::move(values)), clipped};
}

bool setting_less(const Setting& a, const Setting& b) {
  return std::lexicographical_compare(a.values().begin(), a.values().end(),
                                      b.values().begin(), b.values().end());
}

double kpi_component(const KpiVector& k, Kpi which) {
  switch (which) {
    case Kpi::rpm:
      return k.rpm;
    case Kpi::clicks:
      return k.clicks;
    case Kpi::iy:
      return k.iy;
    case Kpi::revenue:
      return k.revenue;
  }
  throw std::logic_error("unknown KPI");
}

Kpi kpi_from_name(const std::string& name) {
  if (name == "rpm") return Kpi::rpm;
  if (name == "clicks") return Kpi::clicks;
  if (name == "iy") return Kpi::iy;
  if (name == "revenue") return Kpi::revenue;
  throw std::invalid_argument("unknown KPI name '" + name +
                              "' (expected rpm, clicks, iy or revenue)");
}

std::string kpi_name(Kpi which) {
  switch (which) {
    case Kpi::rpm:
      return "rpm";
    case Kpi::clicks:
      return "clicks";
    case Kpi::iy:
      return "iy";
    case Kpi::revenue:
      return "revenue";
  }
  throw std::logic_error("unknown KPI");
}

namespace {

double percent_delta(double candidate, double baseline, const char* name) {
  if (baseline == 0.0) {
    throw std::invalid_argument(std::string("baseline KPI '") + name +
                                "' is zero; percent delta undefined");
  }
  return 100.0 * (candidate - baseline) / baseline;
}

}  // namespace

KpiDelta kpi_delta(const KpiVector& candidate, const KpiVector& baseline) {
  KpiDelta d;
  d.d_rpm = percent_delta(candidate.rpm, baseline.rpm, "rpm");
  d.d_clicks = percent_delta(candidate.clicks, baseline.clicks, "clicks");
  d.d_iy = percent_delta(candidate.iy, baseline.iy, "iy");
  d.d_revenue = percent_delta(candidate.revenue, baseline.revenue, "revenue");
  return d;
}

double delta_component(const KpiDelta& d, Kpi which) {
  switch (which) {
    case Kpi::rpm:
      return d.d_rpm;
    case Kpi::clicks:
      return d.d_clicks;
    case Kpi::iy:
      return d.d_iy;
    case Kpi::revenue:
      return d.d_revenue;
  }
  throw std::logic_error("unknown KPI");
}

RandomizationPolicy make_randomization_policy(const ParameterSpace& space,
                                              Setting center,
                                              std::vector<double> sigma,
                                              bool clip_to_bounds) {
  if (center.size() != space.dims()) {
    throw std::invalid_argument("policy center dimension mismatch");
  }
  if (sigma.size() != space.dims()) {
    throw std::invalid_argument("policy sigma dimension mismatch");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("policy sigma components must be positive");
    }
  }
  return RandomizationPolicy{std::move(center), std::move(sigma),
                             clip_to_bounds};
}

void validate_config(const SgisConfig& config, const ParameterSpace& space) {
  if (config.m != space.dims()) {
    throw std::invalid_argument("config.m does not match space dimensions");
  }
  if (config.c < 2) throw std::invalid_argument("config.c must be >= 2");
  if (config.d < 2) throw std::invalid_argument("config.d must be >= 2");
  if (config.k < 1) throw std::invalid_argument("config.k must be >= 1");
  if (config.epsilon < 0.0 || !std::isfinite(config.epsilon)) {
    throw std::invalid_argument("config.epsilon must be finite and >= 0");
  }
  if (!(config.cap > 0.0)) {
    throw std::invalid_argument("config.cap must be > 0 (may be inf)");
  }
  if (config.n_sessions < 1) {
    throw std::invalid_argument("config.n_sessions must be >= 1");
  }
  if (config.n_artificial < 1) {
    throw std::invalid_argument("config.n_artificial must be >= 1");
  }
  if (config.sigma.size() != space.dims()) {
    throw std::invalid_argument("config.sigma must have one entry per dimension");
  }
  for (double s : config.sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("config.sigma components must be positive");
    }
  }
  if (!(config.half_width_sigmas > 0.0)) {
    throw std::invalid_argument("config.half_width_sigmas must be > 0");
  }
  if (config.grid_point_cap < 1) {
    throw std::invalid_argument("config.grid_point_cap must be >= 1");
  }
}

CostLedger& CostLedger::operator=(const CostLedger& other) {
  replay_count_ = other.replay_count_.load();
  is_reweigh_count_ = other.is_reweigh_count_.load();
  settings_simulated_ = other.settings_simulated_.load();
  settings_is_evaluated_ = other.settings_is_evaluated_.load();
  iterations_ = other.iterations_.load();
  return *this;
}

bool operator==(const CostLedger& a, const CostLedger& b) {
  return a.replay_count() == b.replay_count() &&
         a.is_reweigh_count() == b.is_reweigh_count() &&
         a.settings_simulated() == b.settings_simulated() &&
         a.settings_is_evaluated() == b.settings_is_evaluated() &&
         a.iterations() == b.iterations();
}

}  // namespace sgis
