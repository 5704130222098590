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

#ifndef SGIS_DOMAIN_HPP
#define SGIS_DOMAIN_HPP

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgis {

/// Closed interval for one tunable dimension.
struct Bounds {
  double lo;
  double hi;
};

/// The m-dimensional box of tunable parameters. Immutable after creation.
struct ParameterSpace {
  std::vector<std::string> names;
  std::vector<Bounds> bounds;

  std::size_t dims() const { return bounds.size(); }
};

/// Validates dims >= 1, matching lengths, and finite lo < hi per dimension.
ParameterSpace make_parameter_space(std::vector<std::string> names,
                                    std::vector<Bounds> bounds);

class Setting;
struct MakeSettingResult;

/// A point in a ParameterSpace. Always within bounds: the only way to build
/// one is make_setting, which clips.
class Setting {
 public:
  /// Empty placeholder; real settings come from make_setting.
  Setting() = default;

  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const Setting& a, const Setting& b) {
    return a.values_ == b.values_;
  }

 private:
  explicit Setting(std::vector<double> values) : values_(std::move(values)) {}
  friend MakeSettingResult make_setting(const ParameterSpace&,
                                        std::vector<double>);
  std::vector<double> values_;
};

struct MakeSettingResult {
  Setting setting;
  bool clipped;
};

/// Clips values into the space's bounds. Throws on dimension mismatch.
MakeSettingResult make_setting(const ParameterSpace& space,
                               std::vector<double> values);

/// Strict lexicographic order on component values; used as a deterministic
/// tie-break when ranking candidates.
bool setting_less(const Setting& a, const Setting& b);

/// Named KPI components, all per-session x1000 scale:
///   rpm     — revenue per thousand impressions
///   clicks  — expected clicks per session x1000
///   iy      — impressions shown per session x1000
///   revenue — expected revenue per session x1000
struct KpiVector {
  double rpm = 0.0;
  double clicks = 0.0;
  double iy = 0.0;
  double revenue = 0.0;
  std::int64_t n_sessions = 0;

  friend bool operator==(const KpiVector&, const KpiVector&) = default;
};

enum class Kpi { rpm, clicks, iy, revenue };

double kpi_component(const KpiVector& k, Kpi which);
Kpi kpi_from_name(const std::string& name);
std::string kpi_name(Kpi which);

/// Percent differences of a candidate KpiVector against a baseline,
/// 100 * (candidate - baseline) / baseline per component.
struct KpiDelta {
  double d_rpm = 0.0;
  double d_clicks = 0.0;
  double d_iy = 0.0;
  double d_revenue = 0.0;

  friend bool operator==(const KpiDelta&, const KpiDelta&) = default;
};

/// Throws (naming the component) if any baseline component is zero.
KpiDelta kpi_delta(const KpiVector& candidate, const KpiVector& baseline);

double delta_component(const KpiDelta& d, Kpi which);

/// One ad in a logged session.
struct CandidateAd {
  double bid = 0.0;              // currency units, >= 0
  double quality = 0.0;          // predicted relevance in [0, 1]
  double base_click_logit = 0.0;
};

/// A logged user session: the unit the simulator replays.
struct Session {
  std::int64_t session_id = 0;
  std::vector<double> user_features;
  std::vector<CandidateAd> candidates;
};

struct SessionLog {
  std::vector<Session> sessions;

  std::size_t size() const { return sessions.size(); }
  bool empty() const { return sessions.empty(); }
};

/// Gaussian randomization around a center setting. Per-dimension independent
/// with standard deviations sigma. When clip_to_bounds is set, sampled
/// actions are clipped into the space; the logged behavior density always
/// refers to the unclipped draw.
struct RandomizationPolicy {
  Setting center;
  std::vector<double> sigma;
  bool clip_to_bounds = true;
};

RandomizationPolicy make_randomization_policy(const ParameterSpace& space,
                                              Setting center,
                                              std::vector<double> sigma,
                                              bool clip_to_bounds);

enum class Normalize { plain, self_normalized };

enum class DenseGridMode { automatic, full_cartesian, axis_sweeps };

/// Knobs for one tuning run. c controls the simulator-evaluated coarse grid,
/// d the IS-evaluated dense grid, k the candidate pool carried between
/// stages, u the number of refinement iterations.
struct SgisConfig {
  std::size_t m = 3;             // dimensions; must equal space.dims()
  std::size_t c = 15;            // coarse grid points per dimension
  std::size_t d = 25;            // dense IS grid points per dimension
  std::size_t k = 5;             // top-k pool size
  std::size_t u = 1;             // refinement iterations
  double epsilon = 0.0;          // early stop when score gain < epsilon
  double cap = 10.0;             // IS weight cap; may be +infinity
  std::size_t n_sessions = 2000;
  std::size_t n_artificial = 20000;
  std::uint64_t seed = 0;

  // Randomization and estimator choices shared by all searches in a run.
  std::vector<double> sigma;
  bool clip_to_bounds = true;
  Normalize normalize = Normalize::self_normalized;
  DenseGridMode dense_mode = DenseGridMode::automatic;
  double half_width_sigmas = 1.0;
  std::size_t grid_point_cap = 1000000;
};

/// Throws if any field violates its range or sigma does not match the space.
void validate_config(const SgisConfig& config, const ParameterSpace& space);

/// Monotone cost counters. Increments are atomic so parallel evaluators can
/// share one ledger; reads are snapshots.
class CostLedger {
 public:
  CostLedger() = default;
  CostLedger(const CostLedger& other) { *this = other; }
  CostLedger& operator=(const CostLedger& other);

  void add_replays(std::uint64_t n) { replay_count_ += n; }
  void add_reweighs(std::uint64_t n) { is_reweigh_count_ += n; }
  void add_settings_simulated(std::uint64_t n) { settings_simulated_ += n; }
  void add_settings_is_evaluated(std::uint64_t n) {
    settings_is_evaluated_ += n;
  }
  void add_iteration() { ++iterations_; }

  std::uint64_t replay_count() const { return replay_count_.load(); }
  std::uint64_t is_reweigh_count() const { return is_reweigh_count_.load(); }
  std::uint64_t settings_simulated() const { return settings_simulated_.load(); }
  std::uint64_t settings_is_evaluated() const {
    return settings_is_evaluated_.load();
  }
  std::uint64_t iterations() const { return iterations_.load(); }

  friend bool operator==(const CostLedger& a, const CostLedger& b);

 private:
  std::atomic<std::uint64_t> replay_count_{0};
  std::atomic<std::uint64_t> is_reweigh_count_{0};
  std::atomic<std::uint64_t> settings_simulated_{0};
  std::atomic<std::uint64_t> settings_is_evaluated_{0};
  std::atomic<std::uint64_t> iterations_{0};
};

}  // namespace sgis

#endif  // SGIS_DOMAIN_HPP
