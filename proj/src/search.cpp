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

#include "sgis/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>

#include "sgis/rng.hpp"

namespace sgis {
namespace {

constexpr std::uint64_t kStreamCorrelationProbe = 0xC0221;

// Caches direct simulations by setting so a candidate surviving several
// rounds, or an IS winner equal to its own center, is never replayed twice.
class DirectEvaluator {
 public:
  DirectEvaluator(const SessionLog& log, const UserResponseModel& model,
                  const ObjectiveSpec& objective, CostLedger& ledger,
                  unsigned threads)
      : log_(log), model_(model), objective_(objective), ledger_(ledger),
        threads_(threads) {}

  // Evaluates settings not seen before, returns scored candidates for all of
  // them (cache hits included) in input order. n_new reports cache misses.
  std::vector<ScoredCandidate> evaluate(const std::vector<Setting>& settings,
                                        std::size_t* n_new = nullptr) {
    std::vector<Setting> todo;
    for (const Setting& s : settings) {
      if (cache_.find(s.values()) == cache_.end() &&
          !std::any_of(todo.begin(), todo.end(),
                       [&](const Setting& t) { return t == s; })) {
        todo.push_back(s);
      }
    }
    if (n_new != nullptr) *n_new = todo.size();
    if (!todo.empty()) {
      auto evaluated = simulate(log_, todo, model_, ledger_, threads_);
      for (auto& [setting, kpis] : evaluated) {
        cache_.emplace(setting.values(), kpis);
      }
    }
    std::vector<ScoredCandidate> out;
    out.reserve(settings.size());
    for (const Setting& s : settings) {
      out.push_back(make_scored(s, cache_.at(s.values()),
                                CandidateSource::direct_simulation, objective_));
    }
    return out;
  }

 private:
  const SessionLog& log_;
  const UserResponseModel& model_;
  const ObjectiveSpec& objective_;
  CostLedger& ledger_;
  unsigned threads_;
  std::map<std::vector<double>, KpiVector> cache_;
};

CenterDiagnostics summarize_center(const Setting& center,
                                   std::size_t n_records,
                                   const std::vector<IsEstimate>& estimates) {
  CenterDiagnostics diag;
  diag.center = center;
  diag.n_records = n_records;
  diag.n_grid_points = estimates.size();
  diag.min_ess = std::numeric_limits<double>::infinity();
  double capped_sum = 0.0;
  for (const IsEstimate& e : estimates) {
    diag.min_ess = std::min(diag.min_ess, e.ess);
    diag.max_weight = std::max(diag.max_weight, e.max_weight);
    capped_sum += e.capped_fraction;
  }
  if (estimates.empty()) diag.min_ess = 0.0;
  else capped_sum /= static_cast<double>(estimates.size());
  diag.mean_capped_fraction = capped_sum;
  return diag;
}

double score_or_lowest(const std::vector<ScoredCandidate>& pool) {
  if (pool.empty()) return -std::numeric_limits<double>::infinity();
  return *pool.front().score;
}

void validate_baseline(const ObjectiveSpec& objective) {
  const KpiVector& b = objective.baseline;
  if (!(std::isfinite(b.rpm) && std::isfinite(b.clicks) && std::isfinite(b.iy) &&
        std::isfinite(b.revenue))) {
    throw std::invalid_argument("objective baseline KPIs must be finite");
  }
}

}  // namespace

std::vector<Setting> coarse_grid(const ParameterSpace& space, std::size_t c,
                                 std::size_t grid_point_cap) {
  if (c < 2) throw std::invalid_argument("grid needs at least 2 points per dimension");
  const std::size_t m = space.dims();
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (total > grid_point_cap / c) {
      throw std::invalid_argument("grid size exceeds the configured point cap");
    }
    total *= c;
  }
  if (total > grid_point_cap) {
    throw std::invalid_argument("grid size exceeds the configured point cap");
  }

  std::vector<std::vector<double>> axes(m);
  for (std::size_t j = 0; j < m; ++j) {
    axes[j].reserve(c);
    for (std::size_t i = 0; i < c; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(c - 1);
      axes[j].push_back(space.bounds[j].lo * (1.0 - t) + space.bounds[j].hi * t);
    }
  }

  std::vector<Setting> grid;
  grid.reserve(total);
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> point(m);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t j = 0; j < m; ++j) point[j] = axes[j][idx[j]];
    grid.push_back(make_setting(space, point).setting);
    for (std::size_t j = m; j-- > 0;) {
      if (++idx[j] < c) break;
      idx[j] = 0;
    }
  }
  return grid;
}

std::optional<double> objective_score(const KpiDelta& delta,
                                      const ObjectiveSpec& objective) {
  for (const ObjectiveConstraint& con : objective.constraints) {
    const double v = delta_component(delta, con.kpi);
    const bool ok = con.relation == ObjectiveConstraint::Relation::le
                        ? v <= con.threshold_pct
                        : v >= con.threshold_pct;
    if (!ok) return std::nullopt;
  }
  return delta_component(delta, objective.maximize);
}

std::optional<double> objective_score(const KpiVector& kpis,
                                      const ObjectiveSpec& objective) {
  return objective_score(kpi_delta(kpis, objective.baseline), objective);
}

ScoredCandidate make_scored(Setting setting, const KpiVector& kpis,
                            CandidateSource source,
                            const ObjectiveSpec& objective) {
  ScoredCandidate cand;
  cand.delta = kpi_delta(kpis, objective.baseline);
  cand.score = objective_score(cand.delta, objective);
  cand.setting = std::move(setting);
  cand.kpis = kpis;
  cand.source = source;
  return cand;
}

std::vector<ScoredCandidate> top_k(const std::vector<ScoredCandidate>& candidates,
                                   std::size_t k) {
  if (k < 1) throw std::invalid_argument("top_k requires k >= 1");

  // Collapse duplicate settings first: direct entries shadow IS entries,
  // otherwise the higher score wins.
  std::map<std::vector<double>, const ScoredCandidate*> by_setting;
  for (const ScoredCandidate& cand : candidates) {
    if (!cand.score.has_value()) continue;
    auto [it, inserted] = by_setting.emplace(cand.setting.values(), &cand);
    if (inserted) continue;
    const ScoredCandidate* held = it->second;
    const bool cand_direct = cand.source == CandidateSource::direct_simulation;
    const bool held_direct = held->source == CandidateSource::direct_simulation;
    if ((cand_direct && !held_direct) ||
        (cand_direct == held_direct && *cand.score > *held->score)) {
      it->second = &cand;
    }
  }

  std::vector<ScoredCandidate> pool;
  pool.reserve(by_setting.size());
  for (const auto& [values, cand] : by_setting) pool.push_back(*cand);
  std::sort(pool.begin(), pool.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (*a.score != *b.score) return *a.score > *b.score;
              return setting_less(a.setting, b.setting);
            });
  if (pool.size() > k) pool.resize(k);
  return pool;
}

SgisResult sgis(const SessionLog& log, const ParameterSpace& space,
                const UserResponseModel& model, const ObjectiveSpec& objective,
                const SgisConfig& config, unsigned threads) {
  validate_config(config, space);
  validate_baseline(objective);

  SgisResult result;
  CostLedger ledger;
  DirectEvaluator evaluator(log, model, objective, ledger, threads);

  const std::vector<Setting> grid =
      coarse_grid(space, config.c, config.grid_point_cap);
  result.initial_grid_size = grid.size();
  const std::vector<ScoredCandidate> coarse_scored = evaluator.evaluate(grid);
  result.best_pool = top_k(coarse_scored, config.k);
  result.initial_best_score = result.best_pool.empty()
                                  ? std::nullopt
                                  : result.best_pool.front().score;
  if (result.best_pool.empty()) {
    result.initial_pool_empty = true;
    result.ledger = ledger;
    return result;
  }

  std::vector<ScoredCandidate> centers = result.best_pool;
  double best_before = score_or_lowest(result.best_pool);
  const DenseGridSpec grid_spec{config.d, config.half_width_sigmas,
                                config.dense_mode};

  for (std::size_t t = 1; t <= config.u; ++t) {
    ledger.add_iteration();
    IterationTrace tr;
    tr.iteration = t;

    std::vector<ScoredCandidate> is_candidates;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const Setting& center = centers[i].setting;
      const RandomizationPolicy policy = make_randomization_policy(
          space, center, config.sigma, config.clip_to_bounds);
      const std::uint64_t center_seed = sub_seed({config.seed, t, i});
      const ArtificialDataset data = collect_artificial(
          log, policy, config.n_artificial, model, center_seed, ledger, space,
          threads);
      const std::vector<IsEstimate> estimates =
          is_art(data, center, grid_spec, config.cap, config.normalize, space,
                 ledger, threads);
      tr.diagnostics.push_back(
          summarize_center(center, data.size(), estimates));
      for (const IsEstimate& est : estimates) {
        is_candidates.push_back(make_scored(est.setting, est.kpis,
                                            CandidateSource::is_estimate,
                                            objective));
      }
    }

    tr.is_topk = top_k(is_candidates, config.k);
    result.iterations_run = t;
    if (tr.is_topk.empty()) {
      tr.empty_pool = true;
      tr.best_score_after = result.best_score();
      result.trace.push_back(std::move(tr));
      break;
    }

    std::vector<Setting> winners;
    winners.reserve(tr.is_topk.size());
    for (const ScoredCandidate& cand : tr.is_topk) winners.push_back(cand.setting);
    tr.resimulated = evaluator.evaluate(winners, &tr.n_resimulated);

    std::vector<ScoredCandidate> merged = result.best_pool;
    merged.insert(merged.end(), tr.resimulated.begin(), tr.resimulated.end());
    result.best_pool = top_k(merged, config.k);
    tr.best_score_after = result.best_score();

    centers = top_k(tr.resimulated, config.k);

    const double best_after = score_or_lowest(result.best_pool);
    const bool stop = best_after - best_before < config.epsilon;
    best_before = best_after;
    if (stop) {
      tr.early_stopped = true;
      result.trace.push_back(std::move(tr));
      break;
    }
    if (centers.empty()) {
      tr.empty_pool = true;
      result.trace.push_back(std::move(tr));
      break;
    }
    result.trace.push_back(std::move(tr));
  }

  result.ledger = ledger;
  return result;
}

SgisResult enumerate_baseline(const SessionLog& log, const ParameterSpace& space,
                              const UserResponseModel& model,
                              const ObjectiveSpec& objective,
                              std::size_t points_per_dim,
                              const SgisConfig& config, CostLedger& ledger,
                              unsigned threads) {
  validate_baseline(objective);
  SgisResult result;
  const std::vector<Setting> grid =
      coarse_grid(space, points_per_dim, config.grid_point_cap);
  result.initial_grid_size = grid.size();

  const std::vector<std::pair<Setting, KpiVector>> evaluated =
      simulate(log, grid, model, ledger, threads);
  std::vector<ScoredCandidate> scored;
  scored.reserve(evaluated.size());
  for (const auto& [setting, kpis] : evaluated) {
    scored.push_back(make_scored(setting, kpis,
                                 CandidateSource::direct_simulation, objective));
  }
  result.best_pool = top_k(scored, config.k);
  result.initial_best_score =
      result.best_pool.empty() ? std::nullopt : result.best_pool.front().score;
  result.initial_pool_empty = result.best_pool.empty();
  result.ledger = ledger;
  return result;
}

SgisResult iterative_is_baseline(const SessionLog& log,
                                 const ParameterSpace& space,
                                 const UserResponseModel& model,
                                 const ObjectiveSpec& objective,
                                 const Setting& start, const SgisConfig& config,
                                 unsigned threads) {
  validate_config(config, space);
  validate_baseline(objective);

  SgisResult result;
  CostLedger ledger;
  DirectEvaluator evaluator(log, model, objective, ledger, threads);

  std::vector<ScoredCandidate> visited = evaluator.evaluate({start});
  result.initial_grid_size = 1;
  result.best_pool = top_k(visited, config.k);
  result.initial_best_score =
      result.best_pool.empty() ? std::nullopt : result.best_pool.front().score;
  result.initial_pool_empty = result.best_pool.empty();

  Setting current = start;
  double best_before = score_or_lowest(result.best_pool);
  const DenseGridSpec grid_spec{config.d, config.half_width_sigmas,
                                config.dense_mode};

  for (std::size_t t = 1; t <= config.u; ++t) {
    ledger.add_iteration();
    IterationTrace tr;
    tr.iteration = t;

    const RandomizationPolicy policy = make_randomization_policy(
        space, current, config.sigma, config.clip_to_bounds);
    const std::uint64_t center_seed = sub_seed({config.seed, t, 0});
    const ArtificialDataset data =
        collect_artificial(log, policy, config.n_artificial, model, center_seed,
                           ledger, space, threads);
    const std::vector<IsEstimate> estimates =
        is_art(data, current, grid_spec, config.cap, config.normalize, space,
               ledger, threads);
    tr.diagnostics.push_back(summarize_center(current, data.size(), estimates));

    std::vector<ScoredCandidate> is_candidates;
    is_candidates.reserve(estimates.size());
    for (const IsEstimate& est : estimates) {
      is_candidates.push_back(make_scored(est.setting, est.kpis,
                                          CandidateSource::is_estimate,
                                          objective));
    }
    tr.is_topk = top_k(is_candidates, 1);
    result.iterations_run = t;
    if (tr.is_topk.empty()) {
      tr.empty_pool = true;
      tr.best_score_after = result.best_score();
      result.trace.push_back(std::move(tr));
      break;
    }

    // Move to the IS-best setting unconditionally; direct re-simulation
    // records the true score but does not gate acceptance.
    const Setting next = tr.is_topk.front().setting;
    tr.resimulated = evaluator.evaluate({next}, &tr.n_resimulated);
    visited.insert(visited.end(), tr.resimulated.begin(), tr.resimulated.end());
    result.best_pool = top_k(visited, config.k);
    tr.best_score_after = result.best_score();
    current = next;

    const double best_after = score_or_lowest(result.best_pool);
    const bool have_any = !result.best_pool.empty();
    const bool stop = have_any && best_after - best_before < config.epsilon;
    best_before = best_after;
    result.trace.push_back(std::move(tr));
    if (stop) {
      result.trace.back().early_stopped = true;
      break;
    }
  }

  result.ledger = ledger;
  return result;
}

CorrelationReport correlation_report(const SessionLog& log,
                                     const ParameterSpace& space,
                                     const UserResponseModel& model,
                                     const Setting& center,
                                     const RandomizationPolicy& policy,
                                     std::size_t n_probe,
                                     const SgisConfig& config,
                                     std::uint64_t seed, unsigned threads) {
  if (n_probe < 3) {
    throw std::invalid_argument("correlation report needs at least 3 probes");
  }
  if (!(policy.center == center)) {
    throw std::invalid_argument("randomization policy is not centered on the probe center");
  }

  CorrelationReport report;
  CostLedger& ledger = report.ledger;

  const ArtificialDataset data = collect_artificial(
      log, policy, config.n_artificial, model, seed, ledger, space, threads);

  const IsEstimate is_center =
      is_estimate(data, policy, config.cap, config.normalize, ledger);
  const KpiVector sim_center =
      evaluate_setting(log, center, model, ledger, threads);
  if (is_center.kpis.iy == 0.0 || sim_center.iy == 0.0) {
    throw std::runtime_error("center IY is zero; IY deltas are undefined");
  }

  const std::size_t m = space.dims();
  std::vector<Setting> probes;
  probes.reserve(n_probe);
  for (std::size_t p = 0; p < n_probe; ++p) {
    auto engine = make_engine({seed, kStreamCorrelationProbe, p});
    std::vector<double> point(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = center[j];
      const double s = policy.sigma[j];
      std::uniform_real_distribution<double> dist(c - s, c + s);
      point[j] = dist(engine);
    }
    probes.push_back(make_setting(space, point).setting);
  }

  const std::vector<std::pair<Setting, KpiVector>> sim_probes =
      simulate(log, probes, model, ledger, threads);

  report.points.reserve(n_probe);
  for (std::size_t p = 0; p < n_probe; ++p) {
    RandomizationPolicy target = policy;
    target.center = probes[p];
    const IsEstimate is_probe =
        is_estimate(data, target, config.cap, config.normalize, ledger);

    ProbePair pair;
    pair.setting = probes[p];
    pair.at_center = probes[p] == center;
    pair.is_delta_iy =
        100.0 * (is_probe.kpis.iy - is_center.kpis.iy) / is_center.kpis.iy;
    pair.sim_delta_iy =
        100.0 * (sim_probes[p].second.iy - sim_center.iy) / sim_center.iy;
    report.points.push_back(std::move(pair));
  }

  std::vector<double> xs, ys;
  for (const ProbePair& pair : report.points) {
    if (pair.at_center) continue;
    xs.push_back(pair.is_delta_iy);
    ys.push_back(pair.sim_delta_iy);
  }
  if (xs.size() < 2) {
    report.undefined_reason = "fewer than 2 off-center probes";
    return report;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) {
    report.undefined_reason = "zero variance in IS deltas";
    return report;
  }
  if (syy == 0.0) {
    report.undefined_reason = "zero variance in simulator deltas";
    return report;
  }
  report.pearson_r = sxy / std::sqrt(sxx * syy);
  return report;
}

}  // namespace sgis
