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
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "sgis/domain.hpp"
#include "sgis/simulator.hpp"

using namespace sgis;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent normal log-pdf oracle, written from the density formula with
// a different algebraic arrangement than the library.
double normal_logpdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * std::log(2.0 * 3.14159265358979323846 * sigma * sigma) -
         0.5 * z * z;
}

ParameterSpace line_space(double lo = -10.0, double hi = 10.0) {
  return make_parameter_space({"a"}, {{lo, hi}});
}

KpiVector kpis_of(double rpm, double clicks, double iy, double revenue) {
  KpiVector k;
  k.rpm = rpm;
  k.clicks = clicks;
  k.iy = iy;
  k.revenue = revenue;
  k.n_sessions = 1;
  return k;
}

// Hand-built 1-d dataset: actions and KPIs are explicit so expectations can
// be recomputed in the tests with plain loops.
ArtificialDataset hand_dataset(const ParameterSpace& space, double center,
                               double sigma,
                               const std::vector<double>& actions,
                               const std::vector<KpiVector>& kpis) {
  const Setting c = make_setting(space, {center}).setting;
  ArtificialDataset data{make_randomization_policy(space, c, {sigma}, true), {}};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ArtificialRecord rec{static_cast<std::int64_t>(i),
                         make_setting(space, {actions[i]}).setting,
                         {actions[i]},
                         normal_logpdf(actions[i], center, sigma),
                         kpis[i]};
    data.records.push_back(std::move(rec));
  }
  return data;
}

RandomizationPolicy target_at(const ParameterSpace& space, double center,
                              double sigma) {
  return make_randomization_policy(
      space, make_setting(space, {center}).setting, {sigma}, true);
}

}  // namespace

TEST_CASE("gaussian log-density matches the analytic formula") {
  CHECK(gaussian_logdensity({0.0}, {0.0}, {1.0}) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-15));
  CHECK(gaussian_logdensity({1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}) ==
        doctest::Approx(2.0 * (-0.9189385332046727 - 0.5)).epsilon(1e-15));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_real_distribution<double> s(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const std::vector<double> mean{u(rng), u(rng), u(rng)};
    const std::vector<double> sigma{s(rng), s(rng), s(rng)};
    double expect = 0.0;
    for (int j = 0; j < 3; ++j) expect += normal_logpdf(x[j], mean[j], sigma[j]);
    CHECK(gaussian_logdensity(x, mean, sigma) ==
          doctest::Approx(expect).epsilon(1e-12));

    // Symmetry about the mean.
    std::vector<double> mirrored(3);
    for (int j = 0; j < 3; ++j) mirrored[j] = 2.0 * mean[j] - x[j];
    CHECK(gaussian_logdensity(x, mean, sigma) ==
          doctest::Approx(gaussian_logdensity(mirrored, mean, sigma))
              .epsilon(1e-12));
  }

  CHECK_THROWS_AS(gaussian_logdensity({0.0}, {0.0, 1.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gaussian_logdensity({0.0}, {0.0}, {0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gaussian_logdensity({0.0}, {0.0}, {-1.0}),
                  std::invalid_argument);
}

TEST_CASE("importance weights: identity, shift value, and cap laws") {
  const ParameterSpace space = line_space();

  SUBCASE("identical target and behavior give weight exactly 1") {
    const RandomizationPolicy behavior = target_at(space, 0.7, 0.4);
    const double behavior_ld = gaussian_logdensity({0.3}, {0.7}, {0.4});
    CHECK(importance_weight({0.3}, behavior, behavior_ld, kInf) == 1.0);
    CHECK(importance_weight({0.3}, behavior, behavior_ld, 10.0) == 1.0);
  }

  SUBCASE("hand-evaluated 0.5-sigma shift") {
    // action 0, behavior N(0,1), target N(0.5,1):
    // log ratio = -0.5*(0-0.5)^2 + 0.5*0^2 = -0.125.
    const RandomizationPolicy target = target_at(space, 0.5, 1.0);
    const double behavior_ld = normal_logpdf(0.0, 0.0, 1.0);
    CHECK(importance_weight({0.0}, target, behavior_ld, kInf) ==
          doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
    CHECK(importance_weight({0.0}, target, behavior_ld, kInf) ==
          doctest::Approx(0.8824969025845955).epsilon(1e-12));
  }

  SUBCASE("caps order pointwise and infinity disables them") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double action = u(rng);
      const RandomizationPolicy target = target_at(space, u(rng), 0.7);
      const double behavior_ld = normal_logpdf(action, u(rng), 0.7);
      const double w1 = importance_weight({action}, target, behavior_ld, 0.5);
      const double w2 = importance_weight({action}, target, behavior_ld, 2.0);
      const double raw = importance_weight({action}, target, behavior_ld, kInf);
      CHECK(w1 <= w2);
      CHECK(w2 <= raw);
      CHECK(w1 <= 0.5);
      CHECK(w2 <= 2.0);
      if (raw <= 0.5) CHECK(w1 == raw);
    }
  }

  SUBCASE("invalid inputs throw") {
    const RandomizationPolicy target = target_at(space, 0.0, 1.0);
    CHECK_THROWS_AS(importance_weight({0.0}, target, 0.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(importance_weight({0.0}, target, kInf, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        importance_weight({0.0}, target, std::nan(""), 1.0),
        std::invalid_argument);
  }
}

TEST_CASE("identity target reproduces the per-record mean") {
  const ParameterSpace space =
      make_parameter_space({"w_bid", "w_quality"}, {{0.1, 3.0}, {0.1, 3.0}});
  const UserResponseModel model = make_user_response_model({1.0, 2.0, -0.35}, 0.85);
  const SessionLog log = generate_sessions(40, space, 6);
  const RandomizationPolicy policy = make_randomization_policy(
      space, make_setting(space, {1.0, 1.0}).setting, {0.2, 0.2}, true);

  CostLedger ledger;
  const ArtificialDataset data =
      collect_artificial(log, policy, 3000, model, 99, ledger, space, 2);

  // Oracle: weights are identically 1, so the estimate is the plain mean.
  KpiVector mean;
  for (const ArtificialRecord& rec : data.records) {
    mean.rpm += rec.kpis.rpm;
    mean.clicks += rec.kpis.clicks;
    mean.iy += rec.kpis.iy;
    mean.revenue += rec.kpis.revenue;
  }
  const double n = static_cast<double>(data.size());
  mean.rpm /= n;
  mean.clicks /= n;
  mean.iy /= n;
  mean.revenue /= n;

  for (Normalize mode : {Normalize::plain, Normalize::self_normalized}) {
    CostLedger l2;
    const IsEstimate est = is_estimate(data, policy, 10.0, mode, l2);
    CHECK(est.kpis.rpm == doctest::Approx(mean.rpm).epsilon(1e-12));
    CHECK(est.kpis.clicks == doctest::Approx(mean.clicks).epsilon(1e-12));
    CHECK(est.kpis.iy == doctest::Approx(mean.iy).epsilon(1e-12));
    CHECK(est.kpis.revenue == doctest::Approx(mean.revenue).epsilon(1e-12));
    CHECK(est.max_weight == 1.0);
    CHECK(est.mean_weight == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(est.ess == doctest::Approx(n).epsilon(1e-12));
    CHECK(est.capped_fraction == 0.0);
    CHECK(l2.is_reweigh_count() == data.size());
    CHECK(l2.settings_is_evaluated() == 1);
  }
}

TEST_CASE("self-normalized estimates of a constant KPI are exact") {
  const ParameterSpace space = line_space();
  std::vector<double> actions;
  std::vector<KpiVector> kpis;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 64; ++i) {
    actions.push_back(u(rng));
    kpis.push_back(kpis_of(2.0, 2.0, 2.0, 2.0));
  }
  const ArtificialDataset data = hand_dataset(space, 0.0, 1.0, actions, kpis);

  CostLedger ledger;
  const IsEstimate est = is_estimate(data, target_at(space, 0.8, 1.0), kInf,
                                     Normalize::self_normalized, ledger);
  CHECK(est.kpis.rpm == 2.0);
  CHECK(est.kpis.clicks == 2.0);
  CHECK(est.kpis.iy == 2.0);
  CHECK(est.kpis.revenue == 2.0);
}

TEST_CASE("self-normalized estimates stay within the per-record range") {
  const ParameterSpace space = line_space();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> kpi_dist(0.0, 50.0);

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> actions;
    std::vector<KpiVector> kpis;
    double lo = kInf, hi = -kInf;
    for (int i = 0; i < 40; ++i) {
      actions.push_back(u(rng));
      const double v = kpi_dist(rng);
      kpis.push_back(kpis_of(v, v + 1.0, v + 2.0, v + 3.0));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const ArtificialDataset data = hand_dataset(space, 0.0, 0.8, actions, kpis);

    CostLedger ledger;
    const IsEstimate est =
        is_estimate(data, target_at(space, u(rng), 0.8), 10.0,
                    Normalize::self_normalized, ledger);
    const double slack = 1e-9;
    CHECK(est.kpis.rpm >= lo - slack);
    CHECK(est.kpis.rpm <= hi + slack);
    CHECK(est.kpis.clicks >= lo + 1.0 - slack);
    CHECK(est.kpis.clicks <= hi + 1.0 + slack);
    CHECK(est.kpis.iy >= lo + 2.0 - slack);
    CHECK(est.kpis.iy <= hi + 2.0 + slack);
    CHECK(est.kpis.revenue >= lo + 3.0 - slack);
    CHECK(est.kpis.revenue <= hi + 3.0 + slack);

    CHECK(est.ess >= 1.0 - slack);
    CHECK(est.ess <= 40.0 + slack);
    if (est.max_weight > est.mean_weight * (1.0 + 1e-9)) {
      CHECK(est.ess < 40.0);  // unequal weights strictly lose sample size
    }
  }
}

TEST_CASE("plain estimates recompute from explicit weighted sums") {
  const ParameterSpace space = line_space();
  std::vector<double> actions{-0.5, 0.1, 0.4, 1.2, 2.0};
  std::vector<KpiVector> kpis;
  for (double a : actions) kpis.push_back(kpis_of(a + 3.0, 1.0, 2.0, a * a));
  const ArtificialDataset data = hand_dataset(space, 0.0, 1.0, actions, kpis);
  const RandomizationPolicy target = target_at(space, 0.6, 1.0);

  for (double cap : {0.9, 2.0, kInf}) {
    double sum_w = 0.0, sum_rpm = 0.0, sum_rev = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const double raw = std::exp(normal_logpdf(actions[i], 0.6, 1.0) -
                                  normal_logpdf(actions[i], 0.0, 1.0));
      const double w = std::min(cap, raw);
      sum_w += w;
      sum_rpm += w * kpis[i].rpm;
      sum_rev += w * kpis[i].revenue;
    }
    CostLedger ledger;
    const IsEstimate est =
        is_estimate(data, target, cap, Normalize::plain, ledger);
    CHECK(est.kpis.rpm == doctest::Approx(sum_rpm / 5.0).epsilon(1e-12));
    CHECK(est.kpis.revenue == doctest::Approx(sum_rev / 5.0).epsilon(1e-12));
    CHECK(est.mean_weight == doctest::Approx(sum_w / 5.0).epsilon(1e-12));
  }
}

TEST_CASE("estimates are invariant under record permutation") {
  const ParameterSpace space = line_space();
  std::vector<double> actions;
  std::vector<KpiVector> kpis;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    actions.push_back(u(rng));
    kpis.push_back(kpis_of(u(rng) + 5.0, 1.0, 3.0, u(rng) + 4.0));
  }
  ArtificialDataset data = hand_dataset(space, 0.0, 1.0, actions, kpis);
  const RandomizationPolicy target = target_at(space, 0.4, 1.0);

  CostLedger l1, l2;
  const IsEstimate before =
      is_estimate(data, target, 5.0, Normalize::self_normalized, l1);
  std::shuffle(data.records.begin(), data.records.end(), rng);
  const IsEstimate after =
      is_estimate(data, target, 5.0, Normalize::self_normalized, l2);
  CHECK(after.kpis.rpm == doctest::Approx(before.kpis.rpm).epsilon(1e-12));
  CHECK(after.kpis.revenue ==
        doctest::Approx(before.kpis.revenue).epsilon(1e-12));
  CHECK(after.ess == doctest::Approx(before.ess).epsilon(1e-12));
  CHECK(after.max_weight == before.max_weight);
}

TEST_CASE("self-normalization requires a nonzero weight sum") {
  const ParameterSpace space = line_space(-1000.0, 1000.0);
  // Behavior centered far away: target density ratio underflows to 0.
  const ArtificialDataset data =
      hand_dataset(space, 900.0, 0.5, {900.0, 900.2},
                   {kpis_of(1, 1, 1, 1), kpis_of(2, 2, 2, 2)});
  const RandomizationPolicy target = target_at(space, -900.0, 0.5);

  CostLedger ledger;
  CHECK_THROWS_AS(
      is_estimate(data, target, kInf, Normalize::self_normalized, ledger),
      std::runtime_error);
  const IsEstimate plain =
      is_estimate(data, target, kInf, Normalize::plain, ledger);
  CHECK(plain.kpis.rpm == 0.0);
  CHECK(plain.ess == 0.0);
}

TEST_CASE("dense grids span the sigma neighborhood exactly") {
  SUBCASE("three points on a line") {
    const ParameterSpace space = line_space();
    const Setting center = make_setting(space, {0.0}).setting;
    const RandomizationPolicy policy = target_at(space, 0.0, 1.0);
    const auto grid = dense_grid(center, policy, {3, 1.0,
                                                  DenseGridMode::automatic},
                                 space);
    REQUIRE(grid.size() == 3);
    CHECK(grid[0].values() == std::vector<double>{-1.0});
    CHECK(grid[1].values() == std::vector<double>{0.0});
    CHECK(grid[2].values() == std::vector<double>{1.0});
  }

  SUBCASE("25 points per dimension in 3-d full cartesian") {
    const ParameterSpace space = make_parameter_space(
        {"a", "b", "c"}, {{-5.0, 5.0}, {-5.0, 5.0}, {-5.0, 5.0}});
    const Setting center = make_setting(space, {0.0, 0.0, 0.0}).setting;
    const RandomizationPolicy policy = make_randomization_policy(
        space, center, {1.0, 0.5, 0.25}, true);
    const auto grid = dense_grid(
        center, policy, {25, 1.0, DenseGridMode::full_cartesian}, space);
    CHECK(grid.size() == 25 * 25 * 25);

    // Lexicographic order and exact center membership.
    bool sorted = true;
    bool found_center = false;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      sorted = sorted && setting_less(grid[i], grid[i + 1]);
    }
    for (const Setting& s : grid) {
      if (s == center) found_center = true;
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(s[j]) <= policy.sigma[j] + 1e-12);
      }
    }
    CHECK(sorted);
    CHECK(found_center);
  }

  SUBCASE("clipping at a bound deduplicates") {
    const ParameterSpace space = line_space(0.0, 10.0);
    const Setting center = make_setting(space, {0.0}).setting;
    const RandomizationPolicy policy = target_at(space, 0.0, 1.0);
    const auto grid =
        dense_grid(center, policy, {5, 1.0, DenseGridMode::automatic}, space);
    // Sweep values -1, -0.5, 0, 0.5, 1 clip to 0, 0, 0, 0.5, 1.
    REQUIRE(grid.size() == 3);
    CHECK(grid[0].values() == std::vector<double>{0.0});
    CHECK(grid[1].values() == std::vector<double>{0.5});
    CHECK(grid[2].values() == std::vector<double>{1.0});
  }

  SUBCASE("axis sweeps visit m*d - (m-1) settings") {
    const ParameterSpace space = make_parameter_space(
        {"a", "b", "c"}, {{-5.0, 5.0}, {-5.0, 5.0}, {-5.0, 5.0}});
    const Setting center = make_setting(space, {0.0, 1.0, -1.0}).setting;
    const RandomizationPolicy policy = make_randomization_policy(
        space, center, {1.0, 1.0, 1.0}, true);
    const auto grid = dense_grid(
        center, policy, {5, 1.0, DenseGridMode::axis_sweeps}, space);
    CHECK(grid.size() == 3 * 5 - 2);
    std::size_t center_hits = 0;
    for (const Setting& s : grid) {
      if (s == center) ++center_hits;
    }
    CHECK(center_hits == 1);
  }

  SUBCASE("automatic mode switches on dimension count") {
    const ParameterSpace space4 = make_parameter_space(
        {"a", "b", "c", "d"},
        {{-5.0, 5.0}, {-5.0, 5.0}, {-5.0, 5.0}, {-5.0, 5.0}});
    const Setting center = make_setting(space4, {0.0, 0.0, 0.0, 0.0}).setting;
    const RandomizationPolicy policy = make_randomization_policy(
        space4, center, {1.0, 1.0, 1.0, 1.0}, true);
    const auto grid = dense_grid(
        center, policy, {5, 1.0, DenseGridMode::automatic}, space4);
    CHECK(grid.size() == 4 * 5 - 3);  // axis sweeps above three dimensions
  }
}

TEST_CASE("is_art equals independent per-point estimates") {
  const ParameterSpace space =
      make_parameter_space({"w_bid", "w_quality"}, {{0.1, 3.0}, {0.1, 3.0}});
  const UserResponseModel model = make_user_response_model({1.0, 2.0, -0.35}, 0.85);
  const SessionLog log = generate_sessions(30, space, 14);
  const Setting center = make_setting(space, {1.2, 0.9}).setting;
  const RandomizationPolicy policy =
      make_randomization_policy(space, center, {0.25, 0.25}, true);

  CostLedger ledger;
  const ArtificialDataset data =
      collect_artificial(log, policy, 2000, model, 55, ledger, space, 2);

  const DenseGridSpec spec{5, 1.0, DenseGridMode::full_cartesian};
  CostLedger sweep_ledger;
  const auto estimates = is_art(data, center, spec, 10.0,
                                Normalize::self_normalized, space,
                                sweep_ledger, 3);
  const auto grid = dense_grid(center, policy, spec, space);
  REQUIRE(estimates.size() == grid.size());
  CHECK(sweep_ledger.settings_is_evaluated() == grid.size());
  CHECK(sweep_ledger.is_reweigh_count() == grid.size() * data.size());

  double center_ess = 0.0;
  double max_ess = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(estimates[i].setting == grid[i]);
    CostLedger solo;
    const RandomizationPolicy target{grid[i], policy.sigma, true};
    const IsEstimate direct =
        is_estimate(data, target, 10.0, Normalize::self_normalized, solo);
    CHECK(estimates[i].kpis == direct.kpis);
    CHECK(estimates[i].ess == direct.ess);
    CHECK(estimates[i].max_weight == direct.max_weight);
    CHECK(estimates[i].max_weight <= 10.0);
    if (grid[i] == center) center_ess = estimates[i].ess;
    max_ess = std::max(max_ess, estimates[i].ess);
  }
  CHECK(center_ess == max_ess);  // the center's unit weights dominate

  const Setting other = make_setting(space, {0.5, 0.5}).setting;
  CostLedger l3;
  CHECK_THROWS_AS(is_art(data, other, spec, 10.0, Normalize::self_normalized,
                         space, l3, 1),
                  std::invalid_argument);
}

TEST_CASE("one-dimensional sweeps are strictly increasing") {
  const ParameterSpace space = line_space();
  const UserResponseModel model = make_user_response_model({1.0, 2.0, -0.35}, 0.85);
  const SessionLog log = generate_sessions(10, space, 21);
  const Setting center = make_setting(space, {1.0}).setting;
  const RandomizationPolicy policy = target_at(space, 1.0, 0.5);

  CostLedger ledger;
  const ArtificialDataset data =
      collect_artificial(log, policy, 300, model, 3, ledger, space, 1);
  const auto estimates =
      is_art(data, center, {5, 1.0, DenseGridMode::automatic}, 10.0,
             Normalize::self_normalized, space, ledger, 1);
  REQUIRE(estimates.size() == 5);
  for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
    CHECK(estimates[i].setting[0] < estimates[i + 1].setting[0]);
  }
}
