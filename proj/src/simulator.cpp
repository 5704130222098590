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

#include "sgis/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgis/estimator.hpp"
#include "sgis/parallel.hpp"
#include "sgis/rng.hpp"

namespace sgis {

namespace {

constexpr std::uint64_t kStreamSessions = 0x5E55;
constexpr std::uint64_t kStreamArtificial = 0xA27F;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Session synthesis constants. Bids come from a two-cluster lognormal (a
// cheap long tail plus a premium cluster), which gives the auction a
// non-trivial revenue surface over the ranking weights.
constexpr std::size_t kMinCandidates = 5;
constexpr std::size_t kMaxCandidates = 20;
constexpr double kBidLowShare = 0.6;
constexpr double kBidLowLogMean = -0.35667494393873245;  // ln 0.7
constexpr double kBidHighLogMean = 1.252762968495368;    // ln 3.5
constexpr double kBidLogSigma = 0.35;
constexpr double kLogitMean = -1.0;
constexpr double kLogitSigma = 1.0;
constexpr std::size_t kUserFeatures = 2;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// v^w in log space with 0^0 == 1 semantics; log_v may be -inf when v == 0.
inline double weighted_log(double w, double log_v) {
  if (std::isfinite(log_v)) return w * log_v;
  if (w > 0.0) return log_v;
  if (w < 0.0) return -log_v;
  return 0.0;
}

struct PreparedCandidate {
  double bid;
  double quality;
  double log_bid;
  double log_quality;
  double base_click_logit;
};

struct PreparedLog {
  std::vector<PreparedCandidate> candidates;
  std::vector<std::uint32_t> offsets;      // sessions.size() + 1 entries
  std::vector<std::int64_t> session_ids;
  std::vector<std::uint32_t> order_by_id;  // reduction order

  std::size_t size() const { return session_ids.size(); }
  std::size_t count(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
};

PreparedCandidate prepare_candidate(const CandidateAd& ad) {
  return PreparedCandidate{ad.bid, ad.quality, std::log(ad.bid),
                           std::log(ad.quality), ad.base_click_logit};
}

PreparedLog prepare_log(const SessionLog& log) {
  PreparedLog p;
  p.offsets.reserve(log.size() + 1);
  p.offsets.push_back(0);
  p.session_ids.reserve(log.size());
  std::size_t total = 0;
  for (const Session& s : log.sessions) total += s.candidates.size();
  p.candidates.reserve(total);
  for (const Session& s : log.sessions) {
    if (s.candidates.empty()) {
      throw std::invalid_argument("session " + std::to_string(s.session_id) +
                                  " has no candidates");
    }
    for (const CandidateAd& ad : s.candidates) {
      p.candidates.push_back(prepare_candidate(ad));
    }
    p.offsets.push_back(static_cast<std::uint32_t>(p.candidates.size()));
    p.session_ids.push_back(s.session_id);
  }
  p.order_by_id.resize(p.size());
  std::iota(p.order_by_id.begin(), p.order_by_id.end(), 0u);
  std::sort(p.order_by_id.begin(), p.order_by_id.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              return p.session_ids[a] < p.session_ids[b];
            });
  return p;
}

struct ReplayScratch {
  std::vector<double> lnscore;
  std::vector<std::uint32_t> rank;
  std::vector<ShownAd> shown;
};

// The fixed causal graph: rank by bid^w_b * quality^w_q, show ceil(L) ads,
// charge generalized second price capped at own bid, score clicks with the
// response model. Fills scratch.shown.
void run_auction(const PreparedCandidate* cands, std::size_t n,
                 const double* setting, std::size_t m,
                 const UserResponseModel& model, ReplayScratch& scratch) {
  const double w_bid = setting[0];
  const double w_quality = m >= 2 ? setting[1] : 1.0;
  double ad_load = 3.0;
  if (m >= 3) ad_load = 1.0 + 4.0 * sigmoid(setting[2]);
  const std::size_t n_show =
      std::min(n, static_cast<std::size_t>(std::ceil(ad_load)));

  scratch.lnscore.resize(n);
  scratch.rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = weighted_log(w_bid, cands[i].log_bid) +
               weighted_log(w_quality, cands[i].log_quality);
    if (std::isnan(s)) s = -kInf;
    scratch.lnscore[i] = s;
    scratch.rank[i] = static_cast<std::uint32_t>(i);
  }

  const auto& lnscore = scratch.lnscore;
  auto better = [&lnscore](std::uint32_t a, std::uint32_t b) {
    if (lnscore[a] != lnscore[b]) return lnscore[a] > lnscore[b];
    return a < b;
  };
  const std::size_t need = std::min(n, n_show + 1);
  std::partial_sort(scratch.rank.begin(), scratch.rank.begin() + need,
                    scratch.rank.end(), better);

  scratch.shown.clear();
  double decay_pow = 1.0;
  for (std::size_t j = 0; j < n_show; ++j) {
    const std::uint32_t self = scratch.rank[j];
    double price = 0.0;
    if (j + 1 < n && std::isfinite(lnscore[self])) {
      const std::uint32_t next = scratch.rank[j + 1];
      const double ratio = std::exp(lnscore[next] - lnscore[self]);
      price = std::min(cands[self].bid, cands[next].bid * ratio);
    }
    const double logit = model.click_weights[0] * cands[self].base_click_logit +
                         model.click_weights[1] * cands[self].quality +
                         model.click_weights[2] * static_cast<double>(j);
    const double click_prob = sigmoid(logit) * decay_pow;
    scratch.shown.push_back(ShownAd{self, price, click_prob});
    decay_pow *= model.position_decay;
  }
}

KpiVector kpis_from_shown(const ShownAd* shown, std::size_t n_shown) {
  double sum_clicks = 0.0;
  double sum_revenue = 0.0;
  for (std::size_t j = 0; j < n_shown; ++j) {
    sum_clicks += shown[j].click_prob;
    sum_revenue += shown[j].price_charged * shown[j].click_prob;
  }
  KpiVector k;
  k.n_sessions = 1;
  k.iy = 1000.0 * static_cast<double>(n_shown);
  k.clicks = 1000.0 * sum_clicks;
  k.revenue = 1000.0 * sum_revenue;
  k.rpm = k.iy > 0.0 ? 1000.0 * k.revenue / k.iy : 0.0;
  return k;
}

void check_model(const UserResponseModel& model) {
  if (model.click_weights.size() != 3) {
    throw std::invalid_argument(
        "response model needs 3 click weights "
        "(base_click_logit, quality, position)");
  }
  for (double w : model.click_weights) {
    if (!std::isfinite(w)) {
      throw std::invalid_argument("response model weights must be finite");
    }
  }
  if (!(model.position_decay > 0.0) || model.position_decay > 1.0) {
    throw std::invalid_argument("position_decay must be in (0, 1]");
  }
}

KpiVector evaluate_prepared(const PreparedLog& prepared, const Setting& setting,
                            const UserResponseModel& model, CostLedger& ledger,
                            unsigned threads) {
  const std::size_t n = prepared.size();
  const double* vals = setting.values().data();
  const std::size_t m = setting.size();

  std::vector<KpiVector> per_session(n);
  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    ReplayScratch scratch;
    for (std::size_t i = begin; i < end; ++i) {
      run_auction(prepared.candidates.data() + prepared.offsets[i],
                  prepared.count(i), vals, m, model, scratch);
      per_session[i] = kpis_from_shown(scratch.shown.data(),
                                       scratch.shown.size());
    }
  });

  KpiVector total;
  for (std::uint32_t idx : prepared.order_by_id) {
    const KpiVector& k = per_session[idx];
    total.rpm += k.rpm;
    total.clicks += k.clicks;
    total.iy += k.iy;
    total.revenue += k.revenue;
  }
  const double dn = static_cast<double>(n);
  total.rpm /= dn;
  total.clicks /= dn;
  total.iy /= dn;
  total.revenue /= dn;
  total.n_sessions = static_cast<std::int64_t>(n);

  ledger.add_replays(n);
  ledger.add_settings_simulated(1);
  return total;
}

}  // namespace

UserResponseModel make_user_response_model(std::vector<double> click_weights,
                                           double position_decay) {
  UserResponseModel model{std::move(click_weights), position_decay};
  check_model(model);
  return model;
}

SessionLog generate_sessions(std::size_t n, const ParameterSpace& space,
                             std::uint64_t seed) {
  (void)space;  // sessions do not depend on the tunable space
  if (n == 0) throw std::invalid_argument("cannot generate an empty log");

  SessionLog log;
  log.sessions.resize(n);
  for (std::size_t sid = 0; sid < n; ++sid) {
    auto engine = make_engine({seed, kStreamSessions, sid});
    std::uniform_int_distribution<std::size_t> n_cand_dist(kMinCandidates,
                                                           kMaxCandidates);
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);
    std::normal_distribution<double> standard_normal(0.0, 1.0);

    Session& s = log.sessions[sid];
    s.session_id = static_cast<std::int64_t>(sid);
    const std::size_t n_cand = n_cand_dist(engine);
    s.user_features.resize(kUserFeatures);
    for (double& f : s.user_features) f = standard_normal(engine);
    s.candidates.resize(n_cand);
    for (CandidateAd& ad : s.candidates) {
      const bool low = uniform01(engine) < kBidLowShare;
      const double log_mean = low ? kBidLowLogMean : kBidHighLogMean;
      ad.bid = std::exp(log_mean + kBidLogSigma * standard_normal(engine));
      ad.quality = uniform01(engine);
      ad.base_click_logit = kLogitMean + kLogitSigma * standard_normal(engine);
    }
  }
  return log;
}

CounterfactualSession replay(const Session& session, const Setting& setting,
                             const UserResponseModel& model) {
  check_model(model);
  if (setting.size() == 0) {
    throw std::invalid_argument("setting must have at least one dimension");
  }
  if (session.candidates.empty()) {
    throw std::invalid_argument("session has no candidates");
  }
  std::vector<PreparedCandidate> cands;
  cands.reserve(session.candidates.size());
  for (const CandidateAd& ad : session.candidates) {
    cands.push_back(prepare_candidate(ad));
  }
  ReplayScratch scratch;
  run_auction(cands.data(), cands.size(), setting.values().data(),
              setting.size(), model, scratch);
  CounterfactualSession cf;
  cf.session_id = session.session_id;
  cf.shown_ads = std::move(scratch.shown);
  return cf;
}

KpiVector session_kpis(const CounterfactualSession& cf) {
  return kpis_from_shown(cf.shown_ads.data(), cf.shown_ads.size());
}

KpiVector evaluate_setting(const SessionLog& log, const Setting& setting,
                           const UserResponseModel& model, CostLedger& ledger,
                           unsigned threads) {
  if (log.empty()) throw std::invalid_argument("cannot evaluate an empty log");
  check_model(model);
  return evaluate_prepared(prepare_log(log), setting, model, ledger, threads);
}

std::vector<std::pair<Setting, KpiVector>> simulate(
    const SessionLog& log, const std::vector<Setting>& settings,
    const UserResponseModel& model, CostLedger& ledger, unsigned threads) {
  if (settings.empty()) {
    throw std::invalid_argument("simulate needs at least one setting");
  }
  if (log.empty()) throw std::invalid_argument("cannot simulate an empty log");
  check_model(model);

  const PreparedLog prepared = prepare_log(log);
  std::vector<std::pair<Setting, KpiVector>> out;
  out.reserve(settings.size());
  for (const Setting& s : settings) out.emplace_back(s, KpiVector{});

  if (settings.size() >= resolve_threads(threads)) {
    // Fan out across settings; each one is evaluated sequentially.
    parallel_for(settings.size(), threads, [&](std::size_t i) {
      out[i].second = evaluate_prepared(prepared, settings[i], model, ledger, 1);
    });
  } else {
    for (std::size_t i = 0; i < settings.size(); ++i) {
      out[i].second =
          evaluate_prepared(prepared, settings[i], model, ledger, threads);
    }
  }
  return out;
}

ArtificialDataset collect_artificial(const SessionLog& log,
                                     const RandomizationPolicy& policy,
                                     std::size_t n_artificial,
                                     const UserResponseModel& model,
                                     std::uint64_t seed, CostLedger& ledger,
                                     const ParameterSpace& space,
                                     unsigned threads) {
  if (n_artificial == 0) {
    throw std::invalid_argument("n_artificial must be >= 1");
  }
  if (log.empty()) throw std::invalid_argument("cannot sample an empty log");
  check_model(model);
  if (policy.center.size() != space.dims() ||
      policy.sigma.size() != space.dims()) {
    throw std::invalid_argument("policy does not match the parameter space");
  }

  const PreparedLog prepared = prepare_log(log);
  const std::size_t m = space.dims();

  ArtificialDataset data{policy, {}};
  data.records.reserve(n_artificial);
  for (std::size_t i = 0; i < n_artificial; ++i) {
    data.records.push_back(ArtificialRecord{
        0, policy.center, std::vector<double>(), 0.0, KpiVector{}});
  }

  parallel_chunks(n_artificial, threads, [&](std::size_t begin,
                                             std::size_t end) {
    ReplayScratch scratch;
    for (std::size_t i = begin; i < end; ++i) {
      auto engine = make_engine({seed, kStreamArtificial, i});
      std::uniform_int_distribution<std::size_t> session_dist(
          0, prepared.size() - 1);
      std::normal_distribution<double> standard_normal(0.0, 1.0);

      const std::size_t s_idx = session_dist(engine);
      std::vector<double> raw(m);
      for (std::size_t j = 0; j < m; ++j) {
        raw[j] = policy.center[j] + policy.sigma[j] * standard_normal(engine);
      }

      ArtificialRecord& rec = data.records[i];
      rec.session_id = prepared.session_ids[s_idx];
      rec.behavior_logdensity =
          gaussian_logdensity(raw, policy.center.values(), policy.sigma);
      auto made = make_setting(space, raw);
      if (made.clipped && !policy.clip_to_bounds) {
        throw std::runtime_error(
            "sampled action left the parameter bounds and the policy does "
            "not clip; shrink sigma or enable clip_to_bounds");
      }
      rec.action = made.setting;
      rec.action_unclipped = std::move(raw);

      run_auction(prepared.candidates.data() + prepared.offsets[s_idx],
                  prepared.count(s_idx), rec.action.values().data(), m, model,
                  scratch);
      rec.kpis = kpis_from_shown(scratch.shown.data(), scratch.shown.size());
    }
  });

  ledger.add_replays(n_artificial);
  return data;
}

}  // namespace sgis
