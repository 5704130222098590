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

#include "sgis/result_io.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgis {
namespace {

using nlohmann::json;

json ledger_to_json(const CostLedger& ledger) {
  return json{{"replay_count", ledger.replay_count()},
              {"is_reweigh_count", ledger.is_reweigh_count()},
              {"settings_simulated", ledger.settings_simulated()},
              {"settings_is_evaluated", ledger.settings_is_evaluated()},
              {"iterations", ledger.iterations()}};
}

json delta_to_json(const KpiDelta& d) {
  return json{{"d_rpm", d.d_rpm},
              {"d_clicks", d.d_clicks},
              {"d_iy", d.d_iy},
              {"d_revenue", d.d_revenue}};
}

json optional_to_json(const std::optional<double>& v) {
  if (v.has_value()) return json(*v);
  return json(nullptr);
}

json diagnostics_to_json(const CenterDiagnostics& diag) {
  return json{{"center", diag.center.values()},
              {"n_records", diag.n_records},
              {"n_grid_points", diag.n_grid_points},
              {"min_ess", diag.min_ess},
              {"max_weight", diag.max_weight},
              {"mean_capped_fraction", diag.mean_capped_fraction}};
}

json trace_to_json(const IterationTrace& tr) {
  json is_topk = json::array();
  for (const ScoredCandidate& c : tr.is_topk) is_topk.push_back(scored_to_json(c));
  json diagnostics = json::array();
  for (const CenterDiagnostics& d : tr.diagnostics) {
    diagnostics.push_back(diagnostics_to_json(d));
  }
  json resimulated = json::array();
  for (const ScoredCandidate& c : tr.resimulated) {
    resimulated.push_back(scored_to_json(c));
  }
  return json{{"iteration", tr.iteration},
              {"is_topk", std::move(is_topk)},
              {"diagnostics", std::move(diagnostics)},
              {"resimulated", std::move(resimulated)},
              {"best_score_after", optional_to_json(tr.best_score_after)},
              {"n_resimulated", tr.n_resimulated},
              {"early_stopped", tr.early_stopped},
              {"empty_pool", tr.empty_pool}};
}

// A double formatted exactly as its shortest round-trip decimal, matching
// the JSON outputs so CSV and JSON never disagree on a value.
std::string double_repr(double v) { return json(v).dump(); }

void check_same(const json& a, const json& b, const char* field) {
  if (a != b) {
    throw std::runtime_error(std::string("compare: result files disagree on ") +
                             field + "; refusing to compare");
  }
}

json method_row(const std::string& name, const json& doc) {
  const json& result = doc.at("result");
  json best_setting = nullptr;
  json best_score = nullptr;
  const auto& pool = result.at("best_pool");
  if (!pool.empty()) {
    best_setting = pool.at(0).at("setting");
    best_score = pool.at(0).at("score");
  }
  const json& ledger = result.at("ledger");
  return json{{"method", name},
              {"best_score", best_score},
              {"best_setting", best_setting},
              {"replay_count", ledger.at("replay_count")},
              {"is_reweigh_count", ledger.at("is_reweigh_count")},
              {"settings_simulated", ledger.at("settings_simulated")}};
}

}  // namespace

json kpis_to_json(const KpiVector& kpis) {
  return json{{"rpm", kpis.rpm},
              {"clicks", kpis.clicks},
              {"iy", kpis.iy},
              {"revenue", kpis.revenue},
              {"n_sessions", kpis.n_sessions}};
}

KpiVector kpis_from_json(const json& doc) {
  KpiVector k;
  k.rpm = doc.at("rpm").get<double>();
  k.clicks = doc.at("clicks").get<double>();
  k.iy = doc.at("iy").get<double>();
  k.revenue = doc.at("revenue").get<double>();
  k.n_sessions = doc.at("n_sessions").get<std::uint64_t>();
  return k;
}

json scored_to_json(const ScoredCandidate& cand) {
  return json{{"setting", cand.setting.values()},
              {"kpis", kpis_to_json(cand.kpis)},
              {"delta", delta_to_json(cand.delta)},
              {"score", optional_to_json(cand.score)},
              {"source", cand.source == CandidateSource::direct_simulation
                             ? "direct_simulation"
                             : "is_estimate"}};
}

json result_to_json(const std::string& command, const RunConfig& config,
                    const json& args, const std::string& log_digest,
                    const std::vector<double>& deployment_setting,
                    const KpiVector& baseline, const SgisResult& result) {
  json best_pool = json::array();
  for (const ScoredCandidate& c : result.best_pool) {
    best_pool.push_back(scored_to_json(c));
  }
  json trace = json::array();
  for (const IterationTrace& tr : result.trace) trace.push_back(trace_to_json(tr));

  return json{
      {"schema", 1},
      {"command", command},
      {"args", args},
      {"config", run_config_to_json(config)},
      {"log_digest", log_digest},
      {"deployment_setting", deployment_setting},
      {"baseline_kpis", kpis_to_json(baseline)},
      {"result",
       {{"best_pool", std::move(best_pool)},
        {"initial_best_score", optional_to_json(result.initial_best_score)},
        {"initial_grid_size", result.initial_grid_size},
        {"initial_pool_empty", result.initial_pool_empty},
        {"iterations_run", result.iterations_run},
        {"trace", std::move(trace)},
        {"ledger", ledger_to_json(result.ledger)}}}};
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json read_result_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open result file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("result '" + path + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") ||
      doc.at("schema").get<int>() != 1) {
    throw std::runtime_error("result '" + path + "': unsupported schema");
  }
  return doc;
}

void write_meta_sidecar(const std::string& path, double wall_seconds,
                        unsigned threads) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const json meta = {
      {"wall_time_seconds", wall_seconds},
      {"threads", threads},
      {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  write_json_file(path + ".meta.json", meta);
}

void write_correlation_csv(const std::string& path,
                           const std::vector<std::string>& dim_names,
                           const CorrelationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const std::string& name : dim_names) out << name << ',';
  out << "is_delta_iy,sim_delta_iy,at_center\n";
  for (const ProbePair& p : report.points) {
    for (double v : p.setting.values()) out << double_repr(v) << ',';
    out << double_repr(p.is_delta_iy) << ',' << double_repr(p.sim_delta_iy)
        << ',' << (p.at_center ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json correlation_to_json(const RunConfig& config, const json& args,
                         const std::string& log_digest,
                         const CorrelationReport& report) {
  std::size_t excluded = 0;
  for (const ProbePair& p : report.points) {
    if (p.at_center) ++excluded;
  }
  json r = nullptr;
  json reason = nullptr;
  if (report.pearson_r.has_value()) {
    r = *report.pearson_r;
  } else {
    reason = report.undefined_reason;
  }
  return json{{"schema", 1},
              {"command", "correlation"},
              {"args", args},
              {"config", run_config_to_json(config)},
              {"log_digest", log_digest},
              {"pearson_r", r},
              {"undefined_reason", reason},
              {"n_probe", report.points.size()},
              {"n_excluded_at_center", excluded},
              {"ledger", ledger_to_json(report.ledger)}};
}

json compare_results(const json& sgis_doc, const json& enumerate_doc,
                     const json& is_baseline_doc) {
  for (const json* doc : {&enumerate_doc, &is_baseline_doc}) {
    check_same(sgis_doc.at("log_digest"), doc->at("log_digest"), "log digest");
    check_same(sgis_doc.at("config").at("space"), doc->at("config").at("space"),
               "parameter space");
    check_same(sgis_doc.at("config").at("objective"),
               doc->at("config").at("objective"), "objective");
    check_same(sgis_doc.at("baseline_kpis"), doc->at("baseline_kpis"),
               "baseline KPIs");
  }

  json rows = json::array();
  rows.push_back(method_row("sgis", sgis_doc));
  rows.push_back(method_row("enumerate", enumerate_doc));
  rows.push_back(method_row("is_baseline", is_baseline_doc));

  // Dominance: refinement never worsened the coarse-grid-only score.
  const json& initial = sgis_doc.at("result").at("initial_best_score");
  const json& final_score = rows.at(0).at("best_score");
  json dominance = nullptr;
  if (!initial.is_null() && !final_score.is_null()) {
    dominance = final_score.get<double>() >= initial.get<double>();
  }

  const double sgis_replays =
      sgis_doc.at("result").at("ledger").at("replay_count").get<double>();
  const double enum_replays =
      enumerate_doc.at("result").at("ledger").at("replay_count").get<double>();
  json cost_ratio = nullptr;
  json cost_ordering = nullptr;
  if (sgis_replays > 0.0) {
    cost_ratio = enum_replays / sgis_replays;
    cost_ordering = enum_replays / sgis_replays >= 10.0;
  }

  return json{{"schema", 1},
              {"command", "compare"},
              {"log_digest", sgis_doc.at("log_digest")},
              {"rows", std::move(rows)},
              {"dominance_holds", dominance},
              {"enumerate_to_sgis_replay_ratio", cost_ratio},
              {"cost_ordering_holds", cost_ordering}};
}

std::string render_compare_table(const json& comparison,
                                 const std::vector<json>& metas) {
  std::ostringstream out;
  out << "method       best_score     replay_count   is_reweigh_count  wall_s\n";
  std::size_t i = 0;
  for (const json& row : comparison.at("rows")) {
    std::string name = row.at("method").get<std::string>();
    name.resize(13, ' ');
    std::string score = row.at("best_score").is_null()
                            ? "infeasible"
                            : row.at("best_score").dump();
    score.resize(std::max<std::size_t>(score.size(), 14), ' ');
    out << name << score << ' ' << row.at("replay_count").dump();
    out << std::string(
        std::max<int>(1, 15 - static_cast<int>(row.at("replay_count").dump().size())),
        ' ');
    out << row.at("is_reweigh_count").dump();
    out << std::string(
        std::max<int>(1, 18 - static_cast<int>(row.at("is_reweigh_count").dump().size())),
        ' ');
    const bool have_wall = i < metas.size() && metas[i].is_object() &&
                           metas[i].contains("wall_time_seconds");
    out << (have_wall ? metas[i].at("wall_time_seconds").dump() : "-");
    out << '\n';
    ++i;
  }
  out << "dominance_holds: " << comparison.at("dominance_holds").dump() << '\n';
  out << "enumerate_to_sgis_replay_ratio: "
      << comparison.at("enumerate_to_sgis_replay_ratio").dump() << '\n';
  out << "cost_ordering_holds: " << comparison.at("cost_ordering_holds").dump()
      << '\n';
  return out.str();
}

}  // namespace sgis
