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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgis/parallel.hpp"
#include "sgis/result_io.hpp"
#include "sgis/run_config.hpp"
#include "sgis/search.hpp"
#include "sgis/session_io.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::string log_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  // 0 = machine parallelism
};

sgis::RunConfig load_config(const CommonArgs& args) {
  sgis::RunConfig cfg = args.config_path.empty()
                            ? sgis::default_run_config()
                            : sgis::read_run_config(args.config_path);
  if (args.seed.has_value()) {
    cfg.algo.seed = *args.seed;
    cfg.seed_in_file = true;
  }
  if (!cfg.seed_in_file) {
    throw std::runtime_error("no seed: set `seed` in the config or pass --seed");
  }
  return cfg;
}

struct LoadedRun {
  sgis::RunConfig cfg;
  sgis::SessionLog log;
  std::string digest;
  sgis::Setting deployment;
  sgis::KpiVector baseline;
  sgis::ObjectiveSpec objective;
};

// Loads everything a search command needs. The deployment setting's direct
// simulation anchors all percent deltas; its cost is identical across
// methods and excluded from their ledgers.
LoadedRun load_run(const CommonArgs& args) {
  LoadedRun run{load_config(args), {}, {}, {}, {}, {}};
  run.log = sgis::read_session_log(args.log_path);
  if (run.log.empty()) throw std::runtime_error("session log is empty");
  run.digest = sgis::file_digest(args.log_path);

  const auto made = sgis::make_setting(run.cfg.space, run.cfg.deployment_setting);
  if (made.clipped) {
    std::cerr << "warning: deployment setting clipped into bounds\n";
  }
  run.deployment = made.setting;
  sgis::CostLedger baseline_ledger;
  run.baseline = sgis::evaluate_setting(run.log, run.deployment, run.cfg.model,
                                        baseline_ledger, args.threads);
  run.objective = {run.cfg.maximize, run.cfg.constraints, run.baseline};
  return run;
}

void print_best(const sgis::SgisResult& result) {
  if (result.best_pool.empty()) {
    std::cout << "no feasible setting found\n";
    return;
  }
  const sgis::ScoredCandidate& best = result.best_pool.front();
  std::cout << "best setting:";
  for (double v : best.setting.values()) std::cout << ' ' << json(v).dump();
  std::cout << "\nscore: " << json(*best.score).dump()
            << "\ndelta%: rpm " << json(best.delta.d_rpm).dump() << ", clicks "
            << json(best.delta.d_clicks).dump() << ", iy "
            << json(best.delta.d_iy).dump() << ", revenue "
            << json(best.delta.d_revenue).dump() << '\n';
}

int finish(const CommonArgs& args,
           std::chrono::steady_clock::time_point started,
           bool feasible) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  sgis::write_meta_sidecar(args.out_path, wall, args.threads);
  return feasible ? 0 : 1;
}

int cmd_gen_sessions(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const sgis::RunConfig cfg = load_config(args);
  const sgis::SessionLog log =
      sgis::generate_sessions(cfg.algo.n_sessions, cfg.space, cfg.algo.seed);
  sgis::write_session_log(log, args.out_path);
  std::cout << "wrote " << log.size() << " sessions to " << args.out_path
            << "\ndigest: " << sgis::file_digest(args.out_path) << '\n';
  return finish(args, started, true);
}

int cmd_sgis(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const LoadedRun run = load_run(args);
  const sgis::SgisResult result =
      sgis::sgis(run.log, run.cfg.space, run.cfg.model, run.objective,
                 run.cfg.algo, args.threads);

  const json doc = sgis::result_to_json("sgis", run.cfg, json::object(),
                                        run.digest, run.deployment.values(),
                                        run.baseline, result);
  sgis::write_json_file(args.out_path, doc);

  print_best(result);
  const std::size_t fine_per_dim =
      run.cfg.algo.d * (run.cfg.algo.c - 1) + 1;
  const double fine_replays =
      std::pow(static_cast<double>(fine_per_dim),
               static_cast<double>(run.cfg.space.dims())) *
      static_cast<double>(run.log.size());
  std::cout << "replays used: " << result.ledger.replay_count()
            << " (full enumeration at " << fine_per_dim
            << " points/dim would use " << json(fine_replays).dump() << ")\n";
  return finish(args, started, !result.best_pool.empty());
}

int cmd_enumerate(const CommonArgs& args, std::size_t points_per_dim) {
  const auto started = std::chrono::steady_clock::now();
  const LoadedRun run = load_run(args);
  sgis::CostLedger ledger;
  const sgis::SgisResult result = sgis::enumerate_baseline(
      run.log, run.cfg.space, run.cfg.model, run.objective, points_per_dim,
      run.cfg.algo, ledger, args.threads);

  const json doc = sgis::result_to_json(
      "enumerate", run.cfg, json{{"points_per_dim", points_per_dim}},
      run.digest, run.deployment.values(), run.baseline, result);
  sgis::write_json_file(args.out_path, doc);

  print_best(result);
  std::cout << "replays used: " << result.ledger.replay_count() << '\n';
  return finish(args, started, !result.best_pool.empty());
}

int cmd_is_baseline(const CommonArgs& args, std::vector<double> start_values) {
  const auto started = std::chrono::steady_clock::now();
  const LoadedRun run = load_run(args);
  if (start_values.empty()) start_values = run.cfg.deployment_setting;
  const auto made = sgis::make_setting(run.cfg.space, start_values);
  if (made.clipped) {
    std::cerr << "warning: start setting clipped into bounds\n";
  }
  const sgis::SgisResult result = sgis::iterative_is_baseline(
      run.log, run.cfg.space, run.cfg.model, run.objective, made.setting,
      run.cfg.algo, args.threads);

  const json doc = sgis::result_to_json(
      "is-baseline", run.cfg, json{{"start", start_values}}, run.digest,
      run.deployment.values(), run.baseline, result);
  sgis::write_json_file(args.out_path, doc);

  print_best(result);
  return finish(args, started, !result.best_pool.empty());
}

int cmd_correlation(const CommonArgs& args, std::vector<double> center_values,
                    std::size_t n_probe) {
  const auto started = std::chrono::steady_clock::now();
  const LoadedRun run = load_run(args);
  if (center_values.empty()) center_values = run.cfg.deployment_setting;
  const auto made = sgis::make_setting(run.cfg.space, center_values);
  if (made.clipped) {
    std::cerr << "warning: correlation center clipped into bounds\n";
  }
  const sgis::RandomizationPolicy policy = sgis::make_randomization_policy(
      run.cfg.space, made.setting, run.cfg.algo.sigma,
      run.cfg.algo.clip_to_bounds);
  const sgis::CorrelationReport report = sgis::correlation_report(
      run.log, run.cfg.space, run.cfg.model, made.setting, policy, n_probe,
      run.cfg.algo, run.cfg.algo.seed, args.threads);

  sgis::write_correlation_csv(args.out_path, run.cfg.space.names, report);
  const json sidecar = sgis::correlation_to_json(
      run.cfg, json{{"center", center_values}, {"n_probe", n_probe}},
      run.digest, report);
  sgis::write_json_file(args.out_path + ".r.json", sidecar);

  if (report.pearson_r.has_value()) {
    std::cout << "pearson_r: " << json(*report.pearson_r).dump() << '\n';
  } else {
    std::cout << "pearson_r: undefined (" << report.undefined_reason << ")\n";
  }
  return finish(args, started, true);
}

json read_meta_if_present(const std::string& result_path) {
  std::ifstream probe(result_path + ".meta.json");
  if (!probe) return json(nullptr);
  return json::parse(probe);
}

int cmd_compare(const std::string& sgis_path, const std::string& enum_path,
                const std::string& isb_path, const std::string& out_path) {
  const json comparison = sgis::compare_results(
      sgis::read_result_file(sgis_path), sgis::read_result_file(enum_path),
      sgis::read_result_file(isb_path));
  sgis::write_json_file(out_path, comparison);
  std::cout << sgis::render_compare_table(
      comparison, {read_meta_if_present(sgis_path), read_meta_if_present(enum_path),
                   read_meta_if_present(isb_path)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGIS: simulator-guided importance sampling for parameter tuning"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<double> start_values;
  std::vector<double> center_values;
  std::size_t points_per_dim = 201;
  std::size_t n_probe = 50;
  std::string cmp_sgis, cmp_enum, cmp_isb;

  auto add_common = [&](CLI::App* cmd, bool needs_log) {
    cmd->add_option("--config", args.config_path,
                    "Config JSON; defaults to the stock problem when omitted");
    if (needs_log) {
      cmd->add_option("--log", args.log_path, "Session log (JSONL)")->required();
    }
    cmd->add_option("--out", args.out_path, "Output path")->required();
    cmd->add_option("--seed", args.seed, "Overrides the config seed");
    cmd->add_option("--threads", args.threads,
                    "Worker threads (0 = machine parallelism)");
  };

  CLI::App* gen = app.add_subcommand("gen-sessions", "Generate a session log");
  add_common(gen, false);

  CLI::App* run_sgis = app.add_subcommand("sgis", "Run the SGIS search");
  add_common(run_sgis, true);

  CLI::App* run_enum =
      app.add_subcommand("enumerate", "Full grid enumeration baseline");
  add_common(run_enum, true);
  run_enum->add_option("--points-per-dim", points_per_dim,
                       "Grid resolution per dimension");

  CLI::App* run_isb =
      app.add_subcommand("is-baseline", "Iterative importance-sampling baseline");
  add_common(run_isb, true);
  run_isb->add_option("--start", start_values,
                      "Start setting (comma-separated); default: deployment")
      ->delimiter(',');

  CLI::App* run_corr = app.add_subcommand(
      "correlation", "IS vs direct-simulation IY-delta scatter");
  add_common(run_corr, true);
  run_corr->add_option("--center", center_values,
                       "Probe center (comma-separated); default: deployment")
      ->delimiter(',');
  run_corr->add_option("--n-probe", n_probe, "Number of probe settings");

  CLI::App* run_cmp = app.add_subcommand("compare", "Cross-method comparison");
  run_cmp->add_option("--sgis", cmp_sgis, "sgis result file")->required();
  run_cmp->add_option("--enumerate", cmp_enum, "enumerate result file")->required();
  run_cmp->add_option("--is-baseline", cmp_isb, "is-baseline result file")
      ->required();
  run_cmp->add_option("--out", args.out_path, "Comparison output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_sessions(args);
    if (run_sgis->parsed()) return cmd_sgis(args);
    if (run_enum->parsed()) return cmd_enumerate(args, points_per_dim);
    if (run_isb->parsed()) return cmd_is_baseline(args, start_values);
    if (run_corr->parsed()) return cmd_correlation(args, center_values, n_probe);
    if (run_cmp->parsed()) {
      return cmd_compare(cmp_sgis, cmp_enum, cmp_isb, args.out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
