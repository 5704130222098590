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

#include "sgis/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sgis {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
  }
}

std::string normalize_name(Normalize n) {
  return n == Normalize::plain ? "plain" : "self_normalized";
}

Normalize normalize_from(const std::string& s) {
  if (s == "plain") return Normalize::plain;
  if (s == "self_normalized") return Normalize::self_normalized;
  throw std::invalid_argument("config: unknown normalize mode '" + s + "'");
}

std::string dense_mode_name(DenseGridMode m) {
  switch (m) {
    case DenseGridMode::automatic: return "automatic";
    case DenseGridMode::full_cartesian: return "full_cartesian";
    case DenseGridMode::axis_sweeps: return "axis_sweeps";
  }
  throw std::logic_error("unreachable dense mode");
}

DenseGridMode dense_mode_from(const std::string& s) {
  if (s == "automatic") return DenseGridMode::automatic;
  if (s == "full_cartesian") return DenseGridMode::full_cartesian;
  if (s == "axis_sweeps") return DenseGridMode::axis_sweeps;
  throw std::invalid_argument("config: unknown dense_mode '" + s + "'");
}

std::string relation_name(ObjectiveConstraint::Relation r) {
  return r == ObjectiveConstraint::Relation::le ? "le" : "ge";
}

ObjectiveConstraint::Relation relation_from(const std::string& s) {
  if (s == "le") return ObjectiveConstraint::Relation::le;
  if (s == "ge") return ObjectiveConstraint::Relation::ge;
  throw std::invalid_argument("config: constraint relation must be 'le' or 'ge'");
}

double cap_from(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("config: cap must be a number or \"inf\"");
  }
  return v.get<double>();
}

json cap_to_json(double cap) {
  if (std::isinf(cap)) return json("inf");
  return json(cap);
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.space = make_parameter_space(
      {"w_bid", "w_quality", "len_knob"},
      {{0.1, 3.0}, {0.1, 3.0}, {-3.0, 3.0}});
  cfg.model = make_user_response_model({1.0, 2.0, -0.35}, 0.85);
  cfg.deployment_setting = {1.0, 1.0, 0.55};
  cfg.maximize = Kpi::rpm;
  cfg.constraints = {{Kpi::iy, ObjectiveConstraint::Relation::le, 0.0}};
  cfg.algo = SgisConfig{};
  cfg.algo.m = 3;
  cfg.algo.sigma = {0.25, 0.25, 2.0};
  return cfg;
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: root must be a JSON object");
  reject_unknown(doc,
                 {"schema", "space", "model", "deployment_setting", "objective",
                  "algorithm", "sessions", "seed"},
                 "root");
  if (doc.contains("schema") && doc.at("schema").get<int>() != 1) {
    throw std::invalid_argument("config: unsupported schema version");
  }

  RunConfig cfg = default_run_config();
  bool space_overridden = false;

  if (doc.contains("space")) {
    const json& sp = doc.at("space");
    reject_unknown(sp, {"names", "bounds"}, "space");
    if (!sp.contains("names") || !sp.contains("bounds")) {
      throw std::invalid_argument("config: space needs both names and bounds");
    }
    const auto names = sp.at("names").get<std::vector<std::string>>();
    const auto raw_bounds = sp.at("bounds").get<std::vector<std::vector<double>>>();
    std::vector<Bounds> bounds;
    for (const auto& b : raw_bounds) {
      if (b.size() != 2) {
        throw std::invalid_argument("config: each bound must be a [lo, hi] pair");
      }
      bounds.push_back({b[0], b[1]});
    }
    cfg.space = make_parameter_space(names, bounds);
    space_overridden = true;
    cfg.algo.m = cfg.space.dims();
    cfg.algo.sigma.clear();  // must be provided for a custom space
    cfg.deployment_setting.clear();
  }

  if (doc.contains("model")) {
    const json& mo = doc.at("model");
    reject_unknown(mo, {"click_weights", "position_decay"}, "model");
    std::vector<double> weights = cfg.model.click_weights;
    double decay = cfg.model.position_decay;
    if (mo.contains("click_weights")) weights = mo.at("click_weights").get<std::vector<double>>();
    if (mo.contains("position_decay")) decay = mo.at("position_decay").get<double>();
    cfg.model = make_user_response_model(weights, decay);
  }

  if (doc.contains("deployment_setting")) {
    cfg.deployment_setting = doc.at("deployment_setting").get<std::vector<double>>();
  }

  if (doc.contains("objective")) {
    const json& ob = doc.at("objective");
    reject_unknown(ob, {"maximize", "constraints"}, "objective");
    if (ob.contains("maximize")) {
      cfg.maximize = kpi_from_name(ob.at("maximize").get<std::string>());
    }
    if (ob.contains("constraints")) {
      cfg.constraints.clear();
      for (const json& c : ob.at("constraints")) {
        reject_unknown(c, {"kpi", "relation", "threshold_pct"}, "constraint");
        ObjectiveConstraint con;
        con.kpi = kpi_from_name(c.at("kpi").get<std::string>());
        con.relation = relation_from(c.at("relation").get<std::string>());
        con.threshold_pct = c.at("threshold_pct").get<double>();
        if (!std::isfinite(con.threshold_pct)) {
          throw std::invalid_argument("config: constraint threshold must be finite");
        }
        cfg.constraints.push_back(con);
      }
    }
  }

  if (doc.contains("algorithm")) {
    const json& al = doc.at("algorithm");
    reject_unknown(al,
                   {"c", "d", "k", "u", "epsilon", "cap", "n_artificial",
                    "sigma", "clip_to_bounds", "normalize", "dense_mode",
                    "half_width_sigmas", "grid_point_cap"},
                   "algorithm");
    SgisConfig& a = cfg.algo;
    if (al.contains("c")) a.c = al.at("c").get<std::size_t>();
    if (al.contains("d")) a.d = al.at("d").get<std::size_t>();
    if (al.contains("k")) a.k = al.at("k").get<std::size_t>();
    if (al.contains("u")) a.u = al.at("u").get<std::size_t>();
    if (al.contains("epsilon")) a.epsilon = al.at("epsilon").get<double>();
    if (al.contains("cap")) a.cap = cap_from(al.at("cap"));
    if (al.contains("n_artificial")) a.n_artificial = al.at("n_artificial").get<std::size_t>();
    if (al.contains("sigma")) a.sigma = al.at("sigma").get<std::vector<double>>();
    if (al.contains("clip_to_bounds")) a.clip_to_bounds = al.at("clip_to_bounds").get<bool>();
    if (al.contains("normalize")) a.normalize = normalize_from(al.at("normalize").get<std::string>());
    if (al.contains("dense_mode")) a.dense_mode = dense_mode_from(al.at("dense_mode").get<std::string>());
    if (al.contains("half_width_sigmas")) a.half_width_sigmas = al.at("half_width_sigmas").get<double>();
    if (al.contains("grid_point_cap")) a.grid_point_cap = al.at("grid_point_cap").get<std::size_t>();
  }

  if (doc.contains("sessions")) {
    const json& se = doc.at("sessions");
    reject_unknown(se, {"n_sessions"}, "sessions");
    if (se.contains("n_sessions")) {
      cfg.algo.n_sessions = se.at("n_sessions").get<std::size_t>();
    }
  }

  if (doc.contains("seed")) {
    cfg.algo.seed = doc.at("seed").get<std::uint64_t>();
    cfg.seed_in_file = true;
  }

  if (space_overridden) {
    if (cfg.algo.sigma.empty()) {
      throw std::invalid_argument(
          "config: a custom space requires algorithm.sigma (one entry per dimension)");
    }
    if (cfg.deployment_setting.empty()) {
      throw std::invalid_argument(
          "config: a custom space requires deployment_setting");
    }
  }
  if (cfg.deployment_setting.size() != cfg.space.dims()) {
    throw std::invalid_argument(
        "config: deployment_setting length does not match the space");
  }
  validate_config(cfg.algo, cfg.space);
  return cfg;
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  json bounds = json::array();
  for (const Bounds& b : config.space.bounds) {
    bounds.push_back(json::array({b.lo, b.hi}));
  }
  json constraints = json::array();
  for (const ObjectiveConstraint& c : config.constraints) {
    constraints.push_back(json{{"kpi", kpi_name(c.kpi)},
                               {"relation", relation_name(c.relation)},
                               {"threshold_pct", c.threshold_pct}});
  }
  const SgisConfig& a = config.algo;
  return json{
      {"schema", 1},
      {"space", {{"names", config.space.names}, {"bounds", std::move(bounds)}}},
      {"model",
       {{"click_weights", config.model.click_weights},
        {"position_decay", config.model.position_decay}}},
      {"deployment_setting", config.deployment_setting},
      {"objective",
       {{"maximize", kpi_name(config.maximize)},
        {"constraints", std::move(constraints)}}},
      {"algorithm",
       {{"c", a.c},
        {"d", a.d},
        {"k", a.k},
        {"u", a.u},
        {"epsilon", a.epsilon},
        {"cap", cap_to_json(a.cap)},
        {"n_artificial", a.n_artificial},
        {"sigma", a.sigma},
        {"clip_to_bounds", a.clip_to_bounds},
        {"normalize", normalize_name(a.normalize)},
        {"dense_mode", dense_mode_name(a.dense_mode)},
        {"half_width_sigmas", a.half_width_sigmas},
        {"grid_point_cap", a.grid_point_cap}}},
      {"sessions", {{"n_sessions", a.n_sessions}}},
      {"seed", a.seed}};
}

}  // namespace sgis
