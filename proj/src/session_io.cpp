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

#include "sgis/session_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sgis {
namespace {

using nlohmann::json;

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("session log line " + std::to_string(line_no) +
                           ": " + what);
}

void require_keys(const json& obj, std::initializer_list<const char*> keys,
                  std::size_t line_no) {
  for (const char* key : keys) {
    if (!obj.contains(key)) line_error(line_no, std::string("missing key '") + key + "'");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) line_error(line_no, "unknown key '" + key + "'");
  }
}

}  // namespace

void write_session_log(const SessionLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const Session& s : log.sessions) {
    json candidates = json::array();
    for (const CandidateAd& ad : s.candidates) {
      candidates.push_back(json{{"base_click_logit", ad.base_click_logit},
                                {"bid", ad.bid},
                                {"quality", ad.quality}});
    }
    const json line = {{"candidates", std::move(candidates)},
                       {"session_id", s.session_id},
                       {"user_features", s.user_features},
                       {"v", 1}};
    out << line.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SessionLog read_session_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open session log '" + path + "'");

  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) line_error(line_no, "empty line");
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(line_no, e.what());
    }
    if (!obj.is_object()) line_error(line_no, "not a JSON object");
    require_keys(obj, {"candidates", "session_id", "user_features", "v"}, line_no);
    if (!obj["v"].is_number_integer() || obj["v"].get<int>() != 1) {
      line_error(line_no, "unsupported schema version");
    }

    Session s;
    try {
      s.session_id = obj.at("session_id").get<std::uint64_t>();
      s.user_features = obj.at("user_features").get<std::vector<double>>();
      for (const json& c : obj.at("candidates")) {
        if (!c.is_object()) line_error(line_no, "candidate is not an object");
        require_keys(c, {"base_click_logit", "bid", "quality"}, line_no);
        CandidateAd ad;
        ad.bid = c.at("bid").get<double>();
        ad.quality = c.at("quality").get<double>();
        ad.base_click_logit = c.at("base_click_logit").get<double>();
        s.candidates.push_back(ad);
      }
    } catch (const json::exception& e) {
      line_error(line_no, e.what());
    }
    if (s.candidates.empty()) line_error(line_no, "session has no candidates");
    log.sessions.push_back(std::move(s));
  }
  return log;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for digest");
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001B3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buffer))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(hex);
}

}  // namespace sgis
