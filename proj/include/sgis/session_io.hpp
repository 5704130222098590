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

#ifndef SGIS_SESSION_IO_HPP
#define SGIS_SESSION_IO_HPP

#include <cstdint>
#include <string>

#include "sgis/simulator.hpp"

namespace sgis {

/// Line-delimited session log, one JSON object per session, schema tag v=1.
/// Writing is deterministic: identical logs produce identical bytes.
void write_session_log(const SessionLog& log, const std::string& path);

/// Parses a session-log file. Malformed lines raise errors naming the
/// 1-based line number.
SessionLog read_session_log(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 lowercase hex digits.
/// Results carry this so cross-method comparisons can refuse mismatched logs.
std::string file_digest(const std::string& path);

}  // namespace sgis

#endif  // SGIS_SESSION_IO_HPP
