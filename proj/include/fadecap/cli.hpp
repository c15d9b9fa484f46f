// SPDX-License-Identifier: Apache-2.0
//
// fadecap - constrained capacity of MIMO fading channels
// Copyright (C) 2026 The fadecap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadecap/error.hpp"

namespace fadecap::cli {

inline constexpr const char* kToolVersion = "fadecap 0.1.0";

// Malformed or inconsistent configuration; the message names the field.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum ExitCode : int { kOk = 0, kConfig = 2, kNumeric = 3, kFlagged = 4 };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

// Applies "a.b.c=value" overrides; value is parsed as JSON, falling back to a
// plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

std::uint64_t config_digest(const nlohmann::json& config);

// Runs one command. CSV (with # metadata lines) goes to csv, the
// human-readable report to report. Returns kOk or kFlagged; throws
// ConfigError / InvalidInput / NumericError otherwise.
int run_command(const std::string& command, const nlohmann::json& config, const RunOptions& opts,
                std::ostream& csv, std::ostream& report);

// run_command plus the exception-to-exit-code mapping; errors are written to err.
int run_command_guarded(const std::string& command, const nlohmann::json& config, const RunOptions& opts,
                        std::ostream& csv, std::ostream& report, std::ostream& err);

std::string format_number(double v);

}  // namespace fadecap::cli
