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

#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "fadecap/cli.hpp"

int main(int argc, char** argv) {
  namespace fc = fadecap::cli;
  CLI::App app{"Constrained capacity, MMSE and error probability of MIMO fading channels"};
  app.set_version_flag("--version", fc::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> overrides;
  const std::pair<const char*, const char*> commands[] = {
      {"curve", "MC estimate, bounds and high-snr expansion over an snr grid"},
      {"offsets", "Leading constants and snr offsets per system"},
      {"palloc", "Power allocation over parallel subchannels"},
      {"precode", "Linear precoder design with random-probe check"},
      {"stcode", "Space-time code ranking by rank and determinant criterion"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--threads", threads, "Worker cap; results do not depend on it");
    sub->add_option("--out", out_path, "CSV output file (default: stdout)");
    sub->add_option("--set", overrides, "Override a config key, e.g. mc.channel_draws=5000");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : fc::kConfig;
  }
  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "fadecap: config error: --config: cannot open " << config_path << '\n';
    return fc::kConfig;
  }
  nlohmann::json config = nlohmann::json::parse(in, nullptr, false);
  if (config.is_discarded()) {
    std::cerr << "fadecap: config error: --config: " << config_path << " is not valid JSON\n";
    return fc::kConfig;
  }
  fc::RunOptions opts;
  if (sub->count("--seed")) opts.seed = seed;
  opts.threads = threads;
  try {
    for (const auto& o : overrides) fc::apply_override(config, o);
  } catch (const fc::ConfigError& e) {
    std::cerr << "fadecap: config error: " << e.what() << '\n';
    return fc::kConfig;
  }
  if (out_path.empty() && config.is_object() && config.contains("out")) {
    if (!config["out"].is_string()) {
      std::cerr << "fadecap: config error: out: expected a string\n";
      return fc::kConfig;
    }
    out_path = config["out"].get<std::string>();
  }

  std::ostringstream csv;
  int rc = fc::run_command_guarded(command, config, opts, csv, std::cerr, std::cerr);
  if (rc != fc::kOk && rc != fc::kFlagged) return rc;
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << csv.str())) {
      std::cerr << "fadecap: cannot write " << out_path << '\n';
      return fc::kConfig;
    }
  }
  return rc;
}
