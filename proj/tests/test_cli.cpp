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

#include <doctest.h>

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadecap/cli.hpp"

using nlohmann::json;
namespace fc = fadecap::cli;

namespace {

struct Run {
  int rc = 0;
  std::string csv, report, err;
};

Run run(const std::string& cmd, const json& cfg, std::optional<std::uint64_t> seed = 11, unsigned threads = 0) {
  fc::RunOptions opts;
  opts.seed = seed;
  opts.threads = threads;
  std::ostringstream csv, report, err;
  Run r;
  r.rc = fc::run_command_guarded(cmd, cfg, opts, csv, report, err);
  r.csv = csv.str();
  r.report = report.str();
  r.err = err.str();
  return r;
}

struct Table {
  std::vector<std::string> meta;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;

  double num(std::size_t r, const std::string& col) const { return std::stod(rows.at(r).at(col)); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

Table parse(const std::string& csv) {
  Table t;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      t.meta.push_back(line);
    } else if (t.header.empty()) {
      t.header = split(line);
    } else {
      auto cells = split(line);
      REQUIRE(cells.size() == t.header.size());
      std::map<std::string, std::string> row;
      for (std::size_t i = 0; i < cells.size(); ++i) row[t.header[i]] = cells[i];
      t.rows.push_back(row);
    }
  }
  return t;
}

json curve_config(const std::string& kind) {
  json j = json::parse(R"({
    "constellation": {"family": "bpsk"},
    "channel": {"type": "rayleigh", "n_r": 1},
    "snr_db": {"start": 0, "stop": 30, "step": 5},
    "mc": {"channel_draws": 2000, "noise_draws": 20, "chunks": 8}
  })");
  j["kind"] = kind;
  return j;
}

}  // namespace

TEST_CASE("curve rows and sandwich") {
  for (const char* kind : {"mi", "mmse", "pe"}) {
    CAPTURE(kind);
    Run r = run("curve", curve_config(kind));
    REQUIRE(r.err.empty());
    CHECK((r.rc == fc::kOk || r.rc == fc::kFlagged));
    Table t = parse(r.csv);
    REQUIRE(t.rows.size() == 7);
    CHECK(t.header.size() == 15);
    CHECK(t.header.front() == "snr_db");
    CHECK(t.header.back() == "flag");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double m = t.num(i, "mc_mean"), se = t.num(i, "mc_stderr");
      CHECK(m >= t.num(i, "bound_lb") - 3 * se - 1e-12);
      CHECK(m <= t.num(i, "bound_ub") + 3 * se + 1e-12);
      CHECK(t.num(i, "snr_db") == doctest::Approx(5.0 * i));
      if (std::string(kind) == "mi") {
        CHECK(t.num(i, "mc_mean_bits") == doctest::Approx(m / std::log(2.0)).epsilon(1e-10));
      } else {
        CHECK(t.rows[i].at("mc_mean_bits").empty());
      }
    }
  }
}

TEST_CASE("curve pe bounds coincide for two points") {
  Table t = parse(run("curve", curve_config("pe")).csv);
  for (const auto& row : t.rows) CHECK(row.at("bound_lb") == row.at("bound_ub"));
}

TEST_CASE("curve is byte-identical across reruns and thread counts") {
  json cfg = curve_config("mi");
  Run a = run("curve", cfg, 5, 1), b = run("curve", cfg, 5, 3), c = run("curve", cfg, 6, 1);
  CHECK(a.csv == b.csv);
  CHECK(a.csv != c.csv);
  CHECK(a.csv.find("# fadecap 0.1.0\n") == 0);
  CHECK(a.csv.find("# seed: 5\n") != std::string::npos);
  CHECK(a.csv.find("# config_digest: fnv1a64:") != std::string::npos);
}

TEST_CASE("numbers use twelve significant digits") {
  CHECK(fc::format_number(2.0 / 3.0) == "0.666666666667");
  CHECK(fc::format_number(0.0) == "0");
  CHECK(fc::format_number(-1e-20) == "-1e-20");
  CHECK(fc::format_number(12345678901234.0) == "1.23456789012e+13");
}

TEST_CASE("config errors name the field") {
  json cfg = curve_config("mi");
  cfg["mc"]["noise_drawz"] = 3;
  Run r = run("curve", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("mc.noise_drawz") != std::string::npos);
  CHECK(r.csv.empty());

  cfg = curve_config("mi");
  cfg["kind"] = "capacity";
  r = run("curve", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("kind") != std::string::npos);

  cfg = curve_config("mi");
  cfg["channel"]["n_r"] = 0;
  r = run("curve", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("channel.n_r") != std::string::npos);

  cfg = curve_config("mi");
  cfg["channel"] = json::parse(R"({"type": "correlated", "theta_t": [[1, 2], [2, 1]], "theta_r": [[1]]})");
  r = run("curve", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("channel.theta_t") != std::string::npos);

  cfg = curve_config("mi");
  cfg.erase("snr_db");
  r = run("curve", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("snr_db") != std::string::npos);

  r = run("curve", curve_config("mi"), std::nullopt);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("--seed") != std::string::npos);

  r = run("plot", curve_config("mi"));
  CHECK(r.rc == fc::kConfig);
}

TEST_CASE("overrides") {
  json cfg = curve_config("mi");
  fc::apply_override(cfg, "mc.channel_draws=50");
  fc::apply_override(cfg, "kind=pe");
  fc::apply_override(cfg, "snr_db=[0,10]");
  fc::apply_override(cfg, "extra.nested.key=1.5");
  CHECK(cfg["mc"]["channel_draws"] == 50);
  CHECK(cfg["kind"] == "pe");
  CHECK(cfg["snr_db"].size() == 2);
  CHECK(cfg["extra"]["nested"]["key"] == 1.5);
  CHECK_THROWS_AS(fc::apply_override(cfg, "novalue"), fc::ConfigError);
  CHECK_THROWS_AS(fc::apply_override(cfg, "kind.sub=1"), fc::ConfigError);
  CHECK(run("curve", cfg).rc == fc::kConfig);
}

TEST_CASE("config digest tracks content") {
  json a = curve_config("mi"), b = curve_config("mi");
  CHECK(fc::config_digest(a) == fc::config_digest(b));
  b["mc"]["channel_draws"] = 2001;
  CHECK(fc::config_digest(a) != fc::config_digest(b));
}

TEST_CASE("offsets spreads") {
  json cfg = json::parse(R"({
    "systems": [
      {"name": "qam16", "constellation": {"family": "QAM16"}, "channel": {"type": "rayleigh", "n_r": 1}, "anchor_snr_db": 25},
      {"name": "bpsk", "constellation": {"family": "bpsk"}, "channel": {"type": "rayleigh", "n_r": 1}, "anchor_snr_db": 25},
      {"name": "qam64", "constellation": {"family": "qam64"}, "channel": {"type": "rayleigh", "n_r": 1}, "anchor_snr_db": 10}
    ],
    "mc": {"channel_draws": 200, "noise_draws": 2}
  })");
  Run r = run("offsets", cfg);
  CHECK((r.rc == fc::kOk || r.rc == fc::kFlagged));
  Table t = parse(r.csv);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.num(0, "spread_db") == doctest::Approx(8.9).epsilon(0.006));
  CHECK(t.num(0, "spread_prime_db") == doctest::Approx(17.8).epsilon(0.003));
  CHECK(t.num(1, "spread_db") == doctest::Approx(3.0).epsilon(0.01));
  CHECK(t.num(1, "spread_prime_db") == doctest::Approx(6.0).epsilon(0.01));
  CHECK(t.num(2, "spread_db") == doctest::Approx(12.0).epsilon(0.005));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (!t.rows[i].at("delta_lb_db").empty()) {
      CHECK(t.num(i, "delta_ub_db") - t.num(i, "delta_lb_db") == doctest::Approx(t.num(i, "spread_db")));
      CHECK(t.num(i, "delta_prime_lb_db") - t.num(i, "delta_prime_ub_db") ==
            doctest::Approx(t.num(i, "spread_prime_db")));
    }
  }
  if (r.rc == fc::kFlagged) CHECK(r.csv.find("mc_unresolved") != std::string::npos);
}

TEST_CASE("offsets with too few draws are flagged") {
  json cfg = json::parse(R"({
    "systems": [{"name": "s", "constellation": {"family": "bpsk"}, "channel": {"type": "rayleigh", "n_r": 1},
                 "anchor_snr_db": 40}],
    "mc": {"channel_draws": 3, "noise_draws": 1, "chunks": 1}
  })");
  Run r = run("offsets", cfg);
  CHECK(r.rc == fc::kFlagged);
  CHECK(parse(r.csv).rows.at(0).at("flag") == "mc_unresolved");
}

TEST_CASE("palloc columns") {
  json cfg = json::parse(R"({
    "subchannels": [
      {"constellation": {"family": "qam16"}, "fading": {"type": "rayleigh", "variance": 4}},
      {"constellation": {"family": "qam16"}, "fading": {"type": "rayleigh", "variance": 1}}
    ],
    "budget": 2,
    "snr_db": [10, 20],
    "mc": {"channel_draws": 100, "noise_draws": 5}
  })");
  Run r = run("palloc", cfg);
  CHECK(r.rc == fc::kOk);
  Table t = parse(r.csv);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.num(0, "p1_highsnr") == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  CHECK(t.num(0, "p2_highsnr") == doctest::Approx(4.0 / 3.0).epsilon(1e-11));
  CHECK(t.rows[0].at("p1_numeric").empty());
  CHECK(t.num(1, "capacity_highsnr_bits") == doctest::Approx(t.num(1, "capacity_highsnr_nats") / std::log(2.0)));
  CHECK(t.num(1, "capacity_highsnr_nats") > t.num(0, "capacity_highsnr_nats"));

  cfg["subchannels"][0]["fading"] = json::parse(R"({"type": "ricean", "mean": [1, 1], "variance": 4})");
  cfg["subchannels"][1]["fading"] = json::parse(R"({"type": "ricean", "mean": [1, 1], "variance": 1})");
  t = parse(run("palloc", cfg).csv);
  CHECK(t.num(0, "p1_highsnr") / t.num(0, "p2_highsnr") == doctest::Approx(std::exp(0.75) / 2).epsilon(1e-10));

  cfg["numeric"] = true;
  cfg["snr_db"] = json::array({10});
  cfg["subchannels"][1] = cfg["subchannels"][0];
  r = run("palloc", cfg);
  t = parse(r.csv);
  CHECK(t.num(0, "p1_numeric") + t.num(0, "p2_numeric") == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(t.rows[0].at("low_confidence") == (r.rc == fc::kFlagged ? "1" : "0"));

  cfg["subchannels"][0]["fading"]["type"] = "nakagami";
  r = run("palloc", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("subchannels[0].fading.type") != std::string::npos);
}

TEST_CASE("precode canonical reports identity and certification") {
  json cfg = json::parse(R"({
    "constellation": {"family": "qpsk", "n_t": 2},
    "channel": {"type": "rayleigh", "n_r": 2},
    "budget": 2,
    "probes": 200
  })");
  Run r = run("precode", cfg);
  CHECK(r.rc == fc::kOk);
  CHECK(r.csv.find("# path: canonical\n") != std::string::npos);
  CHECK(r.csv.find("probes_better_than_design: 0\n") != std::string::npos);
  CHECK(r.report.find("[1+0j, 0+0j]") != std::string::npos);
  CHECK(r.report.find("200 of 200") != std::string::npos);
  CHECK(parse(r.csv).rows.empty());

  cfg["channel"] = json::parse(R"({"type": "ricean", "K": 1, "a_t": [1, 1], "a_r": [1, 1]})");
  r = run("precode", cfg);
  CHECK(r.rc == fc::kConfig);
  CHECK(r.err.find("channel.type") != std::string::npos);
}

TEST_CASE("precode correlated beats identity") {
  json cfg = json::parse(R"({
    "constellation": {"family": "qpsk", "n_t": 2},
    "channel": {"type": "correlated", "theta_t": [[1, 0.5], [0.5, 1]], "theta_r": [[1, 0.8], [0.8, 1]]},
    "budget": 2,
    "probes": 50,
    "restarts": 2,
    "snr_db": [5],
    "mc": {"channel_draws": 300, "noise_draws": 10}
  })");
  Run r = run("precode", cfg);
  CHECK(r.rc == fc::kOk);
  Table t = parse(r.csv);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.num(0, "design_nats") > t.num(0, "identity_nats"));
}

TEST_CASE("stcode ordering and rows") {
  json cfg = json::parse(R"({
    "n_r": 2,
    "codes": [
      {"name": "rep", "n_t": 2, "t": 2, "codewords": [
        [[0.5, 0.5], [0.5, 0.5]], [[-0.5, -0.5], [-0.5, -0.5]]]},
      {"name": "alamouti", "n_t": 2, "t": 2, "codewords": [
        [[0.5, -0.5], [0.5, 0.5]], [[-0.5, 0.5], [-0.5, -0.5]]]}
    ]
  })");
  Run r = run("stcode", cfg, std::nullopt);
  CHECK(r.rc == fc::kOk);
  CHECK(r.csv.find("# ordering: alamouti > rep\n") != std::string::npos);
  CHECK(r.csv.find("# seed: none\n") != std::string::npos);
  Table t = parse(r.csv);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].at("r_min") == "2");
  CHECK(t.rows[1].at("d") == "4");
  CHECK(t.rows[0].at("pe_mc").empty());

  json same = cfg;
  same["codes"][0] = cfg["codes"][1];
  same["codes"][0]["name"] = "copy";
  CHECK(run("stcode", same, std::nullopt).csv.find("# ordering: copy = alamouti\n") != std::string::npos);

  cfg["mc_snr_db"] = 10;
  CHECK(run("stcode", cfg, std::nullopt).rc == fc::kConfig);
  cfg["mc"] = json::parse(R"({"channel_draws": 200, "noise_draws": 5})");
  t = parse(run("stcode", cfg).csv);
  CHECK(t.num(0, "pe_mc") > t.num(1, "pe_mc"));

  cfg["codes"][1]["codewords"][1] = cfg["codes"][1]["codewords"][0];
  Run dup = run("stcode", cfg);
  CHECK(dup.rc == fc::kConfig);
  CHECK(dup.err.find("codes[1].codewords") != std::string::npos);
}
