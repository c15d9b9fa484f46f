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

#include "fadecap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fadecap/asymptotics.hpp"
#include "fadecap/bounds.hpp"
#include "fadecap/designs.hpp"
#include "fadecap/mc.hpp"
#include "fadecap/model.hpp"
#include "fadecap/rng.hpp"

namespace fadecap::cli {

using nlohmann::json;

namespace {

constexpr double kLn2 = std::numbers::ln2;

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

// Strict view of a JSON object: every key must be consumed before finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& get(const std::string& key) {
    if (!j_.contains(key)) fail(at(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }
  const json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key) { return as_number(get(key), at(key)); }
  double number_or(const std::string& key, double def) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : def;
  }
  long long integer(const std::string& key, long long min) { return as_integer(get(key), at(key), min); }
  long long integer_or(const std::string& key, long long def, long long min) {
    const json* v = find(key);
    return v ? as_integer(*v, at(key), min) : def;
  }
  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  bool boolean_or(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    return v->get<bool>();
  }
  Obj object(const std::string& key) { return Obj(get(key), at(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }
  static long long as_integer(const json& v, const std::string& path, long long min) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    long long x = v.get<long long>();
    if (x < min) fail(path, "must be >= " + std::to_string(min));
    return x;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

cd parse_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {Obj::as_number(v, path), 0.0};
  if (v.is_array() && v.size() == 2)
    return {Obj::as_number(v[0], path + "[0]"), Obj::as_number(v[1], path + "[1]")};
  fail(path, "expected a number or [re, im]");
}

CVector parse_cvector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
  CVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = parse_complex(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

// List of rows.
CMatrix parse_cmatrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  std::vector<CVector> rows;
  for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(parse_cvector(v[i], path + "[" + std::to_string(i) + "]"));
  CMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) fail(path, "rows have different lengths");
    m.row(i) = rows[i].transpose();
  }
  return m;
}

template <class F>
auto guard(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    fail(path, e.what());
  }
}

Constellation parse_constellation(Obj o) {
  std::optional<Constellation> c;
  if (o.has("family")) {
    std::string fam = o.string("family");
    int n_t = static_cast<int>(o.integer_or("n_t", 1, 1));
    if (o.has("points")) fail(o.at("points"), "give either family or points");
    Family f = guard(o.at("family"), [&] { return parse_family(fam); });
    c = guard(o.at("n_t"), [&] { return make_constellation(f, n_t); });
  } else {
    const json& pts = o.get("points");
    CMatrix rows = parse_cmatrix(pts, o.at("points"));
    c = guard(o.at("points"), [&] { return make_constellation(CMatrix(rows.transpose())); });
  }
  o.finish();
  return *c;
}

ChannelModel parse_channel(Obj o, int n_t) {
  const std::string type = o.string("type");
  std::optional<ChannelModel> m;
  if (type == "rayleigh") {
    int n_r = static_cast<int>(o.integer("n_r", 1));
    m = ChannelModel::canonical(n_t, n_r);
  } else if (type == "correlated") {
    CMatrix tt = parse_cmatrix(o.get("theta_t"), o.at("theta_t"));
    CMatrix tr = parse_cmatrix(o.get("theta_r"), o.at("theta_r"));
    if (tt.rows() != n_t) fail(o.at("theta_t"), "size must equal the constellation n_t");
    m = guard(o.at("theta_t"), [&] { return ChannelModel::correlated(tt, tr); });
  } else if (type == "ricean") {
    double K = o.number("K");
    CVector at = parse_cvector(o.get("a_t"), o.at("a_t"));
    CVector ar = parse_cvector(o.get("a_r"), o.at("a_r"));
    if (at.size() != n_t) fail(o.at("a_t"), "length must equal the constellation n_t");
    m = guard(o.at("K"), [&] { return ChannelModel::ricean(K, at, ar); });
  } else {
    fail(o.at("type"), "expected rayleigh, correlated or ricean");
  }
  o.finish();
  return *m;
}

std::vector<double> parse_snr_db(const json& v, const std::string& path) {
  std::vector<double> db;
  if (v.is_number()) {
    db.push_back(Obj::as_number(v, path));
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) db.push_back(Obj::as_number(v[i], path + "[" + std::to_string(i) + "]"));
  } else {
    Obj o(v, path);
    double start = o.number("start"), stop = o.number("stop"), step = o.number("step");
    o.finish();
    if (!(step > 0.0)) fail(path + ".step", "must be positive");
    if (stop < start) fail(path + ".stop", "must be >= start");
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) db.push_back(start + i * step);
  }
  if (db.empty()) fail(path, "empty grid");
  return db;
}

struct McSettings {
  McConfig cfg;
  bool auto_noise = false;
};

McSettings parse_mc(Obj o, std::uint64_t seed, unsigned threads, bool allow_auto) {
  McSettings s;
  s.cfg.seed = seed;
  s.cfg.max_threads = threads;
  s.cfg.channel_draws = static_cast<std::size_t>(o.integer_or("channel_draws", 1000, 1));
  if (const json* nd = o.find("noise_draws")) {
    if (allow_auto && nd->is_string() && nd->get<std::string>() == "auto") {
      s.auto_noise = true;
    } else {
      s.cfg.noise_draws_per_channel = static_cast<std::size_t>(Obj::as_integer(*nd, o.at("noise_draws"), 1));
    }
  }
  s.cfg.parallel_chunks = static_cast<std::size_t>(o.integer_or("chunks", 16, 1));
  o.finish();
  return s;
}

McSettings mc_from(Obj& root, const RunOptions& opts, bool allow_auto = false) {
  if (root.has("mc")) return parse_mc(root.object("mc"), *opts.seed, opts.threads, allow_auto);
  McSettings s;
  s.cfg.seed = *opts.seed;
  s.cfg.max_threads = opts.threads;
  return s;
}

void require_seed(const RunOptions& opts) {
  if (!opts.seed) throw ConfigError("--seed: required for Monte Carlo commands");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Csv {
 public:
  explicit Csv(std::ostream& os) : os_(os) {}
  Csv& num(double v) { return cell(format_number(v)); }
  Csv& integer(long long v) { return cell(std::to_string(v)); }
  Csv& cell(const std::string& s) {
    if (n_++) os_ << ',';
    os_ << s;
    return *this;
  }
  Csv& empty() { return cell(""); }
  void end() {
    os_ << '\n';
    n_ = 0;
  }

 private:
  std::ostream& os_;
  int n_ = 0;
};

void write_metadata(std::ostream& os, const std::string& command, const json& config, const RunOptions& opts) {
  os << "# " << kToolVersion << '\n';
  os << "# command: " << command << '\n';
  os << "# seed: " << (opts.seed ? std::to_string(*opts.seed) : std::string("none")) << '\n';
  os << "# config_digest: fnv1a64:" << hex64(config_digest(config)) << '\n';
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string matrix_text(const CMatrix& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    out += "  [";
    for (int c = 0; c < m.cols(); ++c) {
      const cd z = m(r, c);
      out += (c ? ", " : "") + format_number(z.real()) + (z.imag() < 0 ? "-" : "+") +
             format_number(std::abs(z.imag())) + "j";
    }
    out += "]\n";
  }
  return out;
}

// curve

int cmd_curve(const json& config, const RunOptions& opts, std::ostream& os, std::ostream& report) {
  require_seed(opts);
  Obj root(config, "");
  Constellation c = parse_constellation(root.object("constellation"));
  ChannelModel model = parse_channel(root.object("channel"), c.n_t());
  const std::string kind_name = root.string("kind");
  Quantity kind = guard(root.at("kind"), [&] { return parse_quantity(kind_name); });
  std::vector<double> db = parse_snr_db(root.get("snr_db"), "snr_db");
  McSettings mc = mc_from(root, opts);
  root.find("out");
  root.finish();

  SnrGrid grid = SnrGrid::from_db_list(db);
  ExpansionBounds eb = epsilon_bounds(distance_dist(model, c), c.size());
  ExpansionCurves ex = evaluate_expansion(eb, grid);
  const bool ricean = std::holds_alternative<Ricean>(model.spec());

  write_metadata(os, "curve", config, opts);
  os << "# kind: " << kind_name << ", diversity_order: " << eb.d << '\n';
  os << "snr_db,kind,mc_mean,mc_stderr,bound_lb,bound_ub,expansion_lb,expansion_ub,mc_mean_bits,mc_stderr_bits,"
        "bound_lb_bits,bound_ub_bits,expansion_lb_bits,expansion_ub_bits,flag\n";
  Csv row(os);
  int unresolved = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double snr = grid[g];
    QuantityEstimates est = avg_all(snr, model, c, mc.cfg);
    AllBoundEstimates bnd = avg_bounds_all(snr, model, c, mc.cfg);
    const Estimate& e = est.get(kind);
    const EstimatePair& b = bnd.get(kind);
    double xl = 0, xu = 0;
    switch (kind) {
      case Quantity::mi: xl = ex.mi_lb[g], xu = ex.mi_ub[g]; break;
      case Quantity::mmse: xl = ex.mmse_lb[g], xu = ex.mmse_ub[g]; break;
      case Quantity::pe: xl = ex.pe_lb[g], xu = ex.pe_ub[g]; break;
    }
    std::vector<std::string> flags;
    const Estimate& resolved = kind == Quantity::mi ? est.mi_gap : e;
    if (resolved.mean == 0.0 || !(resolved.std_error <= 0.2 * std::abs(resolved.mean))) {
      flags.push_back("mc_unresolved");
      ++unresolved;
    }
    if (ricean && eb.mi.lower / std::pow(snr, eb.d) > 10.0 * est.mi_gap.mean) flags.push_back("expansion_10x");

    row.num(db[g]).cell(kind_name).num(e.mean).num(e.std_error).num(b.lower.mean).num(b.upper.mean).num(xl).num(xu);
    if (kind == Quantity::mi) {
      for (double v : {e.mean, e.std_error, b.lower.mean, b.upper.mean, xl, xu}) row.num(v / kLn2);
    } else {
      for (int k = 0; k < 6; ++k) row.empty();
    }
    row.cell(join(flags, ";")).end();
  }
  report << "curve: " << grid.size() << " grid points, kind " << kind_name << ", d = " << eb.d;
  if (unresolved) report << ", " << unresolved << " point(s) below mc resolution";
  report << '\n';
  return unresolved ? kFlagged : kOk;
}

// offsets

int cmd_offsets(const json& config, const RunOptions& opts, std::ostream& os, std::ostream& report) {
  require_seed(opts);
  Obj root(config, "");
  McSettings mc = mc_from(root, opts, true);
  const json& systems = root.get("systems");
  root.find("out");
  root.finish();
  if (!systems.is_array() || systems.empty()) fail("systems", "expected a non-empty array");

  struct System {
    std::string name;
    Constellation c;
    ChannelModel m;
    double anchor_db;
  };
  std::vector<System> parsed;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    Obj s(systems[i], "systems[" + std::to_string(i) + "]");
    std::string name = s.string("name");
    Constellation c = parse_constellation(s.object("constellation"));
    ChannelModel m = parse_channel(s.object("channel"), c.n_t());
    double anchor = s.number("anchor_snr_db");
    s.finish();
    parsed.push_back({name, c, m, anchor});
  }

  write_metadata(os, "offsets", config, opts);
  os << "system,M,d,anchor_snr_db,noise_draws,eps,eps_stderr,eps_prime,eps_prime_stderr,delta_lb_db,delta_ub_db,"
        "delta_prime_lb_db,delta_prime_ub_db,spread_db,spread_prime_db,flag\n";
  Csv row(os);
  int flagged = 0;
  for (const auto& s : parsed) {
    ExpansionBounds eb = epsilon_bounds(distance_dist(s.m, s.c), s.c.size());
    SnrGrid grid = SnrGrid::from_db_list({s.anchor_db});
    McConfig cfg = mc.cfg;
    if (mc.auto_noise) cfg.noise_draws_per_channel = suggested_noise_draws(eb.mi.lower / std::pow(grid[0], eb.d));
    EpsilonSeries em = empirical_epsilon(Quantity::mmse, grid, s.m, s.c, cfg, eb.d);
    EpsilonSeries ei = empirical_epsilon(Quantity::mi, grid, s.m, s.c, cfg, eb.d, eb.logM_limit);
    const Estimate& eps = em.leading[0].scaled;
    const Estimate& epsp = ei.leading[0].scaled;
    const bool flag = em.any_flagged || ei.any_flagged || !(eps.mean > 0.0) || !(epsp.mean > 0.0);
    row.cell(s.name).integer(s.c.size()).integer(eb.d).num(s.anchor_db).integer(static_cast<long long>(cfg.noise_draws_per_channel));
    row.num(eps.mean).num(eps.std_error).num(epsp.mean).num(epsp.std_error);
    if (eps.mean > 0.0 && epsp.mean > 0.0) {
      SnrOffsets off = snr_offsets(eb, eps.mean, epsp.mean);
      row.num(off.mmse_lb).num(off.mmse_ub).num(off.mi_lb).num(off.mi_ub);
    } else {
      row.empty().empty().empty().empty();
    }
    row.num(mmse_offset_spread_db(s.c.size(), eb.d)).num(mi_offset_spread_db(s.c.size(), eb.d));
    row.cell(flag ? "mc_unresolved" : "").end();
    flagged += flag;
    report << "offsets: " << s.name << " d = " << eb.d << (flag ? " (flagged: mc resolution insufficient)" : "")
           << '\n';
  }
  return flagged ? kFlagged : kOk;
}

// palloc

SubchannelSpec parse_subchannel(Obj o) {
  Constellation c = parse_constellation(o.object("constellation"));
  Obj f = o.object("fading");
  const std::string type = f.string("type");
  SubchannelSpec s{c, RayleighFading{0.0}};
  if (type == "rayleigh") {
    s.fading = RayleighFading{f.number("variance")};
  } else if (type == "ricean") {
    cd mean = parse_complex(f.get("mean"), f.at("mean"));
    s.fading = RiceanFading{mean, f.number("variance")};
  } else {
    fail(f.at("type"), "expected rayleigh or ricean");
  }
  f.finish();
  o.finish();
  return s;
}

int cmd_palloc(const json& config, const RunOptions& opts, std::ostream& os, std::ostream& report) {
  require_seed(opts);
  Obj root(config, "");
  const json& subs_json = root.get("subchannels");
  if (!subs_json.is_array() || subs_json.empty()) fail("subchannels", "expected a non-empty array");
  std::vector<SubchannelSpec> subs;
  for (std::size_t i = 0; i < subs_json.size(); ++i)
    subs.push_back(parse_subchannel(Obj(subs_json[i], "subchannels[" + std::to_string(i) + "]")));
  const double budget = root.number("budget");
  std::vector<double> db = parse_snr_db(root.get("snr_db"), "snr_db");
  const bool numeric = root.boolean_or("numeric", false);
  McSettings mc = mc_from(root, opts);
  root.find("out");
  root.finish();

  const bool all_rayleigh = std::all_of(subs.begin(), subs.end(),
                                        [](const auto& s) { return std::holds_alternative<RayleighFading>(s.fading); });
  std::vector<SubchannelSpec> as_ricean = subs;
  for (auto& s : as_ricean)
    if (const auto* r = std::get_if<RayleighFading>(&s.fading)) s.fading = RiceanFading{0.0, r->variance};
  PowerAllocation hs = guard("subchannels", [&] {
    return all_rayleigh ? palloc_rayleigh_highsnr(subs, budget) : palloc_ricean_highsnr(as_ricean, budget);
  });
  if (numeric && subs.size() > 4) fail("subchannels", "numeric allocation supports at most 4 subchannels");

  write_metadata(os, "palloc", config, opts);
  os << "# highsnr_rule: " << (all_rayleigh ? "rayleigh" : "ricean") << ", budget: " << format_number(budget) << '\n';
  const std::size_t K = subs.size();
  std::vector<std::string> head{"snr_db"};
  for (std::size_t k = 1; k <= K; ++k) head.push_back("p" + std::to_string(k) + "_highsnr");
  for (std::size_t k = 1; k <= K; ++k) head.push_back("p" + std::to_string(k) + "_numeric");
  for (const char* d : {"highsnr", "numeric"})
    for (const char* col : {"capacity_nats", "capacity_stderr_nats", "capacity_bits", "capacity_stderr_bits"})
      head.push_back(std::string(col).insert(8, std::string("_") + d));
  head.push_back("low_confidence");
  os << join(head, ",") << '\n';

  Csv row(os);
  int low = 0;
  for (double d : db) {
    const double snr = db_to_linear(d);
    Estimate ch = parallel_capacity(subs, hs.p, snr, mc.cfg);
    std::optional<NumericAllocation> na;
    if (numeric) na = palloc_numeric(subs, budget, snr, mc.cfg);
    row.num(d);
    for (double p : hs.p) row.num(p);
    for (std::size_t k = 0; k < K; ++k) na ? row.num(na->allocation.p[k]) : row.empty();
    row.num(ch.mean).num(ch.std_error).num(ch.mean / kLn2).num(ch.std_error / kLn2);
    if (na) {
      row.num(na->objective).num(na->objective_se).num(na->objective / kLn2).num(na->objective_se / kLn2);
      row.integer(na->low_confidence);
      low += na->low_confidence;
    } else {
      row.empty().empty().empty().empty().empty();
    }
    row.end();
  }
  report << "palloc: high-snr allocation (";
  for (std::size_t k = 0; k < K; ++k) report << (k ? ", " : "") << format_number(hs.p[k]);
  report << ")";
  if (low) report << ", " << low << " numeric point(s) low confidence";
  report << '\n';
  return low ? kFlagged : kOk;
}

// precode

CMatrix random_feasible_precoder(Stream& s, int n, double budget) {
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = s.cn();
  CMatrix z = a * a.adjoint();
  z *= budget / z.trace().real();
  return hermitian_sqrt(z);
}

int cmd_precode(const json& config, const RunOptions& opts, std::ostream& os, std::ostream& report) {
  require_seed(opts);
  Obj root(config, "");
  Constellation c = parse_constellation(root.object("constellation"));
  ChannelModel model = parse_channel(root.object("channel"), c.n_t());
  const double budget = root.number("budget");
  const int probes = static_cast<int>(root.integer_or("probes", 200, 0));
  const int restarts = static_cast<int>(root.integer_or("restarts", 4, 0));
  std::vector<double> db;
  if (const json* v = root.find("snr_db")) db = parse_snr_db(*v, "snr_db");
  McSettings mc = mc_from(root, opts);
  root.find("out");
  root.finish();
  if (!(budget > 0.0)) fail("budget", "must be positive");

  const int n_t = c.n_t(), n_r = model.n_r();
  CMatrix theta_t = CMatrix::Identity(n_t, n_t), theta_r = CMatrix::Identity(n_r, n_r);
  const char* path = "canonical";
  PrecoderReport pr;
  if (std::holds_alternative<CanonicalRayleigh>(model.spec())) {
    pr = guard("constellation", [&] { return precoder_canonical(c, n_r, budget); });
    if (pr.numeric_path) path = "numeric (constellation not coordinate-negation symmetric)";
  } else if (const auto* cr = std::get_if<CorrelatedRayleigh>(&model.spec())) {
    theta_t = cr->theta_t;
    theta_r = cr->theta_r;
    path = "correlated";
    pr = guard("channel", [&] { return precoder_correlated(c, theta_t, theta_r, n_r, budget, restarts, *opts.seed); });
  } else {
    fail("channel.type", "precode supports rayleigh and correlated channels");
  }

  Stream probe_stream(*opts.seed, 0x70726f6265ULL);
  int beaten = 0;
  double best_probe = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    CMatrix p = random_feasible_precoder(probe_stream, n_t, budget);
    double f = precoder_objective(c, theta_t, theta_r, p);
    best_probe = std::min(best_probe, f);
    if (f < pr.objective - 1e-6 * std::max(1.0, std::abs(pr.objective))) ++beaten;
  }

  write_metadata(os, "precode", config, opts);
  os << "# path: " << path << '\n';
  os << "# objective: " << format_number(pr.objective) << '\n';
  os << "# stationarity_residual: " << format_number(pr.stationarity_residual) << '\n';
  os << "# alignment_angle_rad: " << format_number(pr.alignment_angle) << '\n';
  os << "# probes: " << probes << ", probes_better_than_design: " << beaten << '\n';
  os << "snr_db,design_nats,design_stderr_nats,design_bits,design_stderr_bits,identity_nats,identity_stderr_nats,"
        "identity_bits,identity_stderr_bits\n";
  const CMatrix P = pr.precoder.P;
  const CMatrix P0 = std::sqrt(budget / n_t) * CMatrix::Identity(n_t, n_t);
  Csv row(os);
  for (double d : db) {
    const double snr = db_to_linear(d);
    auto with = [&](const CMatrix& pm) {
      ChannelSampler s = [&model, pm](Stream& st) { return CMatrix(model.sample(st) * pm); };
      return avg_all(snr, s, c.points(), mc.cfg).mi;
    };
    Estimate a = with(P), b = with(P0);
    row.num(d).num(a.mean).num(a.std_error).num(a.mean / kLn2).num(a.std_error / kLn2);
    row.num(b.mean).num(b.std_error).num(b.mean / kLn2).num(b.std_error / kLn2).end();
  }

  report << "precode: " << path << " path, budget " << format_number(budget) << "\nprecoder P =\n"
         << matrix_text(P) << "objective " << format_number(pr.objective) << ", stationarity residual "
         << format_number(pr.stationarity_residual) << ", iterations " << pr.iterations << '\n'
         << "alignment with theta_t eigenvectors: " << format_number(pr.alignment_angle) << " rad\n";
  if (probes) {
    report << "certification: " << probes - beaten << " of " << probes
           << " random feasible probes are no better (best probe objective " << format_number(best_probe) << ")\n";
  }
  return beaten ? kFlagged : kOk;
}

// stcode

const char* ordering_symbol(Ordering o) { return o == Ordering::equal ? " = " : " > "; }

int cmd_stcode(const json& config, const RunOptions& opts, std::ostream& os, std::ostream& report) {
  Obj root(config, "");
  const int n_r = static_cast<int>(root.integer("n_r", 1));
  const json& codes_json = root.get("codes");
  std::vector<double> db;
  if (const json* v = root.find("mc_snr_db")) db = parse_snr_db(*v, "mc_snr_db");
  if (!db.empty()) require_seed(opts);
  std::optional<McSettings> mc;
  if (!db.empty()) mc = mc_from(root, opts);
  else if (root.has("mc")) fail("mc", "only used together with mc_snr_db");
  root.find("out");
  root.finish();
  if (!codes_json.is_array() || codes_json.empty()) fail("codes", "expected a non-empty array");

  std::vector<std::string> names;
  std::vector<SpaceTimeCode> codes;
  for (std::size_t i = 0; i < codes_json.size(); ++i) {
    const std::string p = "codes[" + std::to_string(i) + "]";
    Obj o(codes_json[i], p);
    names.push_back(o.string("name"));
    const int n_t = static_cast<int>(o.integer("n_t", 1)), t = static_cast<int>(o.integer("t", 1));
    const json& cws = o.get("codewords");
    o.finish();
    if (!cws.is_array()) fail(p + ".codewords", "expected an array of matrices");
    std::vector<CMatrix> words;
    for (std::size_t w = 0; w < cws.size(); ++w) {
      const std::string wp = p + ".codewords[" + std::to_string(w) + "]";
      words.push_back(parse_cmatrix(cws[w], wp));
      if (words.back().rows() != n_t || words.back().cols() != t) fail(wp, "expected an n_t x t matrix");
    }
    codes.push_back(guard(p + ".codewords", [&] { return SpaceTimeCode(n_t, t, words); }));
  }
  for (std::size_t i = 1; i < codes.size(); ++i)
    if (codes[i].n_t() != codes[0].n_t() || codes[i].t() != codes[0].t() || codes[i].size() != codes[0].size())
      fail("codes[" + std::to_string(i) + "]", "all codes must share n_t, t and the number of codewords");

  std::vector<StCriteria> crit;
  for (const auto& code : codes) crit.push_back(st_criteria(code, n_r));
  std::vector<std::size_t> order(codes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return compare_criteria(crit[a], crit[b]) == Ordering::first_better;
  });
  std::string ordering = names[order[0]];
  for (std::size_t k = 1; k < order.size(); ++k)
    ordering += ordering_symbol(compare_criteria(crit[order[k - 1]], crit[order[k]])) + names[order[k]];

  write_metadata(os, "stcode", config, opts);
  os << "# ordering: " << ordering << '\n';
  os << "# criterion: sum over minimal-rank pairs of prod 1/lambda^n_r, smaller is better\n";
  os << "code,snr_db,r_min,criterion,d,extrapolated,pe_mc,pe_mc_stderr\n";
  Csv row(os);
  ChannelModel model = ChannelModel::canonical(codes[0].n_t(), n_r);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    auto emit = [&](const std::string& snr_cell, const Estimate* pe) {
      row.cell(names[i]).cell(snr_cell).integer(crit[i].r_min).num(crit[i].criterion).integer(crit[i].d);
      row.integer(crit[i].extrapolated);
      pe ? row.num(pe->mean).num(pe->std_error) : row.empty().empty();
      row.end();
    };
    if (db.empty()) emit("", nullptr);
    for (double d : db) {
      Estimate pe = avg_all(db_to_linear(d), model, codes[i], mc->cfg).pe;
      emit(format_number(d), &pe);
    }
  }
  report << "stcode: ordering " << ordering << '\n';
  for (std::size_t i = 0; i < codes.size(); ++i)
    report << "  " << names[i] << ": r_min " << crit[i].r_min << ", criterion " << format_number(crit[i].criterion)
           << ", d " << crit[i].d << (crit[i].extrapolated ? " (outside the certified n_t = 2 scope)" : "") << '\n';
  return kOk;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t config_digest(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set: expected key.path=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!config.is_object()) throw ConfigError("--set: configuration root is not an object");
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: empty path component in '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("--set: " + key.substr(0, dot) + " is not an object");
    node = &next;
    start = dot + 1;
  }
}

int run_command(const std::string& command, const json& config, const RunOptions& opts, std::ostream& csv,
                std::ostream& report) {
  if (command == "curve") return cmd_curve(config, opts, csv, report);
  if (command == "offsets") return cmd_offsets(config, opts, csv, report);
  if (command == "palloc") return cmd_palloc(config, opts, csv, report);
  if (command == "precode") return cmd_precode(config, opts, csv, report);
  if (command == "stcode") return cmd_stcode(config, opts, csv, report);
  throw ConfigError("command: unknown command '" + command + "'");
}

int run_command_guarded(const std::string& command, const json& config, const RunOptions& opts, std::ostream& csv,
                        std::ostream& report, std::ostream& err) {
  std::ostringstream buf;
  try {
    int code = run_command(command, config, opts, buf, report);
    csv << buf.str();
    return code;
  } catch (const PrecoderNotConverged& e) {
    err << "fadecap: numeric error: " << e.what() << " (best objective " << format_number(e.best().objective)
        << ", residual " << format_number(e.best().stationarity_residual) << ")\n";
    return kNumeric;
  } catch (const NumericError& e) {
    err << "fadecap: numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const InvalidInput& e) {
    err << "fadecap: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "fadecap: config error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace fadecap::cli
