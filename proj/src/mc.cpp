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

#include "fadecap/mc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fadecap/error.hpp"
#include "parallel.hpp"

namespace fadecap {

Quantity parse_quantity(std::string_view name) {
  if (name == "mmse") return Quantity::mmse;
  if (name == "mi") return Quantity::mi;
  if (name == "pe") return Quantity::pe;
  throw InvalidInput("unknown quantity '" + std::string(name) + "' (expected mmse, mi or pe)");
}

std::string_view quantity_name(Quantity q) {
  switch (q) {
    case Quantity::mmse: return "mmse";
    case Quantity::mi: return "mi";
    case Quantity::pe: return "pe";
  }
  return "?";
}

void McConfig::validate() const {
  if (channel_draws < 1) throw InvalidInput("mc: channel_draws must be >= 1");
  if (noise_draws_per_channel < 1) throw InvalidInput("mc: noise_draws_per_channel must be >= 1");
  if (parallel_chunks < 1) throw InvalidInput("mc: parallel_chunks must be >= 1");
}

const Estimate& QuantityEstimates::get(Quantity q) const {
  switch (q) {
    case Quantity::mmse: return mmse;
    case Quantity::mi: return mi;
    case Quantity::pe: return pe;
  }
  return mi;
}

namespace {

struct Triple {
  double gap = 0.0;
  double mmse = 0.0;
  double pe = 0.0;
};

// Exact posterior computations for one channel. For transmitted point i and
// noise n, the log-likelihood of hypothesis j relative to the truth is
//   e_j = -||D_ij + n||^2 + ||n||^2 = -||D_ij||^2 - 2 Re(D_ij^H n),
// with D_ij = sqrt(snr) G (x_i - x_j).
class Kernel {
 public:
  Kernel(double snr, const CMatrix& g, const CMatrix& signals) : snr_(snr), m_(signals.cols()) {
    CMatrix r = std::sqrt(snr) * (g * signals);
    dim_ = r.rows();
    d_.resize(dim_, m_ * m_);
    a_.resize(m_ * m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j < m_; ++j) {
        d_.col(i * m_ + j) = r.col(i) - r.col(j);
        a_(i * m_ + j) = d_.col(i * m_ + j).squaredNorm();
      }
    }
    e_.resize(m_);
    w_.resize(m_);
    wc_.resize(m_);
    proj_.resize(m_);
    v_.resize(dim_);
    noise_.resize(dim_);
  }

  Triple draw(Stream& s) {
    for (Eigen::Index k = 0; k < dim_; ++k) noise_(k) = s.cn();
    Triple t;
    for (Eigen::Index i = 0; i < m_; ++i) {
      auto di = d_.middleCols(i * m_, m_);
      proj_.noalias() = di.adjoint() * noise_;
      double emax = 0.0;
      for (Eigen::Index j = 0; j < m_; ++j) {
        e_(j) = j == i ? 0.0 : -a_(i * m_ + j) - 2.0 * proj_(j).real();
        emax = std::max(emax, e_(j));
      }
      double others = 0.0;
      for (Eigen::Index j = 0; j < m_; ++j) {
        w_(j) = std::exp(e_(j) - emax);
        if (j != i) others += w_(j);
      }
      const double z = others + w_(i);
      if (emax == 0.0) {
        t.gap += std::log1p(others);
      } else {
        t.gap += emax + std::log(z);
        t.pe += 1.0;
      }
      wc_ = (w_ / z).cast<cd>();
      v_.noalias() = di * wc_;
      t.mmse += v_.squaredNorm() / snr_;
    }
    const double inv = 1.0 / static_cast<double>(m_);
    t.gap *= inv;
    t.mmse *= inv;
    t.pe *= inv;
    return t;
  }

 private:
  double snr_;
  Eigen::Index m_;
  Eigen::Index dim_ = 0;
  CMatrix d_;
  Eigen::VectorXd a_;
  Eigen::VectorXd e_;
  Eigen::VectorXd w_;
  Eigen::VectorXcd wc_;
  Eigen::VectorXcd proj_;
  Eigen::VectorXcd v_;
  Eigen::VectorXcd noise_;
};

struct Acc3 {
  detail::Accumulator gap, mmse, pe;
  void add(const Triple& t) {
    gap.add(t.gap);
    mmse.add(t.mmse);
    pe.add(t.pe);
  }
  void merge(const Acc3& o) {
    gap.merge(o.gap);
    mmse.merge(o.mmse);
    pe.merge(o.pe);
  }
};

QuantityEstimates finish(const Acc3& acc, Eigen::Index m) {
  QuantityEstimates q;
  q.mi_gap = acc.gap.estimate();
  q.mi = q.mi_gap;
  q.mi.mean = std::log(static_cast<double>(m)) - q.mi_gap.mean;
  q.mmse = acc.mmse.estimate();
  q.pe = acc.pe.estimate();
  return q;
}

// No signal (e.g. zero observed errors) or a standard error above 20%.
bool resolution_flag(const Estimate& e) { return e.mean == 0.0 || !(e.std_error <= 0.2 * std::abs(e.mean)); }

void check_snr(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InvalidInput("snr must be positive and finite");
}

}  // namespace

QuantityEstimates all_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg) {
  check_snr(snr);
  cfg.validate();
  if (h.cols() != c.n_t()) throw InvalidInput("channel columns do not match constellation dimension");
  auto parts = detail::run_chunks(cfg.parallel_chunks, cfg.max_threads, [&](std::size_t chunk) {
    auto [lo, hi] = detail::chunk_range(cfg.noise_draws_per_channel, cfg.parallel_chunks, chunk);
    Acc3 acc;
    if (lo == hi) return acc;
    Kernel k(snr, h, c.points());
    Stream s(cfg.seed, detail::noise_stream(chunk));
    for (std::size_t n = lo; n < hi; ++n) acc.add(k.draw(s));
    return acc;
  });
  Acc3 total;
  for (const auto& p : parts) total.merge(p);
  return finish(total, c.size());
}

Estimate mmse_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg) {
  return all_fixed_h(snr, h, c, cfg).mmse;
}

Estimate mi_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg) {
  return all_fixed_h(snr, h, c, cfg).mi;
}

Estimate pe_ml_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg) {
  return all_fixed_h(snr, h, c, cfg).pe;
}

QuantityEstimates avg_all(double snr, const ChannelSampler& sampler, const CMatrix& signals, const McConfig& cfg) {
  check_snr(snr);
  cfg.validate();
  auto parts = detail::run_chunks(cfg.parallel_chunks, cfg.max_threads, [&](std::size_t chunk) {
    auto [lo, hi] = detail::chunk_range(cfg.channel_draws, cfg.parallel_chunks, chunk);
    Acc3 acc;
    Stream hs(cfg.seed, detail::channel_stream(chunk));
    Stream ns(cfg.seed, detail::noise_stream(chunk));
    for (std::size_t n = lo; n < hi; ++n) {
      CMatrix g = sampler(hs);
      if (g.cols() != signals.rows()) throw InvalidInput("channel columns do not match signal dimension");
      Kernel k(snr, g, signals);
      Triple mean;
      for (std::size_t w = 0; w < cfg.noise_draws_per_channel; ++w) {
        Triple t = k.draw(ns);
        mean.gap += t.gap;
        mean.mmse += t.mmse;
        mean.pe += t.pe;
      }
      const double inv = 1.0 / static_cast<double>(cfg.noise_draws_per_channel);
      mean.gap *= inv;
      mean.mmse *= inv;
      mean.pe *= inv;
      acc.add(mean);
    }
    return acc;
  });
  Acc3 total;
  for (const auto& p : parts) total.merge(p);
  return finish(total, signals.cols());
}

std::vector<double> per_channel_gap(double snr, const ChannelSampler& sampler, const CMatrix& signals,
                                    const McConfig& cfg) {
  check_snr(snr);
  cfg.validate();
  auto parts = detail::run_chunks(cfg.parallel_chunks, cfg.max_threads, [&](std::size_t chunk) {
    auto [lo, hi] = detail::chunk_range(cfg.channel_draws, cfg.parallel_chunks, chunk);
    std::vector<double> out;
    Stream hs(cfg.seed, detail::channel_stream(chunk));
    Stream ns(cfg.seed, detail::noise_stream(chunk));
    for (std::size_t n = lo; n < hi; ++n) {
      Kernel k(snr, sampler(hs), signals);
      double gap = 0.0;
      for (std::size_t w = 0; w < cfg.noise_draws_per_channel; ++w) gap += k.draw(ns).gap;
      out.push_back(gap / static_cast<double>(cfg.noise_draws_per_channel));
    }
    return out;
  });
  std::vector<double> all;
  all.reserve(cfg.channel_draws);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

QuantityEstimates avg_all(double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg) {
  if (m.n_t() != c.n_t()) throw InvalidInput("channel n_t does not match constellation n_t");
  return avg_all(snr, [&m](Stream& s) { return m.sample(s); }, c.points(), cfg);
}

QuantityEstimates avg_all(double snr, const ChannelModel& m, const SpaceTimeCode& code, const McConfig& cfg) {
  if (m.n_t() != code.n_t()) throw InvalidInput("channel n_t does not match code n_t");
  const int t = code.t();
  return avg_all(snr, [&m, t](Stream& s) { return expand_channel(m.sample(s), t); },
                 code.as_constellation().points(), cfg);
}

Estimate avg_quantity(Quantity q, double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg) {
  return avg_all(snr, m, c, cfg).get(q);
}

EpsilonSeries empirical_epsilon(Quantity q, const SnrGrid& grid, const ChannelModel& m, const Constellation& c,
                                const McConfig& cfg, int d, double logM_limit) {
  if (d < 1) throw InvalidInput("empirical_epsilon: d must be >= 1");
  const double logM = std::log(static_cast<double>(c.size()));
  const double shift = std::isnan(logM_limit) ? 0.0 : logM - logM_limit;
  const int power = q == Quantity::mmse ? d + 1 : d;

  EpsilonSeries out;
  std::vector<Estimate> raw;
  for (double snr : grid.points()) {
    QuantityEstimates all = avg_all(snr, m, c, cfg);
    Estimate v = q == Quantity::mi ? all.mi_gap : all.get(q);
    v.mean -= q == Quantity::mi ? shift : 0.0;
    raw.push_back(v);
    const double f = std::pow(snr, power);
    ScaledPoint p{snr, {v.mean * f, v.std_error * f, v.n_samples}, false};
    p.flagged = resolution_flag(p.scaled);
    out.any_flagged = out.any_flagged || p.flagged;
    out.leading.push_back(p);
  }
  const double eps = out.leading.back().scaled.mean;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double snr = grid[k];
    const double f = std::pow(snr, power + 1);
    ScaledPoint p{snr, {(raw[k].mean - eps / std::pow(snr, power)) * f, raw[k].std_error * f, raw[k].n_samples}, false};
    p.flagged = resolution_flag(p.scaled);
    out.second_order.push_back(p);
  }
  return out;
}

std::size_t suggested_noise_draws(double predicted_gap) {
  if (!(predicted_gap > 0.0)) throw InvalidInput("suggested_noise_draws: gap must be positive");
  double n = std::max(1e4, std::ceil(10.0 / predicted_gap));
  return static_cast<std::size_t>(std::min(n, 1e9));
}

}  // namespace fadecap
